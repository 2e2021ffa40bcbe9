#pragma once

#include <stdexcept>
#include <string>

namespace symtomo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of the operation (degenerate direction,
/// non-positive width, grid that does not cover the kernel, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Sampling grid too coarse for the oscillation it has to resolve.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// sin(omega T) = 0: the boundary-value trajectory is not unique.
class CausticError : public Error {
public:
    using Error::Error;
};

/// A mode frequency pi n / T coincides with the oscillator frequency.
class ResonanceError : public Error {
public:
    using Error::Error;
};

/// A truncated series could not reach the requested tail bound.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// Inverse tomographic map violated its accuracy guarantees.
class ReconstructionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace symtomo
