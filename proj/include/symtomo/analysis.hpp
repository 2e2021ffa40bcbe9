#pragma once

#include "symtomo/dynamics.hpp"
#include "symtomo/tomography.hpp"

namespace symtomo {

/// -int T ln T dX of a Gaussian tomogram: (1 + ln pi)/2 + ln(s^2)/2.
double symplectic_entropy_gaussian(const GaussianTomogram& tomo, double mu, double nu);

/// Entropy gained by packet (p, l) under the measured particle propagator
/// relative to unmeasured free evolution over the same duration.
double entropy_delta(double p, double l, const OscillatorModel& model, const MeasurementSpec& meas, double mu,
                     double nu);

struct Moments {
    double mean;
    double variance;
};

/// Closed form: mean m(mu, nu), variance s^2/2.
Moments tomogram_moments(const GaussianTomogram& tomo, double mu, double nu);

/// Trapezoidal moments of a sampled tomogram. Throws DomainError when the
/// sampled mass differs from 1 by more than mass_tol.
Moments tomogram_moments(const SampledTomogram& tomo, double mass_tol = 1e-6);

}  // namespace symtomo
