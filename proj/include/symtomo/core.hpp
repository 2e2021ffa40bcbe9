#pragma once

#include <complex>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

#include "symtomo/errors.hpp"

namespace symtomo {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultTolerance = 1e-8;

/// Uniform grid of n points on [lo, hi], endpoints included.
class UniformGrid {
public:
    UniformGrid(double lo, double hi, int n);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int size() const { return n_; }
    double spacing() const { return h_; }
    double operator[](int i) const { return lo_ + h_ * i; }
    std::vector<double> points() const;

    /// Trapezoidal weights, i.e. spacing with halved endpoints.
    double weight(int i) const { return (i == 0 || i == n_ - 1) ? 0.5 * h_ : h_; }

    /// Index of the last grid point <= x, clamped to [0, n-2].
    int cell(double x) const;

    bool operator==(const UniformGrid&) const = default;

private:
    double lo_;
    double hi_;
    int n_;
    double h_;
};

/// Position grid. Requires at least 8 points.
class QGrid : public UniformGrid {
public:
    QGrid(double q_min, double q_max, int n_points);
    double q_min() const { return lo(); }
    double q_max() const { return hi(); }
    int n_points() const { return size(); }
};

/// Point (X, mu, nu) of the tomographic family, X = mu q + nu p.
struct PhasePoint {
    double X = 0.0;
    double mu = 0.0;
    double nu = 0.0;

    PhasePoint scaled(double k) const { return {k * X, k * mu, k * nu}; }
};

/// Throws DomainError for the degenerate direction (0, 0).
void require_direction(double mu, double nu);

/// a mu^2 + b mu nu + c nu^2.
struct QuadraticForm2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator()(double mu, double nu) const { return a * mu * mu + b * mu * nu + c * nu * nu; }
    bool is_positive_semidefinite(double tol = 1e-14) const;
    QuadraticForm2 operator+(const QuadraticForm2& o) const { return {a + o.a, b + o.b, c + o.c}; }
    QuadraticForm2 operator*(double s) const { return {s * a, s * b, s * c}; }
};

/// alpha mu + beta nu.
struct LinearForm2 {
    double alpha = 0.0;
    double beta = 0.0;

    double operator()(double mu, double nu) const { return alpha * mu + beta * nu; }
    LinearForm2 operator+(const LinearForm2& o) const { return {alpha + o.alpha, beta + o.beta}; }
};

/// Linear map (mu, nu) -> (mu', nu') = M (mu, nu).
struct Map2 {
    double m00 = 1.0, m01 = 0.0;
    double m10 = 0.0, m11 = 1.0;

    double det() const { return m00 * m11 - m01 * m10; }
    std::pair<double, double> operator()(double mu, double nu) const {
        return {m00 * mu + m01 * nu, m10 * mu + m11 * nu};
    }
    Map2 operator*(const Map2& o) const;
    static Map2 identity() { return {}; }
};

/// q o L as a new quadratic form.
QuadraticForm2 compose(const QuadraticForm2& q, const Map2& map);
/// l o L as a new linear form.
LinearForm2 compose(const LinearForm2& l, const Map2& map);

// ---------------------------------------------------------------------------
// quadrature

struct QuadratureOptions {
    double tol = kDefaultTolerance;
    int max_depth = 48;
    int max_intervals = 200000;
};

/// Adaptive Gauss-Kronrod (7/15) integration on [lo, hi]. Infinite limits
/// are accepted and mapped to a finite interval with x = t/(1-t^2) (one
/// infinite side uses x = lo + t/(1-t)). Throws QuadratureError when the
/// error estimate cannot be pushed below tol.
double integrate_real(const std::function<double(double)>& f, double lo, double hi,
                      double tol = kDefaultTolerance);
cplx integrate_complex(const std::function<cplx(double)>& f, double lo, double hi,
                       double tol = kDefaultTolerance);

template <class F>
auto integrate_1d(F&& f, double lo, double hi, double tol = kDefaultTolerance) {
    if constexpr (std::is_convertible_v<std::invoke_result_t<F&, double>, double>) {
        return integrate_real(std::function<double(double)>(std::forward<F>(f)), lo, hi, tol);
    } else {
        return integrate_complex(std::function<cplx(double)>(std::forward<F>(f)), lo, hi, tol);
    }
}

/// Same as integrate_1d, also reporting the final error estimate.
struct QuadratureResult {
    double value;
    double error;
    int intervals;
};
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    const QuadratureOptions& opts = {});

/// Trapezoidal sum of samples on a uniform grid.
double trapezoid(std::span<const double> values, double spacing);
cplx trapezoid(std::span<const cplx> values, double spacing);

// ---------------------------------------------------------------------------
// sampled functions

/// g(X) = integral f(X') N(X'; X - mean_shift, variance) dX' on the grid of f.
/// f is taken as the piecewise-linear interpolant of its samples (zero outside
/// the grid), and the Gaussian is integrated exactly against each segment.
/// variance == 0 reduces to the shift g(X) = f(X - mean_shift).
/// Throws DomainError when the support of f, widened by |mean_shift| and six
/// standard deviations, leaves the grid.
std::vector<double> gaussian_convolve(const UniformGrid& grid, std::span<const double> f,
                                      double mean_shift, double variance);

/// Piecewise-linear interpolation of samples on a uniform grid (zero outside).
double interpolate_linear(const UniformGrid& grid, std::span<const double> f, double x);

/// 8-point Lagrange interpolation of complex samples (zero outside the grid).
cplx interpolate_lagrange(const UniformGrid& grid, std::span<const cplx> f, double x);

/// Normalized Gaussian density with the given mean and variance.
double normal_pdf(double x, double mean, double variance);

/// Gauss-Hermite nodes/weights for integral exp(-x^2) g(x) dx.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

}  // namespace symtomo
