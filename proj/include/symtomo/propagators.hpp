#pragma once

#include <span>
#include <vector>

#include "symtomo/core.hpp"
#include "symtomo/dynamics.hpp"
#include "symtomo/tomography.hpp"

namespace symtomo {

/// Mode sums of the measurement:
///   kappa = (2/T^2) sum_n W_n^2 / (da_n^2 (W_n^2 - w^2)^2)
///   xi    = (2/T^2) sum_n (-1)^n W_n^2 / (da_n^2 (W_n^2 - w^2)^2)
struct PrecisionCoefficients {
    double kappa = 0.0;
    double xi = 0.0;
    int n_terms_used = 0;
    double tail_estimate = 0.0;  ///< bound on the neglected remainder of either sum
};

/// Converged coefficients. Uniform specs are summed until the remainder bound
/// and the change between successive estimates are both below tol; per-mode
/// specs are finite sums. Throws ResonanceError when some W_n equals omega
/// and TruncationError when max_terms is not enough.
PrecisionCoefficients precision_coefficients(const MeasurementSpec& meas, const OscillatorModel& model,
                                             double tol = 1e-10, int max_terms = 10'000'000);

/// Plain partial sums over n = 1..n_terms (unmeasured modes contribute 0).
/// tail_estimate is left at 0.
PrecisionCoefficients precision_partial_sums(const MeasurementSpec& meas, const OscillatorModel& model,
                                             int n_terms);

/// Tomogram propagator with delta factors in the direction variables:
///   Pi(x', x) = delta((mu', nu') - L(mu, nu)) N(X - X' - Xbar(mu, nu); sigma2(mu, nu)).
/// Applying it gives T_out(X, mu, nu) = int T_in(X', L(mu, nu)) N(X - X' - Xbar; sigma2) dX'.
struct StructuredPropagator {
    Map2 map;
    QuadraticForm2 sigma2;
    LinearForm2 mean_shift;
    double duration = 0.0;

    double variance(double mu, double nu) const { return sigma2(mu, nu); }
    double shift(double mu, double nu) const { return mean_shift(mu, nu); }
};

StructuredPropagator identity_propagator();

/// Propagator of `first` followed by `second`.
StructuredPropagator compose(const StructuredPropagator& first, const StructuredPropagator& second);

/// Non-selective propagator of the measured oscillator. omega = 0 is accepted
/// and gives the continuous limit of every coefficient.
StructuredPropagator oscillator_measured_propagator(const OscillatorModel& model, const MeasurementSpec& meas,
                                                    double tol = 1e-10);

/// Closed-form particle propagator. Needs omega = 0 and either a uniform
/// accuracy (possibly +inf) or no measurement at all.
StructuredPropagator particle_measured_propagator(const OscillatorModel& model, const MeasurementSpec& meas);

/// Unmeasured evolution over [0, T].
StructuredPropagator isolated_propagator(const OscillatorModel& model, double T);

/// Gaussian input stays Gaussian: s2_out = s2_in o L + 2 sigma2, mean_out = mean_in o L + Xbar.
GaussianTomogram apply_propagator(const GaussianTomogram& in, const StructuredPropagator& prop);

/// Sampled input: the X' integral is a Gaussian convolution on the grid of
/// the input tomogram at the mapped direction.
TomogramFamily apply_propagator(const TomogramFamily& in, const StructuredPropagator& prop);

/// Pointwise values of the evolved tomogram on a set of phase points.
std::vector<double> apply_propagator(const TomogramFamily& in, const StructuredPropagator& prop,
                                     std::span<const PhasePoint> query);
std::vector<double> apply_propagator(const GaussianTomogram& in, const StructuredPropagator& prop,
                                     std::span<const PhasePoint> query);

/// Packet (p, l) evolved by the measured particle propagator, in closed form.
GaussianTomogram evolved_gaussian_tomogram(double p, double l, const OscillatorModel& model,
                                           const MeasurementSpec& meas);

}  // namespace symtomo
