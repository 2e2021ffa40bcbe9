#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "symtomo/core.hpp"
#include "symtomo/dynamics.hpp"
#include "symtomo/propagators.hpp"
#include "symtomo/tomography.hpp"

namespace symtomo {

// ---------------------------------------------------------------------------
// Sliced path integral

/// Restricted path integral on n_slices time steps. Interior positions are
/// integrated exactly as a complex Gaussian (LU of the quadratic form); the
/// action uses trapezoidal potential and force terms, and mode amplitudes of
/// the sliced path are its discrete sine transform. The weight is
/// exp(-sum_n (eta_n - a_n)^2 / da_n^2) over the measured modes.
/// Throws CausticError when a pivot of the quadratic form vanishes.
cplx discrete_path_amplitude(const OscillatorModel& model, const MeasurementSpec& meas,
                             const SpectralOutcome& outcome, double q_i, double q_f, int n_slices);

/// Richardson extrapolation of discrete_path_amplitude over n, 2n, 4n slices
/// (error O(1/n^2) with an O(1/n^4) correction).
cplx discrete_path_amplitude_extrapolated(const OscillatorModel& model, const MeasurementSpec& meas,
                                          const SpectralOutcome& outcome, double q_i, double q_f,
                                          int base_slices = 16);

/// sqrt(m / (2 pi i T)) exp(i m (q_f - q_i)^2 / (2 T)).
cplx free_particle_kernel(double mass, double T, double q_i, double q_f);

/// Unforced oscillator kernel with the Maslov phase past each caustic.
cplx oscillator_kernel(double mass, double omega, double T, double q_i, double q_f);

// ---------------------------------------------------------------------------
// Numeric tomogram propagators

/// Reference input for the numeric propagators: the packet
/// (pi l^2)^(-1/4) exp(i p (q - q0) - (q - q0)^2 / (2 l^2)).
struct ReferencePacket {
    double p = 0.0;
    double l = 1.0;
    double q0 = 0.0;

    /// <exp(i(mu q + nu p))> in closed form.
    cplx characteristic(double mu, double nu) const;
};

struct NumericPropagatorOptions {
    ReferencePacket reference;
    double q_min = -7.0, q_max = 7.0;  ///< shared input/output position grid
    int n_q = 97;
    double a_halfwidth = 12.0;  ///< outcome grid [-a, a] per mode (quadrature path)
    int n_a = 97;
    /// Outcome integrals done in closed form per mode instead of by quadrature.
    /// Forced on when more than two modes are measured.
    bool analytic_outcomes = false;
    double char_floor = 1e-9;  ///< |c_in| below which the kernel ratio is not used
};

/// Density matrix on the grid after the non-selective measured evolution of
/// the reference packet: int da (outcome density) U_a |phi><phi| U_a^dagger.
Eigen::MatrixXcd evolved_density_numeric(const OscillatorModel& model, const MeasurementSpec& meas,
                                         const NumericPropagatorOptions& opts = {});

/// Same for one fixed outcome: U_a |phi><phi| U_a^dagger (unnormalized).
Eigen::MatrixXcd selected_density_numeric(const OscillatorModel& model, const MeasurementSpec& meas,
                                          const SpectralOutcome& outcome, const NumericPropagatorOptions& opts = {});

/// <exp(i k (mu q + nu p))> of a grid density for k = j h / nu, j = -J..J
/// (b = k nu lands on the grid). For nu = 0 the step is dk_zero_nu.
struct CharacteristicSamples {
    std::vector<double> k;
    std::vector<cplx> value;
};
CharacteristicSamples characteristic_samples(const QGrid& grid, const Eigen::MatrixXcd& rho, double mu, double nu,
                                             int J, double dk_zero_nu = 0.1);

/// X'-profile of a numeric propagator at direction (mu, nu): K(u) with
/// T_out(X, mu, nu) = int T_in(X', L(mu, nu)) K(X - X') dX'. K is recovered
/// from the ratio of characteristic functions and smoothed by a Gaussian of
/// variance mollifier2 chosen to suppress the truncation in k.
struct PropagatorProfile {
    double mu = 0.0, nu = 0.0;
    double mapped_mu = 0.0, mapped_nu = 0.0;
    std::vector<double> k;
    std::vector<cplx> kernel_hat;
    UniformGrid u_grid{0.0, 1.0, 2};
    std::vector<double> profile;
    double mollifier2 = 0.0;
    double mass = 0.0;      ///< kernel_hat(0), the X' integral of the propagator
    double mean = 0.0;      ///< fitted Gaussian mean
    double variance = 0.0;  ///< fitted Gaussian variance with the mollifier removed
    double max_imag = 0.0;  ///< largest imaginary residue of the profile

    double operator()(double u) const { return interpolate_linear(u_grid, profile, u); }
};

PropagatorProfile nonselective_profile(const OscillatorModel& model, const MeasurementSpec& meas, double mu,
                                       double nu, const NumericPropagatorOptions& opts = {});

/// Fixed outcome. The profile is relative to the reference packet and
/// weighted by outcome_measure_density, so its mass is the probability
/// density of the outcome a.
PropagatorProfile partial_profile(const OscillatorModel& model, const MeasurementSpec& meas,
                                  const SpectralOutcome& outcome, double mu, double nu,
                                  const NumericPropagatorOptions& opts = {});

/// Pointwise kernel K(X - X') g(mu' - L_1) g(nu' - L_2) with Gaussian
/// mollifiers g of the given width standing in for the direction deltas.
double nonselective_propagator_numeric(const PropagatorProfile& profile, const PhasePoint& x_prime,
                                       const PhasePoint& x, double delta_width);
cplx partial_propagator_numeric(const PropagatorProfile& profile, const PhasePoint& x_prime, const PhasePoint& x,
                                double delta_width);

/// I(k) = int d^3x' T(x') Pi(k x', x) with the pointwise kernel above, where
/// T(x') is computed directly from psi at every direction (no scaling rule).
/// Degree -2 homogeneity means I(k) = k^-2 I(1).
double propagator_pairing(const PropagatorProfile& profile, const WaveFunction& psi, const PhasePoint& x,
                          double k, double delta_width, int n_hermite = 12);

/// Classical direction map of the unmeasured model, L(mu, nu).
Map2 classical_direction_map(const OscillatorModel& model, double T);

// ---------------------------------------------------------------------------
// Fokker-Planck check

using PropagatorFamily = std::function<StructuredPropagator(double T)>;

/// Particle propagators with da^2(T) = c / T.
PropagatorFamily particle_family_scaled(const OscillatorModel& model, double c);

struct FokkerPlanckSample {
    double X_prime, X, mu, nu, t;
};

struct FokkerPlanckResidual {
    double residual;    ///< d_t G - (mu/m) d_nu G + f nu d_X G - k nu^2 d_X^2 G
    double drift;       ///< d_t G - (mu/m) d_nu G + f nu d_X G alone
    double diffusion;   ///< nu^2 d_X^2 G
    double chain_rule;  ///< |d_t L - (mu/m) d_nu L| on the mapped directions
};

/// Central-difference residual of the forward equation evaluated on the
/// Gaussian factor of the family at fixed mapped directions. `step` is the
/// relative differencing step.
FokkerPlanckResidual fokker_planck_residual(const PropagatorFamily& family, const OscillatorModel& model,
                                            const FokkerPlanckSample& sample, double k_strength, double step);

/// Least-squares k over a sample set.
double fit_diffusion_strength(const PropagatorFamily& family, const OscillatorModel& model,
                              std::span<const FokkerPlanckSample> samples, double step);

// ---------------------------------------------------------------------------

/// -int T ln T dX by the trapezoid rule with 0 ln 0 = 0. Values below -1e-10
/// throw DomainError; smaller negative values are read as 0.
double entropy_numeric(const UniformGrid& x_grid, std::span<const double> values);

// ---------------------------------------------------------------------------
// Outcome-integrated unitarity

struct UnitarityOptions {
    int n_packets = 32;
    double center_lo = -6.2, center_hi = 6.2;
    double packet_width = 0.2;
    double in_lo = -7.5, in_hi = 7.5;
    int n_in = 376;
    double out_lo = -24.0, out_hi = 24.0;
    int n_out = 481;
    int n_a = 241;
};

struct UnitarityReport {
    Eigen::MatrixXcd gram;     ///< int da rho(a) <U_a phi_j | U_a phi_k>
    Eigen::MatrixXcd overlap;  ///< <phi_j | phi_k>
    double deviation;          ///< max |S^-1/2 G S^-1/2 - I|
    double overlap_condition;
};

/// Gram matrix of the outcome-integrated U_a^dagger U_a in a basis of packets
/// centered on a uniform grid. Needs a single measured mode.
UnitarityReport outcome_unitarity(const OscillatorModel& model, const MeasurementSpec& meas,
                                  const UnitarityOptions& opts = {});

}  // namespace symtomo
