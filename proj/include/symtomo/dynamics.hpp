#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "symtomo/core.hpp"

namespace symtomo {

/// External force f(t). An empty function means no force.
using Force = std::function<double(double)>;

/// H = p^2/(2m) + m omega^2 q^2 / 2 - q f(t). omega = 0 is the free particle.
struct OscillatorModel {
    double mass = 1.0;
    double omega = 0.0;
    Force force;

    bool has_force() const { return static_cast<bool>(force); }
    double force_at(double t) const { return force ? force(t) : 0.0; }
    void validate() const;
};

/// Spectral position measurement over [0, T]: the sine amplitudes q_n of the
/// path are read out with accuracies da_n.
///
/// With `uniform` set, every mode n >= 1 is measured with accuracies[0] and
/// n_modes is the truncation of the mode sums. Otherwise modes 1..n_modes are
/// measured with accuracies[n-1] and higher modes are not measured at all.
/// An accuracy of +infinity marks an unmeasured mode.
struct MeasurementSpec {
    double duration = 1.0;
    std::vector<double> accuracies;
    bool uniform = false;
    int n_modes = 0;

    static MeasurementSpec uniform_accuracy(double T, double da, int n_modes);
    static MeasurementSpec per_mode(double T, std::vector<double> da);
    static MeasurementSpec none(double T);

    double accuracy(int n) const;  ///< da_n, 1-based; +inf when mode n is not measured
    double mode_frequency(int n) const { return kPi * n / duration; }
    void validate() const;
};

inline constexpr double kUnmeasured = std::numeric_limits<double>::infinity();

/// Outcomes a_n of the measured modes. Missing trailing entries read as 0.
struct SpectralOutcome {
    std::vector<double> a;
    double at(int n) const { return n <= static_cast<int>(a.size()) ? a[n - 1] : 0.0; }
};

/// Solution of eta'' + omega^2 eta = f/m with eta(0) = q_i, eta(T) = q_f.
class ClassicalTrajectory {
public:
    ClassicalTrajectory(OscillatorModel model, double q_i, double q_f, double T);

    double q_i() const { return q_i_; }
    double q_f() const { return q_f_; }
    double duration() const { return T_; }
    const OscillatorModel& model() const { return model_; }

    double position(double t) const;
    double velocity(double t) const;

private:
    double sin_scaled(double x) const;  // sin(omega x)/omega, x when omega = 0
    double cos_scaled(double x) const;

    OscillatorModel model_;
    double q_i_, q_f_, T_;
    double sT_;
};

/// Throws CausticError when omega T is a multiple of pi.
ClassicalTrajectory classical_trajectory(const OscillatorModel& model, double q_i, double q_f, double T);

/// eta_n = (2/T) int_0^T eta(t) sin(pi n t / T) dt for n = 1..n_modes, by quadrature.
std::vector<double> fourier_amplitudes(const ClassicalTrajectory& traj, int n_modes, double tol = 1e-10);

/// Action int (m/2 eta'^2 - m omega^2 eta^2 / 2 + f eta) dt along the trajectory, by quadrature.
double classical_action(const ClassicalTrajectory& traj, double tol = 1e-10);

/// Principal root of omega^2 - 4 i / (m T da_n^2).
cplx effective_frequency(const OscillatorModel& model, const MeasurementSpec& meas, int n);

struct AmplitudeOptions {
    double tail_tol = 1e-8;   ///< budget for the neglected measured modes of a uniform spec
    double quad_tol = 1e-10;
};

/// Restricted path integral of the quadratic model with the spectral weight
///   U = sqrt(m / (2 pi i T)) prod_n (1 - w_{e,n}^2 / W_n^2)^(-1/2)
///       exp(i S(eta) - sum_n (eta_n - a_n)^2 / da_n^2 (W_n^2 - w^2) / (W_n^2 - w_{e,n}^2)).
/// Each product factor takes the principal root (unmeasured factors that are
/// negative are read as x + i0), which is the branch continuous from T -> 0.
/// Unmeasured modes past the truncation enter through the closed form of
/// prod (1 - w^2 / W_n^2) = sin(w T) / (w T).
cplx weighted_amplitude(const OscillatorModel& model, const MeasurementSpec& meas,
                        const SpectralOutcome& outcome, double q_i, double q_f,
                        const AmplitudeOptions& opts = {});

/// Precomputed form of weighted_amplitude for repeated evaluation on grids.
/// Uses eta_n = h_n^i q_i + h_n^f q_f + p_n and the decomposition of the
/// classical action into a quadratic form plus force terms.
class AmplitudeKernel {
public:
    AmplitudeKernel(const OscillatorModel& model, const MeasurementSpec& meas, const AmplitudeOptions& opts = {});

    cplx operator()(const SpectralOutcome& outcome, double q_i, double q_f) const;

    /// Amplitude without the measurement exponent: prefactor * exp(i S).
    cplx base(double q_i, double q_f) const;
    double mode_amplitude(int n, double q_i, double q_f) const;  ///< eta_n, 1-based
    double action(double q_i, double q_f) const;

    int measured_modes() const { return static_cast<int>(beta_.size()); }
    /// Complex decay rate of mode n: (1/da_n^2) (W_n^2 - w^2) / (W_n^2 - w_{e,n}^2).
    cplx decay(int n) const { return beta_[n - 1]; }
    cplx prefactor() const { return prefactor_; }
    double accuracy(int n) const { return accuracy_[n - 1]; }

private:
    double mass_, omega_, T_;
    double sT_, cT_;
    cplx prefactor_;
    std::vector<cplx> beta_;
    std::vector<double> accuracy_;
    std::vector<double> h_i_, h_f_, forced_;
    double lin_i_ = 0.0, lin_f_ = 0.0, action_const_ = 0.0;
};

/// Density of the normalized outcome measure, prod over measured modes of
/// sqrt(2/pi) / da_n, so that the outcome-integrated U^dagger U is the identity.
double outcome_measure_density(const MeasurementSpec& meas);

}  // namespace symtomo
