#include "symtomo/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace symtomo {

void OscillatorModel::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("model: mass must be positive");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("model: omega must be >= 0");
}

MeasurementSpec MeasurementSpec::uniform_accuracy(double T, double da, int n_modes) {
    MeasurementSpec m{T, {da}, true, n_modes};
    m.validate();
    return m;
}

MeasurementSpec MeasurementSpec::per_mode(double T, std::vector<double> da) {
    const int n = static_cast<int>(da.size());
    MeasurementSpec m{T, std::move(da), false, n};
    m.validate();
    return m;
}

MeasurementSpec MeasurementSpec::none(double T) { return MeasurementSpec{T, {}, false, 0}; }

double MeasurementSpec::accuracy(int n) const {
    if (n < 1) throw DomainError("mode index must be >= 1");
    if (uniform) return accuracies.front();
    return n <= n_modes ? accuracies[n - 1] : kUnmeasured;
}

void MeasurementSpec::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError("measurement: duration must be positive");
    if (n_modes < 0) throw DomainError("measurement: n_modes must be >= 0");
    if (uniform) {
        if (accuracies.size() != 1) throw DomainError("measurement: uniform spec takes exactly one accuracy");
        if (n_modes < 1) throw DomainError("measurement: uniform spec needs a truncation n_modes >= 1");
    } else if (static_cast<int>(accuracies.size()) != n_modes) {
        throw DomainError("measurement: need one accuracy per measured mode");
    }
    for (double da : accuracies) {
        if (!(da > 0.0)) throw DomainError("measurement: accuracies must be positive");
    }
}

// ---------------------------------------------------------------------------

namespace {

void check_caustic(double omega, double T) {
    if (omega > 0.0 && std::abs(std::sin(omega * T)) < 1e-10) {
        std::ostringstream os;
        os << "caustic: omega T = " << omega * T << " is a multiple of pi";
        throw CausticError(os.str());
    }
}

double sin_scaled(double omega, double x) { return omega == 0.0 ? x : std::sin(omega * x) / omega; }
double cos_scaled(double omega, double x) { return omega == 0.0 ? 1.0 : std::cos(omega * x); }

struct MeasurementFactors {
    cplx prefactor;
    std::vector<cplx> beta;
    std::vector<double> accuracy;
};

// 1/sqrt(x) for a real factor read as x + i0.
cplx inv_sqrt_plus_i0(double x) {
    return x > 0.0 ? cplx(1.0 / std::sqrt(x), 0.0) : cplx(0.0, -1.0 / std::sqrt(-x));
}

MeasurementFactors measurement_factors(const OscillatorModel& model, const MeasurementSpec& meas,
                                       const AmplitudeOptions& opts) {
    model.validate();
    meas.validate();
    const double m = model.mass, w = model.omega, T = meas.duration;
    check_caustic(w, T);
    const int N = meas.n_modes;

    if (meas.uniform && std::isfinite(meas.accuracies.front())) {
        const double da = meas.accuracies.front();
        const double tail = 4.0 * T / (m * da * da * kPi * kPi * N);
        if (tail > opts.tail_tol) {
            std::ostringstream os;
            os << "weighted amplitude: neglected measured modes beyond n = " << N << " contribute ~" << tail
               << " > " << opts.tail_tol << "; raise n_modes";
            throw TruncationError(os.str());
        }
    }

    MeasurementFactors out;
    out.prefactor = std::sqrt(m / (2.0 * kPi * T)) * std::polar(1.0, -kPi / 4.0);
    const int n_explicit = std::max(N, static_cast<int>(std::floor(w * T / kPi)) + 1);
    double unmeasured_product = 1.0;
    for (int n = 1; n <= n_explicit; ++n) {
        const double W = meas.mode_frequency(n);
        const double free_factor = 1.0 - w * w / (W * W);
        unmeasured_product *= free_factor;
        const double da = n <= N ? meas.accuracy(n) : kUnmeasured;
        if (n <= N) out.accuracy.push_back(da);
        if (std::isfinite(da)) {
            const cplx we2 = cplx(w * w, -4.0 / (m * T * da * da));
            out.prefactor /= std::sqrt(1.0 - we2 / (W * W));
            out.beta.push_back((W * W - w * w) / (W * W - we2) / (da * da));
        } else {
            out.prefactor *= inv_sqrt_plus_i0(free_factor);
            if (n <= N) out.beta.push_back(0.0);
        }
    }
    const double full = w == 0.0 ? 1.0 : std::sin(w * T) / (w * T);
    out.prefactor *= inv_sqrt_plus_i0(full / unmeasured_product);
    return out;
}

}  // namespace

ClassicalTrajectory::ClassicalTrajectory(OscillatorModel model, double q_i, double q_f, double T)
    : model_(std::move(model)), q_i_(q_i), q_f_(q_f), T_(T), sT_(0.0) {
    model_.validate();
    if (!(T > 0.0)) throw DomainError("trajectory: T must be positive");
    check_caustic(model_.omega, T);
    sT_ = sin_scaled(T);
}

double ClassicalTrajectory::sin_scaled(double x) const { return symtomo::sin_scaled(model_.omega, x); }
double ClassicalTrajectory::cos_scaled(double x) const { return symtomo::cos_scaled(model_.omega, x); }

double ClassicalTrajectory::position(double t) const {
    double eta = (q_i_ * sin_scaled(T_ - t) + q_f_ * sin_scaled(t)) / sT_;
    if (model_.has_force()) {
        const auto& f = model_.force;
        const double before = integrate_1d([&](double s) { return sin_scaled(s) * f(s); }, 0.0, t, 1e-13);
        const double after = integrate_1d([&](double s) { return sin_scaled(T_ - s) * f(s); }, t, T_, 1e-13);
        eta -= (sin_scaled(T_ - t) * before + sin_scaled(t) * after) / (sT_ * model_.mass);
    }
    return eta;
}

double ClassicalTrajectory::velocity(double t) const {
    double v = (-q_i_ * cos_scaled(T_ - t) + q_f_ * cos_scaled(t)) / sT_;
    if (model_.has_force()) {
        const auto& f = model_.force;
        const double before = integrate_1d([&](double s) { return sin_scaled(s) * f(s); }, 0.0, t, 1e-13);
        const double after = integrate_1d([&](double s) { return sin_scaled(T_ - s) * f(s); }, t, T_, 1e-13);
        v += (cos_scaled(T_ - t) * before - cos_scaled(t) * after) / (sT_ * model_.mass);
    }
    return v;
}

ClassicalTrajectory classical_trajectory(const OscillatorModel& model, double q_i, double q_f, double T) {
    return ClassicalTrajectory(model, q_i, q_f, T);
}

std::vector<double> fourier_amplitudes(const ClassicalTrajectory& traj, int n_modes, double tol) {
    if (n_modes < 1) throw DomainError("fourier_amplitudes: n_modes must be >= 1");
    const double T = traj.duration();
    std::vector<double> out(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
        const double W = kPi * n / T;
        out[n - 1] = 2.0 / T *
                     integrate_1d([&](double t) { return traj.position(t) * std::sin(W * t); }, 0.0, T, tol * T / 2.0);
    }
    return out;
}

double classical_action(const ClassicalTrajectory& traj, double tol) {
    const auto& model = traj.model();
    const double m = model.mass, w = model.omega;
    auto lagrangian = [&](double t) {
        const double x = traj.position(t), v = traj.velocity(t);
        return 0.5 * m * v * v - 0.5 * m * w * w * x * x + model.force_at(t) * x;
    };
    return integrate_1d(lagrangian, 0.0, traj.duration(), tol);
}

cplx effective_frequency(const OscillatorModel& model, const MeasurementSpec& meas, int n) {
    model.validate();
    if (n < 1 || (!meas.uniform && n > meas.n_modes)) {
        if (n < 1) throw DomainError("effective_frequency: n must be >= 1");
    }
    const double da = meas.accuracy(n);
    const double damping = std::isfinite(da) ? 4.0 / (model.mass * meas.duration * da * da) : 0.0;
    return std::sqrt(cplx(model.omega * model.omega, -damping));
}

cplx weighted_amplitude(const OscillatorModel& model, const MeasurementSpec& meas,
                        const SpectralOutcome& outcome, double q_i, double q_f, const AmplitudeOptions& opts) {
    const MeasurementFactors factors = measurement_factors(model, meas, opts);
    const ClassicalTrajectory traj(model, q_i, q_f, meas.duration);
    const double S = classical_action(traj, opts.quad_tol);
    cplx exponent(0.0, S);
    const int N = static_cast<int>(factors.beta.size());
    if (N > 0) {
        const std::vector<double> eta = fourier_amplitudes(traj, N, opts.quad_tol);
        for (int n = 1; n <= N; ++n) {
            const double d = eta[n - 1] - outcome.at(n);
            exponent -= factors.beta[n - 1] * d * d;
        }
    }
    return factors.prefactor * std::exp(exponent);
}

// ---------------------------------------------------------------------------

AmplitudeKernel::AmplitudeKernel(const OscillatorModel& model, const MeasurementSpec& meas,
                                 const AmplitudeOptions& opts)
    : mass_(model.mass), omega_(model.omega), T_(meas.duration) {
    MeasurementFactors factors = measurement_factors(model, meas, opts);
    prefactor_ = factors.prefactor;
    beta_ = std::move(factors.beta);
    accuracy_ = std::move(factors.accuracy);
    sT_ = sin_scaled(omega_, T_);
    cT_ = cos_scaled(omega_, T_);

    const int N = static_cast<int>(beta_.size());
    for (int n = 1; n <= N; ++n) {
        const double W = meas.mode_frequency(n);
        const double den = W * W - omega_ * omega_;
        h_i_.push_back(2.0 / T_ * W / den);
        h_f_.push_back(2.0 / T_ * W * (n % 2 == 1 ? 1.0 : -1.0) / den);
        double forced = 0.0;
        if (model.has_force()) {
            const double fn = 2.0 / T_ *
                              integrate_1d([&](double t) { return model.force(t) * std::sin(W * t); }, 0.0, T_,
                                           opts.quad_tol);
            forced = -fn / (mass_ * den);
        }
        forced_.push_back(forced);
    }
    if (model.has_force()) {
        const auto& f = model.force;
        const double w = omega_, T = T_;
        lin_f_ = integrate_1d([&](double s) { return f(s) * sin_scaled(w, s); }, 0.0, T, opts.quad_tol) / sT_;
        lin_i_ = integrate_1d([&](double s) { return f(s) * sin_scaled(w, T - s); }, 0.0, T, opts.quad_tol) / sT_;
        const ClassicalTrajectory particular(model, 0.0, 0.0, T);
        action_const_ =
            0.5 * integrate_1d([&](double t) { return f(t) * particular.position(t); }, 0.0, T, opts.quad_tol);
    }
}

double AmplitudeKernel::mode_amplitude(int n, double q_i, double q_f) const {
    return h_i_[n - 1] * q_i + h_f_[n - 1] * q_f + forced_[n - 1];
}

double AmplitudeKernel::action(double q_i, double q_f) const {
    const double homogeneous = mass_ / (2.0 * sT_) * ((q_i * q_i + q_f * q_f) * cT_ - 2.0 * q_i * q_f);
    return homogeneous + lin_i_ * q_i + lin_f_ * q_f + action_const_;
}

cplx AmplitudeKernel::base(double q_i, double q_f) const {
    return prefactor_ * std::polar(1.0, action(q_i, q_f));
}

cplx AmplitudeKernel::operator()(const SpectralOutcome& outcome, double q_i, double q_f) const {
    cplx exponent(0.0, action(q_i, q_f));
    for (int n = 1; n <= measured_modes(); ++n) {
        const double d = mode_amplitude(n, q_i, q_f) - outcome.at(n);
        exponent -= beta_[n - 1] * d * d;
    }
    return prefactor_ * std::exp(exponent);
}

double outcome_measure_density(const MeasurementSpec& meas) {
    double density = 1.0;
    for (int n = 1; n <= meas.n_modes; ++n) {
        const double da = meas.accuracy(n);
        if (std::isfinite(da)) density *= std::sqrt(2.0 / kPi) / da;
    }
    return density;
}

}  // namespace symtomo
