#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "symtomo/oracle.hpp"

namespace symtomo {

namespace {

// Unpivoted LDL^T of a complex symmetric matrix (not Hermitian). The
// quadratic forms here have a positive semidefinite real part, so every
// pivot lies in the closed right half-plane and principal roots are the
// branch continuous from a positive-definite form.
struct SymmetricFactor {
    Eigen::MatrixXcd lu;
    cplx log_det{0.0, 0.0};
};

SymmetricFactor factor(Eigen::MatrixXcd a) {
    const Eigen::Index n = a.rows();
    SymmetricFactor f;
    const double scale = a.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < n; ++k) {
        const cplx piv = a(k, k);
        if (std::abs(piv) < 1e-13 * scale) {
            throw CausticError("sliced path integral: singular quadratic form (caustic at this slicing)");
        }
        f.log_det += std::log(piv);
        for (Eigen::Index i = k + 1; i < n; ++i) {
            if (a(i, k) == cplx(0.0)) continue;
            const cplx l = a(i, k) / piv;
            a.block(i, k + 1, 1, n - k - 1) -= l * a.block(k, k + 1, 1, n - k - 1);
            a(i, k) = l;
        }
    }
    f.lu = std::move(a);
    return f;
}

Eigen::VectorXcd solve(const SymmetricFactor& f, Eigen::VectorXcd b) {
    const Eigen::Index n = b.size();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < i; ++k) b(i) -= f.lu(i, k) * b(k);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        for (Eigen::Index k = i + 1; k < n; ++k) b(i) -= f.lu(i, k) * b(k);
        b(i) /= f.lu(i, i);
    }
    return b;
}

}  // namespace

cplx discrete_path_amplitude(const OscillatorModel& model, const MeasurementSpec& meas,
                             const SpectralOutcome& outcome, double q_i, double q_f, int n_slices) {
    model.validate();
    meas.validate();
    if (n_slices < 4) throw DomainError("discrete_path_amplitude: need at least 4 slices");
    const int M = n_slices, n = M - 1;
    const double m = model.mass, w = model.omega, T = meas.duration, eps = T / M;
    const cplx I(0.0, 1.0);

    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
    for (int j = 0; j < n; ++j) {
        K(j, j) = -I * (2.0 * m / eps) + I * (eps * m * w * w);
        if (j + 1 < n) K(j, j + 1) = K(j + 1, j) = I * (m / eps);
        b(j) = I * eps * model.force_at((j + 1) * eps);
    }
    b(0) -= I * (m * q_i / eps);
    b(n - 1) -= I * (m * q_f / eps);
    cplx c = I * (m * (q_i * q_i + q_f * q_f) / (2.0 * eps)) -
             I * (0.5 * eps * 0.5 * m * w * w * (q_i * q_i + q_f * q_f)) +
             I * (0.5 * eps * (model.force_at(0.0) * q_i + model.force_at(T) * q_f));

    // exp(-B (c.x - a)^2) per measured mode, with the sliced sine transform c.
    const int n_measured = std::min(meas.n_modes, n);
    for (int mode = 1; mode <= n_measured; ++mode) {
        const double da = meas.accuracy(mode);
        if (!std::isfinite(da)) continue;
        const double B = 1.0 / (da * da);
        Eigen::VectorXd cv(n);
        for (int j = 0; j < n; ++j) cv(j) = 2.0 * eps / T * std::sin(kPi * mode * (j + 1) / M);
        K += (2.0 * B) * (cv * cv.transpose()).cast<cplx>();
        b += (2.0 * B * outcome.at(mode)) * cv.cast<cplx>();
        c -= B * outcome.at(mode) * outcome.at(mode);
    }

    const SymmetricFactor f = factor(K);
    const Eigen::VectorXcd y = solve(f, b);
    const cplx quad = 0.5 * b.cwiseProduct(y).sum();
    const cplx log_pref = 0.5 * M * std::log(m / (2.0 * kPi * eps)) - I * (kPi * M / 4.0) +
                          0.5 * n * std::log(2.0 * kPi) - 0.5 * f.log_det;
    return std::exp(log_pref + quad + c);
}

cplx discrete_path_amplitude_extrapolated(const OscillatorModel& model, const MeasurementSpec& meas,
                                          const SpectralOutcome& outcome, double q_i, double q_f,
                                          int base_slices) {
    const cplx u1 = discrete_path_amplitude(model, meas, outcome, q_i, q_f, base_slices);
    const cplx u2 = discrete_path_amplitude(model, meas, outcome, q_i, q_f, 2 * base_slices);
    const cplx u4 = discrete_path_amplitude(model, meas, outcome, q_i, q_f, 4 * base_slices);
    const cplx r1 = (4.0 * u2 - u1) / 3.0;
    const cplx r2 = (4.0 * u4 - u2) / 3.0;
    return (16.0 * r2 - r1) / 15.0;
}

cplx free_particle_kernel(double mass, double T, double q_i, double q_f) {
    if (!(mass > 0.0) || !(T > 0.0)) throw DomainError("free_particle_kernel: mass and T must be positive");
    const double d = q_f - q_i;
    return std::sqrt(mass / (2.0 * kPi * T)) * std::polar(1.0, mass * d * d / (2.0 * T) - kPi / 4.0);
}

cplx oscillator_kernel(double mass, double omega, double T, double q_i, double q_f) {
    if (omega == 0.0) return free_particle_kernel(mass, T, q_i, q_f);
    if (!(mass > 0.0) || !(T > 0.0) || omega < 0.0) throw DomainError("oscillator_kernel: bad parameters");
    const double s = std::sin(omega * T);
    if (std::abs(s) < 1e-10) throw CausticError("oscillator_kernel: caustic");
    const double S = s / omega, C = std::cos(omega * T);
    const double crossings = std::floor(omega * T / kPi);
    const double phase = mass / (2.0 * S) * ((q_i * q_i + q_f * q_f) * C - 2.0 * q_i * q_f);
    return std::sqrt(mass / (2.0 * kPi * std::abs(S))) * std::polar(1.0, phase - kPi / 4.0 - kPi / 2.0 * crossings);
}

}  // namespace symtomo
