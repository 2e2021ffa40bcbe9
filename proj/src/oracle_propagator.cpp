#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "symtomo/oracle.hpp"

namespace symtomo {

cplx ReferencePacket::characteristic(double mu, double nu) const {
    const double s2 = mu * mu * l * l + nu * nu / (l * l);
    return std::polar(std::exp(-0.25 * s2), mu * q0 + nu * p);
}

Map2 classical_direction_map(const OscillatorModel& model, double T) {
    model.validate();
    const double m = model.mass, w = model.omega;
    if (w == 0.0) return {1.0, 0.0, T / m, 1.0};
    const double s = std::sin(w * T), c = std::cos(w * T);
    return {c, -m * w * s, s / (m * w), c};
}

namespace {

struct Setup {
    QGrid grid;
    std::vector<cplx> phi;
    AmplitudeKernel kernel;
    Eigen::MatrixXcd A;  // A(r, i) = U_0(q_f = q_r, q_i) phi(q_i) w_i
};

Setup make_setup(const OscillatorModel& model, const MeasurementSpec& meas, const NumericPropagatorOptions& opts) {
    QGrid grid(opts.q_min, opts.q_max, opts.n_q);
    const WaveFunction packet =
        WaveFunction::gaussian_packet(grid, opts.reference.p, opts.reference.l, opts.reference.q0);
    AmplitudeKernel kernel(model, meas);
    const int n = grid.size();
    Eigen::MatrixXcd A(n, n);
    for (int r = 0; r < n; ++r)
        for (int i = 0; i < n; ++i) A(r, i) = kernel.base(grid[i], grid[r]) * packet.amplitudes()[i] * grid.weight(i);
    return {grid, packet.amplitudes(), std::move(kernel), std::move(A)};
}

// eta_n(q_i, q_f) without its force part, as coefficients of q_i and q_f.
std::pair<double, double> mode_coefficients(const AmplitudeKernel& k, int n) {
    const double base = k.mode_amplitude(n, 0.0, 0.0);
    return {k.mode_amplitude(n, 1.0, 0.0) - base, k.mode_amplitude(n, 0.0, 1.0) - base};
}

double outcome_weight(const AmplitudeKernel& k, int n) { return std::sqrt(2.0 / kPi) / k.accuracy(n); }

// psi_a(q_r) = sum_i A(r, i) exp(-sum_n beta_n (eta_n - a_n)^2)
Eigen::VectorXcd selected_state(const Setup& s, const std::vector<double>& a) {
    const int n = s.grid.size();
    const int modes = s.kernel.measured_modes();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
    for (int r = 0; r < n; ++r) {
        cplx acc = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx e = 0.0;
            for (int mode = 1; mode <= modes; ++mode) {
                const double d = s.kernel.mode_amplitude(mode, s.grid[i], s.grid[r]) - a[mode - 1];
                e -= s.kernel.decay(mode) * d * d;
            }
            acc += s.A(r, i) * std::exp(e);
        }
        psi(r) = acc;
    }
    return psi;
}

Eigen::MatrixXcd density_by_quadrature(const Setup& s, const NumericPropagatorOptions& opts) {
    const int modes = s.kernel.measured_modes();
    const int n = s.grid.size();
    if (modes == 0) {
        const Eigen::VectorXcd psi = selected_state(s, {});
        return psi * psi.adjoint();
    }
    const UniformGrid a_grid(-opts.a_halfwidth, opts.a_halfwidth, opts.n_a);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    std::vector<int> idx(modes, 0);
    while (true) {
        std::vector<double> a(modes);
        double weight = 1.0;
        for (int mode = 0; mode < modes; ++mode) {
            a[mode] = a_grid[idx[mode]];
            weight *= a_grid.weight(idx[mode]) * outcome_weight(s.kernel, mode + 1);
        }
        const Eigen::VectorXcd psi = selected_state(s, a);
        rho.noalias() += weight * psi * psi.adjoint();
        int d = 0;
        while (d < modes && ++idx[d] == a_grid.size()) idx[d++] = 0;
        if (d == modes) break;
    }
    return rho;
}

// Closed-form outcome integral per mode:
//   w_n int da exp(-b (e - a)^2 - b* (e' - a)^2)
//     = w_n sqrt(pi / (2 Re b)) exp(-|b|^2 / (2 Re b) (e - e')^2),
// which leaves exp(-Q(q_i - q_i', q_f - q_f')) with a quadratic form Q.
Eigen::MatrixXcd density_analytic(const Setup& s) {
    const int modes = s.kernel.measured_modes();
    const int n = s.grid.size();
    const double h = s.grid.spacing();
    double qa = 0.0, qb = 0.0, qc = 0.0, norm = 1.0;
    for (int mode = 1; mode <= modes; ++mode) {
        const cplx b = s.kernel.decay(mode);
        if (b == cplx(0.0)) continue;
        const double g = std::norm(b) / (2.0 * b.real());
        const auto [hi, hf] = mode_coefficients(s.kernel, mode);
        qa += g * hi * hi;
        qb += g * hi * hf;
        qc += g * hf * hf;
        norm *= outcome_weight(s.kernel, mode) * std::sqrt(kPi / (2.0 * b.real()));
    }
    Eigen::MatrixXcd rho(n, n);
    Eigen::MatrixXd E(n, n);
    const Eigen::MatrixXcd Ah = s.A.adjoint();
    for (int d = 0; d < n; ++d) {
        const double df = d * h;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double di = (i - j) * h;
                E(i, j) = std::exp(-(qa * di * di + 2.0 * qb * di * df + qc * df * df));
            }
        // rho(r, r - d) = sum_{i, i'} A(r, i) E(i, i') conj(A(r - d, i'))
        const Eigen::MatrixXcd M = E.cast<cplx>() * Ah;
        for (int r = d; r < n; ++r) {
            rho(r, r - d) = norm * (s.A.row(r) * M.col(r - d))(0);
            rho(r - d, r) = std::conj(rho(r, r - d));
        }
    }
    return rho;
}

double fit_mollifier(const std::vector<double>& k, const std::vector<cplx>& hat) {
    // Gaussian smoothing so that the truncated kernel transform is below 1e-10 at its edge.
    double kmax = 0.0, edge = 0.0;
    for (size_t j = 0; j < k.size(); ++j)
        if (std::abs(k[j]) > kmax) {
            kmax = std::abs(k[j]);
            edge = std::abs(hat[j]);
        }
    if (kmax == 0.0 || edge < 1e-10) return 0.0;
    return 2.0 * std::log(edge * 1e10) / (kmax * kmax);
}

PropagatorProfile profile_from_density(const QGrid& grid, const Eigen::MatrixXcd& rho, const ReferencePacket& ref,
                                       const Map2& L, double mu, double nu, double char_floor) {
    require_direction(mu, nu);
    const auto [mu_in, nu_in] = L(mu, nu);
    const int n = grid.size();
    const CharacteristicSamples cs = characteristic_samples(grid, rho, mu, nu, n - 1);

    // keep the contiguous band around k = 0 where both transforms are resolved
    const int centre = n - 1;
    int reach = 0;
    while (reach < centre) {
        const int j = reach + 1;
        bool ok = true;
        for (int sgn : {-1, 1}) {
            const int idx = centre + sgn * j;
            const double kk = cs.k[idx];
            const double cin = std::abs(ref.characteristic(kk * mu_in, kk * nu_in));
            if (cin < char_floor || std::abs(cs.value[idx]) < 1e-12) ok = false;
        }
        if (!ok) break;
        reach = j;
    }
    if (reach < 4) throw ResolutionError("numeric propagator profile: characteristic function band too narrow");

    PropagatorProfile out;
    out.mu = mu;
    out.nu = nu;
    out.mapped_mu = mu_in;
    out.mapped_nu = nu_in;
    for (int j = -reach; j <= reach; ++j) {
        const double kk = cs.k[centre + j];
        out.k.push_back(kk);
        out.kernel_hat.push_back(cs.value[centre + j] / ref.characteristic(kk * mu_in, kk * nu_in));
    }
    out.mass = out.kernel_hat[reach].real();
    out.mollifier2 = fit_mollifier(out.k, out.kernel_hat);

    const double step = out.k[1] - out.k[0];  // negative when nu < 0
    const double dk = std::abs(step);
    const double period = 2.0 * kPi / dk;
    const double centre_u = std::arg(out.kernel_hat[reach + 1] / out.kernel_hat[reach]) / step;
    const int n_u = 1601;
    out.u_grid = UniformGrid(centre_u - 0.5 * period, centre_u + 0.5 * period, n_u);
    out.profile.assign(n_u, 0.0);
    const int nk = static_cast<int>(out.k.size());
    for (int iu = 0; iu < n_u; ++iu) {
        const double u = out.u_grid[iu];
        cplx acc = 0.0;
        for (int j = 0; j < nk; ++j) {
            const double kk = out.k[j];
            const double wgt = (j == 0 || j == nk - 1) ? 0.5 : 1.0;
            acc += wgt * out.kernel_hat[j] * std::exp(cplx(-0.5 * kk * kk * out.mollifier2, -kk * u));
        }
        acc *= dk / (2.0 * kPi);
        out.profile[iu] = acc.real();
        out.max_imag = std::max(out.max_imag, std::abs(acc.imag()));
    }
    double m0 = 0.0, m1 = 0.0;
    for (int iu = 0; iu < n_u; ++iu) {
        m0 += out.u_grid.weight(iu) * out.profile[iu];
        m1 += out.u_grid.weight(iu) * out.profile[iu] * out.u_grid[iu];
    }
    out.mean = m1 / m0;
    double m2 = 0.0;
    for (int iu = 0; iu < n_u; ++iu) {
        const double d = out.u_grid[iu] - out.mean;
        m2 += out.u_grid.weight(iu) * out.profile[iu] * d * d;
    }
    out.variance = m2 / m0 - out.mollifier2;
    return out;
}

void check_direction(const PropagatorProfile& p, const PhasePoint& x) {
    if (std::abs(p.mu - x.mu) > 1e-12 || std::abs(p.nu - x.nu) > 1e-12)
        throw DomainError("numeric propagator: profile was built for a different direction");
}

}  // namespace

Eigen::MatrixXcd evolved_density_numeric(const OscillatorModel& model, const MeasurementSpec& meas,
                                         const NumericPropagatorOptions& opts) {
    const Setup s = make_setup(model, meas, opts);
    if (opts.analytic_outcomes || s.kernel.measured_modes() > 2) return density_analytic(s);
    return density_by_quadrature(s, opts);
}

Eigen::MatrixXcd selected_density_numeric(const OscillatorModel& model, const MeasurementSpec& meas,
                                          const SpectralOutcome& outcome, const NumericPropagatorOptions& opts) {
    const Setup s = make_setup(model, meas, opts);
    std::vector<double> a(s.kernel.measured_modes());
    for (size_t i = 0; i < a.size(); ++i) a[i] = outcome.at(static_cast<int>(i) + 1);
    const Eigen::VectorXcd psi = selected_state(s, a);
    return psi * psi.adjoint();
}

CharacteristicSamples characteristic_samples(const QGrid& grid, const Eigen::MatrixXcd& rho, double mu, double nu,
                                             int J, double dk_zero_nu) {
    require_direction(mu, nu);
    const int n = grid.size();
    if (J < 1 || J > n - 1) throw DomainError("characteristic_samples: J out of range");
    const double h = grid.spacing();
    CharacteristicSamples out;
    for (int j = -J; j <= J; ++j) {
        const double k = nu != 0.0 ? j * h / nu : j * dk_zero_nu;
        const int shift = nu != 0.0 ? j : 0;
        const double a = k * mu, b = shift * h;
        cplx acc = 0.0;
        // int dq exp(i a (q - b/2)) rho(q, q - b)
        for (int r = std::max(0, shift); r < std::min(n, n + shift); ++r) {
            acc += std::polar(1.0, a * (grid[r] - 0.5 * b)) * rho(r, r - shift);
        }
        out.k.push_back(k);
        out.value.push_back(acc * h);
    }
    return out;
}

PropagatorProfile nonselective_profile(const OscillatorModel& model, const MeasurementSpec& meas, double mu,
                                       double nu, const NumericPropagatorOptions& opts) {
    const Eigen::MatrixXcd rho = evolved_density_numeric(model, meas, opts);
    return profile_from_density(QGrid(opts.q_min, opts.q_max, opts.n_q), rho, opts.reference,
                                classical_direction_map(model, meas.duration), mu, nu, opts.char_floor);
}

PropagatorProfile partial_profile(const OscillatorModel& model, const MeasurementSpec& meas,
                                  const SpectralOutcome& outcome, double mu, double nu,
                                  const NumericPropagatorOptions& opts) {
    // weighted by the outcome measure so that the mass is a density in a
    const Eigen::MatrixXcd rho = outcome_measure_density(meas) * selected_density_numeric(model, meas, outcome, opts);
    return profile_from_density(QGrid(opts.q_min, opts.q_max, opts.n_q), rho, opts.reference,
                                classical_direction_map(model, meas.duration), mu, nu, opts.char_floor);
}

double nonselective_propagator_numeric(const PropagatorProfile& profile, const PhasePoint& x_prime,
                                       const PhasePoint& x, double delta_width) {
    check_direction(profile, x);
    if (!(delta_width > 0.0)) throw DomainError("delta_width must be positive");
    const double w2 = delta_width * delta_width;
    return profile(x.X - x_prime.X) * normal_pdf(x_prime.mu, profile.mapped_mu, w2) *
           normal_pdf(x_prime.nu, profile.mapped_nu, w2);
}

cplx partial_propagator_numeric(const PropagatorProfile& profile, const PhasePoint& x_prime, const PhasePoint& x,
                                double delta_width) {
    return {nonselective_propagator_numeric(profile, x_prime, x, delta_width), 0.0};
}

double propagator_pairing(const PropagatorProfile& profile, const WaveFunction& psi, const PhasePoint& x, double k,
                          double delta_width, int n_hermite) {
    check_direction(profile, x);
    if (!(k > 0.0)) throw DomainError("propagator_pairing: k must be positive");
    const GaussHermite gh = gauss_hermite(n_hermite);
    // X' range where the kernel K(X - k X') is not negligible
    double lo = profile.u_grid.hi(), hi = profile.u_grid.lo();
    const double peak = *std::max_element(profile.profile.begin(), profile.profile.end());
    for (int i = 0; i < profile.u_grid.size(); ++i)
        if (std::abs(profile.profile[i]) > 1e-13 * peak) {
            lo = std::min(lo, profile.u_grid[i]);
            hi = std::max(hi, profile.u_grid[i]);
        }
    const UniformGrid xp((x.X - hi) / k, (x.X - lo) / k, 1201);
    std::vector<double> kern(xp.size());
    for (int i = 0; i < xp.size(); ++i) kern[i] = profile(x.X - k * xp[i]);

    double total = 0.0;
    for (size_t a = 0; a < gh.nodes.size(); ++a)
        for (size_t b = 0; b < gh.nodes.size(); ++b) {
            const double mu_p = (profile.mapped_mu + std::sqrt(2.0) * delta_width * gh.nodes[a]) / k;
            const double nu_p = (profile.mapped_nu + std::sqrt(2.0) * delta_width * gh.nodes[b]) / k;
            const SampledTomogram t = tomogram_from_wavefunction(psi, mu_p, nu_p, xp);
            double j = 0.0;
            for (int i = 0; i < xp.size(); ++i) j += xp.weight(i) * t.values[i] * kern[i];
            total += gh.weights[a] * gh.weights[b] * j;
        }
    return total / (kPi * k * k);
}

}  // namespace symtomo
