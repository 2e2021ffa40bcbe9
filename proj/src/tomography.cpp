#include "symtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace symtomo {

namespace {

double norm2(const QGrid& grid, std::span<const cplx> amps) {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s * grid.spacing();
}

void check_chirp_resolution(const QGrid& q, double mu, double nu, const UniformGrid& x_grid) {
    const double q_ext = std::max(std::abs(q.q_min()), std::abs(q.q_max()));
    const double x_ext = std::max(std::abs(x_grid.lo()), std::abs(x_grid.hi()));
    const double h = q.spacing();
    const double chirp_step = std::abs(mu) * q_ext * h / std::abs(nu);
    if (chirp_step > kPi / 4) {
        std::ostringstream os;
        os << "position grid too coarse for the chirp at (mu, nu) = (" << mu << ", " << nu
           << "): phase step " << chirp_step << " > pi/4";
        throw ResolutionError(os.str());
    }
    const double total_step = (std::abs(mu) * q_ext + x_ext) * h / std::abs(nu);
    if (total_step > kPi) {
        std::ostringstream os;
        os << "position grid too coarse for the X range at (mu, nu) = (" << mu << ", " << nu
           << "): phase step " << total_step << " > pi";
        throw ResolutionError(os.str());
    }
}

// |F(X)|^2 / (2 pi |nu|) for unnormalized amplitudes; accumulated into out with weight.
void accumulate_chirp(const QGrid& q, std::span<const cplx> amps, double mu, double nu,
                      const UniformGrid& x_grid, double weight, std::vector<double>& out) {
    const int nq = q.size();
    const double h = q.spacing();
    std::vector<cplx> chirped(nq);
    for (int j = 0; j < nq; ++j) {
        const double qj = q[j];
        chirped[j] = amps[j] * h * std::polar(1.0, mu * qj * qj / (2.0 * nu));
    }
    const double pref = weight / (2.0 * kPi * std::abs(nu));
    for (int k = 0; k < x_grid.size(); ++k) {
        const double X = x_grid[k];
        const cplx step = std::polar(1.0, -X * h / nu);
        cplx phase = std::polar(1.0, -X * q.q_min() / nu);
        cplx acc{};
        for (int j = 0; j < nq; ++j) {
            acc += chirped[j] * phase;
            phase *= step;
        }
        out[k] += pref * std::norm(acc);
    }
}

void accumulate_position(const QGrid& q, std::span<const cplx> amps, double mu,
                         const UniformGrid& x_grid, double weight, std::vector<double>& out) {
    for (int k = 0; k < x_grid.size(); ++k) {
        out[k] += weight * std::norm(interpolate_lagrange(q, amps, x_grid[k] / mu)) / std::abs(mu);
    }
}

void accumulate_pure(const QGrid& q, std::span<const cplx> amps, double mu, double nu,
                     const UniformGrid& x_grid, double weight, std::vector<double>& out) {
    if (nu == 0.0) {
        accumulate_position(q, amps, mu, x_grid, weight, out);
    } else {
        accumulate_chirp(q, amps, mu, nu, x_grid, weight, out);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

WaveFunction::WaveFunction(QGrid grid, std::vector<cplx> amplitudes)
    : grid_(std::move(grid)), amps_(std::move(amplitudes)) {
    if (static_cast<int>(amps_.size()) != grid_.n_points()) {
        throw DomainError("WaveFunction: amplitude count does not match the grid");
    }
    const double n = norm2(grid_, amps_);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("WaveFunction: zero or non-finite norm");
    const double s = 1.0 / std::sqrt(n);
    for (auto& a : amps_) a *= s;
}

WaveFunction WaveFunction::gaussian_packet(const QGrid& grid, double p, double l, double q0) {
    if (!(l > 0.0)) throw DomainError("gaussian_packet: l must be positive");
    std::vector<cplx> amps(grid.n_points());
    const double norm = std::pow(kPi * l * l, -0.25);
    for (int i = 0; i < grid.n_points(); ++i) {
        const double d = grid[i] - q0;
        amps[i] = norm * std::exp(cplx(-0.5 * d * d / (l * l), p * d));
    }
    return WaveFunction(grid, std::move(amps));
}

cplx WaveFunction::operator()(double q) const { return interpolate_lagrange(grid_, amps_, q); }

DensityMatrix::DensityMatrix(QGrid grid, Eigen::MatrixXcd entries, DensityTolerances tol)
    : grid_(std::move(grid)), rho_(std::move(entries)) {
    const int n = grid_.n_points();
    if (rho_.rows() != n || rho_.cols() != n) throw DomainError("DensityMatrix: shape does not match the grid");
    const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol.hermitian) {
        std::ostringstream os;
        os << "DensityMatrix: not Hermitian (max deviation " << herm << ")";
        throw DomainError(os.str());
    }
    if (std::abs(trace() - 1.0) > tol.trace) {
        std::ostringstream os;
        os << "DensityMatrix: trace " << trace() << " differs from 1";
        throw DomainError(os.str());
    }
    const Eigen::MatrixXcd h = 0.5 * (rho_ + rho_.adjoint()) * grid_.spacing();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol.eigenvalue) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << es.eigenvalues().minCoeff();
        throw DomainError(os.str());
    }
}

DensityMatrix DensityMatrix::pure(const WaveFunction& psi) {
    const int n = psi.grid().n_points();
    Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), n);
    return DensityMatrix(psi.grid(), v * v.adjoint());
}

DensityMatrix DensityMatrix::mixture(const std::vector<WaveFunction>& states, const std::vector<double>& weights) {
    if (states.empty() || states.size() != weights.size()) throw DomainError("mixture: states/weights mismatch");
    const QGrid& grid = states.front().grid();
    const int n = grid.n_points();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    for (size_t k = 0; k < states.size(); ++k) {
        if (!(states[k].grid() == grid)) throw DomainError("mixture: states live on different grids");
        if (weights[k] < 0.0) throw DomainError("mixture: negative weight");
        Eigen::Map<const Eigen::VectorXcd> v(states[k].amplitudes().data(), n);
        rho += weights[k] * (v * v.adjoint());
    }
    return DensityMatrix(grid, std::move(rho));
}

double DensityMatrix::trace() const { return rho_.diagonal().real().sum() * grid_.spacing(); }

// ---------------------------------------------------------------------------

double GaussianTomogram::width2(double mu, double nu) const {
    const double s2 = variance_form(mu, nu);
    if (!(s2 > 0.0)) {
        std::ostringstream os;
        os << "Gaussian tomogram width " << s2 << " not positive at (" << mu << ", " << nu << ")";
        throw DomainError(os.str());
    }
    return s2;
}

double GaussianTomogram::operator()(double X, double mu, double nu) const {
    require_direction(mu, nu);
    const double s2 = width2(mu, nu);
    const double d = X - mean(mu, nu);
    return std::exp(-d * d / s2) / std::sqrt(kPi * s2);
}

SampledTomogram GaussianTomogram::sample(double mu, double nu, const UniformGrid& x_grid) const {
    SampledTomogram out{mu, nu, x_grid, std::vector<double>(x_grid.size())};
    for (int k = 0; k < x_grid.size(); ++k) out.values[k] = (*this)(x_grid[k], mu, nu);
    return out;
}

SampledTomogram tomogram_from_wavefunction(const WaveFunction& psi, double mu, double nu,
                                           const UniformGrid& x_grid) {
    require_direction(mu, nu);
    if (nu != 0.0) check_chirp_resolution(psi.grid(), mu, nu, x_grid);
    SampledTomogram out{mu, nu, x_grid, std::vector<double>(x_grid.size(), 0.0)};
    accumulate_pure(psi.grid(), psi.amplitudes(), mu, nu, x_grid, 1.0, out.values);
    return out;
}

SampledTomogram tomogram_from_density(const DensityMatrix& rho, double mu, double nu,
                                      const UniformGrid& x_grid) {
    require_direction(mu, nu);
    const QGrid& q = rho.grid();
    if (nu != 0.0) check_chirp_resolution(q, mu, nu, x_grid);
    const double h = q.spacing();
    const Eigen::MatrixXcd op = 0.5 * (rho.entries() + rho.entries().adjoint()) * h;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op);

    SampledTomogram out{mu, nu, x_grid, std::vector<double>(x_grid.size(), 0.0)};
    std::vector<cplx> amps(q.n_points());
    for (int k = 0; k < q.n_points(); ++k) {
        const double lambda = es.eigenvalues()(k);
        if (std::abs(lambda) < 1e-15) continue;
        const double s = 1.0 / std::sqrt(h);
        for (int j = 0; j < q.n_points(); ++j) amps[j] = es.eigenvectors()(j, k) * s;
        accumulate_pure(q, amps, mu, nu, x_grid, lambda, out.values);
    }
    return out;
}

cplx characteristic_from_family(const TomogramFamily& family, double mu, double nu) {
    const double k = std::hypot(mu, nu);
    if (k == 0.0) return {1.0, 0.0};
    const SampledTomogram t = family(mu / k, nu / k);
    const double mass = t.integral();
    if (std::abs(mass - 1.0) > 1e-4) {
        std::ostringstream os;
        os << "tomogram at direction (" << mu / k << ", " << nu / k << ") integrates to " << mass
           << "; X box under-sampled";
        throw ReconstructionError(os.str());
    }
    std::vector<cplx> integrand(t.values.size());
    for (int j = 0; j < t.x_grid.size(); ++j) integrand[j] = t.values[j] * std::polar(1.0, k * t.x_grid[j]);
    return trapezoid(integrand, t.x_grid.spacing());
}

DensityMatrix density_from_tomogram(const TomogramFamily& family, const QGrid& q_grid,
                                    const ReconstructionOptions& opts) {
    if (opts.n_mu < 3 || opts.n_mu % 2 == 0 || !(opts.mu_max > 0.0)) {
        throw DomainError("density_from_tomogram: n_mu must be odd and >= 3, mu_max > 0");
    }
    const int n = q_grid.n_points();
    const double h = q_grid.spacing();
    const UniformGrid mu_grid(-opts.mu_max, opts.mu_max, opts.n_mu);

    // chi[d][k] = chi(mu_k, d h) for d = 0..n-1; negative offsets from chi(-mu,-nu) = conj chi(mu,nu).
    std::vector<std::vector<cplx>> chi(n, std::vector<cplx>(opts.n_mu));
    double edge = 0.0;
    for (int d = 0; d < n; ++d) {
        for (int k = 0; k < opts.n_mu; ++k) chi[d][k] = characteristic_from_family(family, mu_grid[k], d * h);
        edge = std::max({edge, std::abs(chi[d].front()), std::abs(chi[d].back())});
    }
    if (edge > opts.tail_tol) {
        std::ostringstream os;
        os << "density_from_tomogram: characteristic function still " << edge
           << " at |mu| = " << opts.mu_max << "; enlarge the mu box";
        throw ReconstructionError(os.str());
    }

    Eigen::MatrixXcd rho(n, n);
    const int mid = opts.n_mu / 2;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int d = i - j;
            const double s = 0.5 * (q_grid[i] + q_grid[j]);
            cplx acc{};
            for (int k = 0; k < opts.n_mu; ++k) {
                const cplx c = d >= 0 ? chi[d][k] : std::conj(chi[-d][2 * mid - k]);
                acc += mu_grid.weight(k) * c * std::polar(1.0, -mu_grid[k] * s);
            }
            rho(i, j) = acc / (2.0 * kPi);
        }
    }

    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    const double tr = rho.diagonal().real().sum() * h;
    if (herm > opts.hermitian_tol || std::abs(tr - 1.0) > opts.trace_tol) {
        std::ostringstream os;
        os << "density_from_tomogram: reconstruction off tolerance (hermiticity " << herm << ", trace " << tr << ")";
        throw ReconstructionError(os.str());
    }
    return DensityMatrix(q_grid, std::move(rho),
                         DensityTolerances{opts.hermitian_tol, opts.trace_tol, 10 * opts.trace_tol});
}

// ---------------------------------------------------------------------------

cplx star_kernel(const PhasePoint& x1, const PhasePoint& x2, const PhasePoint& x, double delta_width) {
    if (x.nu == 0.0) throw DomainError("star_kernel: nu of the target point must be non-zero");
    if (!(delta_width > 0.0)) throw DomainError("star_kernel: delta_width must be positive");
    const double arg = x.mu * (x1.nu + x2.nu) - x.nu * (x1.mu + x2.mu);
    const double delta = normal_pdf(arg, 0.0, delta_width * delta_width);
    const double phase = x1.X + x2.X - (x1.nu + x2.nu) * x.X / x.nu + 0.5 * (x1.nu * x2.mu - x2.nu * x1.mu);
    return delta / (4.0 * kPi * kPi) * std::polar(1.0, phase);
}

cplx commutator_kernel(const PhasePoint& x1, const PhasePoint& x2, const PhasePoint& x, double delta_width) {
    return star_kernel(x1, x2, x, delta_width) - star_kernel(x2, x1, x, delta_width);
}

GaussianTomogram gaussian_packet_tomogram(double p, double l) {
    if (!(l > 0.0)) throw DomainError("gaussian_packet_tomogram: l must be positive");
    return GaussianTomogram{QuadraticForm2{l * l, 0.0, 1.0 / (l * l)}, LinearForm2{0.0, p}, 0.0};
}

}  // namespace symtomo
