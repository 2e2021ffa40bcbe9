#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "symtomo/oracle.hpp"

namespace symtomo {

PropagatorFamily particle_family_scaled(const OscillatorModel& model, double c) {
    if (!(c > 0.0)) throw DomainError("particle_family_scaled: c must be positive");
    return [model, c](double T) {
        return particle_measured_propagator(model, MeasurementSpec::uniform_accuracy(T, std::sqrt(c / T), 1));
    };
}

FokkerPlanckResidual fokker_planck_residual(const PropagatorFamily& family, const OscillatorModel& model,
                                            const FokkerPlanckSample& s, double k_strength, double step) {
    if (!(step > 0.0) || !(s.t > 0.0)) throw DomainError("fokker_planck_residual: step and t must be positive");
    const double ht = step * s.t;
    const double hn = step * std::max(1.0, std::abs(s.nu));
    if (ht < 1e-7 * s.t || step < 1e-7) throw DomainError("fokker_planck_residual: differencing step underflow");

    auto gauss = [&](double X, double mu, double nu, double t) {
        const StructuredPropagator p = family(t);
        return normal_pdf(X - s.X_prime - p.shift(mu, nu), 0.0, p.variance(mu, nu));
    };
    const double var = family(s.t).variance(s.mu, s.nu);
    if (!(var > 0.0)) throw DomainError("fokker_planck_residual: zero variance at the sample");
    const double hx = step * std::sqrt(var);

    const double g0 = gauss(s.X, s.mu, s.nu, s.t);
    const double dt = (gauss(s.X, s.mu, s.nu, s.t + ht) - gauss(s.X, s.mu, s.nu, s.t - ht)) / (2.0 * ht);
    const double dn = (gauss(s.X, s.mu, s.nu + hn, s.t) - gauss(s.X, s.mu, s.nu - hn, s.t)) / (2.0 * hn);
    const double gp = gauss(s.X + hx, s.mu, s.nu, s.t), gm = gauss(s.X - hx, s.mu, s.nu, s.t);
    const double dx = (gp - gm) / (2.0 * hx);
    const double dxx = (gp - 2.0 * g0 + gm) / (hx * hx);

    FokkerPlanckResidual r;
    r.drift = dt - s.mu / model.mass * dn + model.force_at(s.t) * s.nu * dx;
    r.diffusion = s.nu * s.nu * dxx;
    r.residual = r.drift - k_strength * r.diffusion;

    // mapped directions L_t(mu, nu) are transported by the same first-order operator
    auto mapped = [&](double nu, double t) { return family(t).map(s.mu, nu); };
    const auto tp = mapped(s.nu, s.t + ht), tm = mapped(s.nu, s.t - ht);
    const auto np = mapped(s.nu + hn, s.t), nm = mapped(s.nu - hn, s.t);
    const double c0 = (tp.first - tm.first) / (2.0 * ht) - s.mu / model.mass * (np.first - nm.first) / (2.0 * hn);
    const double c1 = (tp.second - tm.second) / (2.0 * ht) - s.mu / model.mass * (np.second - nm.second) / (2.0 * hn);
    r.chain_rule = std::abs(c0) + std::abs(c1);
    return r;
}

double fit_diffusion_strength(const PropagatorFamily& family, const OscillatorModel& model,
                              std::span<const FokkerPlanckSample> samples, double step) {
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        const FokkerPlanckResidual r = fokker_planck_residual(family, model, s, 0.0, step);
        num += r.drift * r.diffusion;
        den += r.diffusion * r.diffusion;
    }
    if (den == 0.0) throw DomainError("fit_diffusion_strength: no diffusion signal in the samples");
    return num / den;
}

double entropy_numeric(const UniformGrid& x_grid, std::span<const double> values) {
    if (static_cast<int>(values.size()) != x_grid.size()) throw DomainError("entropy_numeric: size mismatch");
    double s = 0.0;
    for (int i = 0; i < x_grid.size(); ++i) {
        const double t = values[i];
        if (t < -1e-10) {
            std::ostringstream os;
            os << "entropy_numeric: negative tomogram value " << t << " at X = " << x_grid[i];
            throw DomainError(os.str());
        }
        if (t > 0.0) s -= x_grid.weight(i) * t * std::log(t);
    }
    return s;
}

UnitarityReport outcome_unitarity(const OscillatorModel& model, const MeasurementSpec& meas,
                                  const UnitarityOptions& opts) {
    const AmplitudeKernel kernel(model, meas);
    if (kernel.measured_modes() != 1) throw DomainError("outcome_unitarity: needs exactly one measured mode");
    const UniformGrid in(opts.in_lo, opts.in_hi, opts.n_in);
    const UniformGrid out(opts.out_lo, opts.out_hi, opts.n_out);
    const UniformGrid centres(opts.center_lo, opts.center_hi, opts.n_packets);
    const int ni = in.size(), no = out.size(), np = centres.size();

    Eigen::MatrixXcd phi(ni, np);
    const double l = opts.packet_width;
    for (int j = 0; j < np; ++j)
        for (int i = 0; i < ni; ++i) {
            const double d = in[i] - centres[j];
            phi(i, j) = std::pow(kPi * l * l, -0.25) * std::exp(-d * d / (2.0 * l * l));
        }

    UnitarityReport rep;
    rep.overlap = Eigen::MatrixXcd::Zero(np, np);
    for (int i = 0; i < ni; ++i) rep.overlap += in.weight(i) * phi.row(i).adjoint() * phi.row(i);

    Eigen::MatrixXcd U0(no, ni);
    Eigen::MatrixXd eta(no, ni);
    double eta_max = 0.0;
    for (int r = 0; r < no; ++r)
        for (int i = 0; i < ni; ++i) {
            U0(r, i) = kernel.base(in[i], out[r]) * in.weight(i);
            eta(r, i) = kernel.mode_amplitude(1, in[i], out[r]);
            eta_max = std::max(eta_max, std::abs(eta(r, i)));
        }
    const cplx beta = kernel.decay(1);
    const double width = 1.0 / std::sqrt(beta.real());
    const double a_half = eta_max + 8.0 * width;
    const int n_a = std::max(opts.n_a, static_cast<int>(std::ceil(2.0 * a_half / (0.4 * width))) + 1);
    const UniformGrid a_grid(-a_half, a_half, n_a);
    const double lambda = std::sqrt(2.0 / kPi) / kernel.accuracy(1);

    rep.gram = Eigen::MatrixXcd::Zero(np, np);
    Eigen::MatrixXcd Ua(no, ni);
    for (int ia = 0; ia < n_a; ++ia) {
        const double a = a_grid[ia];
        for (int i = 0; i < ni; ++i)
            for (int r = 0; r < no; ++r) {
                const double d = eta(r, i) - a;
                Ua(r, i) = U0(r, i) * std::exp(-beta * d * d);
            }
        const Eigen::MatrixXcd psi = Ua * phi;
        rep.gram.noalias() += (a_grid.weight(ia) * lambda * out.spacing()) * (psi.adjoint() * psi);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rep.overlap);
    const Eigen::VectorXd ev = es.eigenvalues();
    rep.overlap_condition = ev.maxCoeff() / ev.minCoeff();
    const Eigen::MatrixXcd s_inv_half =
        es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::MatrixXcd normalized = s_inv_half * rep.gram * s_inv_half;
    rep.deviation = (normalized - Eigen::MatrixXcd::Identity(np, np)).cwiseAbs().maxCoeff();
    return rep;
}

}  // namespace symtomo
