// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "symtomo/analysis.hpp"
#include "symtomo/oracle.hpp"
#include "symtomo/propagators.hpp"
#include "symtomo/tomography.hpp"

using namespace symtomo;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    // Records a failed check; the first few are kept in the detail text.
    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (pass || fails < 3) detail << " [" << what << "]";
        pass = false;
        ++fails;
    }
    int fails = 0;
};

using Criterion = std::function<void(Outcome&)>;

OscillatorModel particle(double m = 1.0) { return OscillatorModel{m, 0.0, {}}; }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

const std::vector<std::pair<double, double>> kDirections = {{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}, {-0.8, 0.6}, {0.3, -1.1}};

// 1 ---------------------------------------------------------------------------

UniformGrid scaled_grid(const UniformGrid& g, double k) {
    return k > 0 ? UniformGrid(k * g.lo(), k * g.hi(), g.size()) : UniformGrid(k * g.hi(), k * g.lo(), g.size());
}

void normalization_and_homogeneity(Outcome& out) {
    const QGrid q(-7.0, 7.0, 512);
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const UniformGrid x(-5.0, 5.0, 401), wide_x(-9.0, 9.0, 721);
    double worst_norm = 0.0, worst_hom = 0.0;
    for (int s = 0; s < 20; ++s) {
        WaveFunction psi = WaveFunction::gaussian_packet(q, u(rng), 1.0 + 0.3 * u(rng), 0.5 * u(rng));
        if (s % 2) {
            // Superposition of two displaced packets with a random relative phase.
            const double sep = 1.5 + 0.5 * u(rng), phase = 3.0 * u(rng), l = 1.0 + 0.2 * u(rng);
            std::vector<cplx> a(q.n_points());
            for (int i = 0; i < q.n_points(); ++i) {
                const double z1 = (q[i] - sep) / l, z2 = (q[i] + sep) / l;
                a[i] = std::exp(-0.5 * z1 * z1) + std::polar(1.0, phase) * std::exp(-0.5 * z2 * z2);
            }
            psi = WaveFunction(q, std::move(a));
        }
        for (int d = 0; d < 12; ++d) {
            const double th = d * kPi / 12.0;
            const double mu = std::cos(th), nu = d == 0 ? 0.0 : std::sin(th);
            worst_norm = std::max(worst_norm, std::abs(tomogram_from_wavefunction(psi, mu, nu, wide_x).integral() - 1.0));
            const auto base = tomogram_from_wavefunction(psi, mu, nu, x);
            for (double k : {-2.0, 0.5, 3.0}) {
                const auto t = tomogram_from_wavefunction(psi, k * mu, k * nu, scaled_grid(x, k));
                for (int i = 0; i < x.size(); ++i) {
                    const int j = k > 0 ? i : x.size() - 1 - i;
                    worst_hom = std::max(worst_hom, std::abs(t.values[j] - base.values[i] / std::abs(k)));
                }
            }
        }
    }
    out.require(worst_norm <= 1e-6, "normalization " + fmt(worst_norm));
    out.require(worst_hom <= 1e-6, "homogeneity " + fmt(worst_hom));
    out.detail << " max |int-1| = " << fmt(worst_norm) << ", max homogeneity error = " << fmt(worst_hom);
}

// 2 ---------------------------------------------------------------------------

void round_trip(Outcome& out) {
    const UniformGrid sample_x(-14.0, 14.0, 1401), check_x(-6.0, 6.0, 241);
    double worst = 0.0;
    for (auto [p, l] : {std::pair{0.0, 1.0}, {0.0, std::sqrt(0.5)}, {0.4, 1.2}}) {
        const auto g = gaussian_packet_tomogram(p, l);
        const auto rho =
            density_from_tomogram([&](double mu, double nu) { return g.sample(mu, nu, sample_x); }, QGrid(-6.0, 6.0, 64));
        for (auto [mu, nu] : {std::pair{1.0, 0.0}, {0.5, 0.866}, {0.0, 1.0}, {-0.4, 0.9}})
            worst = std::max(worst, sup_diff(tomogram_from_density(rho, mu, nu, check_x).values,
                                             g.sample(mu, nu, check_x).values));
    }
    out.require(worst <= 1e-4, "sup error " + fmt(worst));
    out.detail << " sup error = " << fmt(worst);
}

// 3 ---------------------------------------------------------------------------

void precision_closed_form(Outcome& out) {
    double worst = 0.0, worst_n1 = 0.0;
    for (double da : {0.5, 1.0, 3.0}) {
        const auto meas = MeasurementSpec::uniform_accuracy(1.0, da, 64);
        const auto c = precision_coefficients(meas, particle());
        worst = std::max({worst, std::abs(c.kappa - 1.0 / (3 * da * da)), std::abs(c.xi + 1.0 / (6 * da * da))});
        const auto one = precision_partial_sums(meas, particle(), 1);
        worst_n1 = std::max(worst_n1, std::abs(one.kappa - 2.0 / (kPi * kPi * da * da)));
    }
    out.require(worst <= 1e-6, "limit " + fmt(worst));
    out.require(worst_n1 <= 1e-12, "N=1 " + fmt(worst_n1));
    out.detail << " limit error = " << fmt(worst) << ", N=1 error = " << fmt(worst_n1);
}

// 4 ---------------------------------------------------------------------------

void particle_evolution(Outcome& out) {
    struct Case {
        double m, T, l, da, p;
    };
    // Wide enough for the convolution window of the strongest measurement below.
    const UniformGrid x(-40.0, 40.0, 8001);
    double worst = 0.0, worst_var = 0.0;
    for (const Case c : {Case{1, 1, 1, 1, 0}, Case{2.0, 0.5, 0.8, 0.5, 0.3}, Case{0.7, 1.5, 1.3, 2.0, -0.4}}) {
        const auto model = particle(c.m);
        const auto meas = MeasurementSpec::uniform_accuracy(c.T, c.da, 64);
        const auto prop = particle_measured_propagator(model, meas);
        const auto g = gaussian_packet_tomogram(c.p, c.l);
        const auto fam = apply_propagator([&](double mu, double nu) { return g.sample(mu, nu, x); }, prop);
        const auto exact = evolved_gaussian_tomogram(c.p, c.l, model, meas);
        const auto algebra = apply_propagator(g, prop);
        const auto free = apply_propagator(g, isolated_propagator(model, c.T));
        for (auto [mu, nu] : kDirections) {
            const auto t = fam(mu, nu);
            for (int i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(t.values[i] - exact(x[i], mu, nu)));
            // Statistical variance excess equals sigma2.
            const double excess = 0.5 * (algebra.width2(mu, nu) - free.width2(mu, nu));
            worst_var = std::max(worst_var, std::abs(excess - prop.variance(mu, nu)));
        }
    }
    out.require(worst <= 1e-6, "sup error " + fmt(worst));
    out.require(worst_var <= 1e-12, "variance excess " + fmt(worst_var));
    out.detail << " sup error = " << fmt(worst) << ", variance excess error = " << fmt(worst_var);
}

// 5 ---------------------------------------------------------------------------

void delta_limit(Outcome& out) {
    const UniformGrid x(-10.0, 10.0, 2001);
    for (const OscillatorModel model : {particle(), OscillatorModel{1.0, 1.0, {}}}) {
        const std::string tag = model.omega == 0.0 ? "particle" : "oscillator";
        const auto iso = apply_propagator(gaussian_packet_tomogram(0.0, 1.0), isolated_propagator(model, 1.0));
        double prev_s2 = INFINITY, prev_err = INFINITY;
        for (double da : {10.0, 100.0, 1000.0}) {
            const auto meas = MeasurementSpec::uniform_accuracy(1.0, da, 64);
            const auto prop = oscillator_measured_propagator(model, meas);
            const auto evolved = apply_propagator(gaussian_packet_tomogram(0.0, 1.0), prop);
            double s2 = 0.0, err = 0.0;
            for (auto [mu, nu] : kDirections) {
                s2 = std::max(s2, prop.variance(mu, nu));
                for (int i = 0; i < x.size(); ++i)
                    err = std::max(err, std::abs(evolved(x[i], mu, nu) - iso(x[i], mu, nu)));
            }
            out.require(s2 < prev_s2, tag + " sigma2 not decreasing at da=" + fmt(da));
            out.require(err <= 0.5 * prev_err, tag + " error not halving at da=" + fmt(da));
            prev_s2 = s2;
            prev_err = err;
        }
        out.detail << " " << tag << " error at da=1e3 = " << fmt(prev_err) << ";";
    }
}

// 6 ---------------------------------------------------------------------------

void oscillator_structure(Outcome& out) {
    double worst_det = 0.0;
    for (double w : {0.1, 0.5, 1.0, 2.0, 3.7})
        for (double T : {0.2, 0.9, 1.7, 4.1}) {
            if (std::abs(std::sin(w * T)) < 1e-3) continue;
            const auto p = oscillator_measured_propagator(OscillatorModel{1.3, w, {}}, MeasurementSpec::per_mode(T, {0.8}));
            worst_det = std::max(worst_det, std::abs(p.map.det() - 1.0));
        }
    out.require(worst_det <= 1e-12, "det " + fmt(worst_det));

    const auto period = oscillator_measured_propagator(OscillatorModel{1.0, 1.0, {}}, MeasurementSpec::none(2 * kPi));
    const double id_err = std::max({std::abs(period.map.m00 - 1), std::abs(period.map.m01), std::abs(period.map.m10),
                                    std::abs(period.map.m11 - 1), std::abs(period.sigma2.a), std::abs(period.sigma2.b),
                                    std::abs(period.sigma2.c), std::abs(period.mean_shift.alpha),
                                    std::abs(period.mean_shift.beta)});
    out.require(id_err <= 1e-12, "full period " + fmt(id_err));

    const auto meas = MeasurementSpec::uniform_accuracy(0.9, 0.8, 64);
    const auto force = [](double t) { return 0.5 + t; };
    const auto ref = particle_measured_propagator(OscillatorModel{1.0, 0.0, force}, meas);
    auto err = [&](double w) {
        const auto p = oscillator_measured_propagator(OscillatorModel{1.0, w, force}, meas);
        return std::max({std::abs(p.sigma2.a - ref.sigma2.a), std::abs(p.sigma2.b - ref.sigma2.b),
                         std::abs(p.sigma2.c - ref.sigma2.c), std::abs(p.map.m10 - ref.map.m10),
                         std::abs(p.mean_shift.alpha - ref.mean_shift.alpha),
                         std::abs(p.mean_shift.beta - ref.mean_shift.beta)});
    };
    const double ratio = err(1e-1) / err(1e-2);
    out.require(ratio > 50.0 && ratio < 200.0, "omega->0 ratio " + fmt(ratio));
    out.detail << " max |det-1| = " << fmt(worst_det) << ", period error = " << fmt(id_err)
               << ", omega->0 error ratio per decade = " << fmt(ratio);
}

// 7 ---------------------------------------------------------------------------

void path_integral(Outcome& out) {
    const double T = 1.0;
    double free_err = 0.0, worst = 0.0;
    for (int n : {4, 16, 33}) {
        const cplx u = discrete_path_amplitude(particle(1.3), MeasurementSpec::none(T), {}, -0.7, 0.4, n);
        free_err = std::max(free_err, std::abs(u - free_particle_kernel(1.3, T, -0.7, 0.4)) /
                                          std::abs(free_particle_kernel(1.3, T, -0.7, 0.4)));
    }
    for (double w : {0.0, 1.0 / T})
        for (int modes : {1, 2})
            for (bool forced : {false, true}) {
                OscillatorModel model{1.0, w, {}};
                if (forced) model.force = [](double t) { return 0.8 - 0.6 * t; };
                const auto meas = modes == 1 ? MeasurementSpec::per_mode(T, {0.9}) : MeasurementSpec::per_mode(T, {0.9, 1.3});
                const SpectralOutcome a = modes == 1 ? SpectralOutcome{{0.2}} : SpectralOutcome{{0.2, -0.1}};
                for (auto [qi, qf] : {std::pair{0.0, 0.5}, {-0.4, 0.3}}) {
                    const cplx ref = weighted_amplitude(model, meas, a, qi, qf);
                    const cplx num = discrete_path_amplitude_extrapolated(model, meas, a, qi, qf);
                    worst = std::max(worst, std::abs(num - ref) / std::abs(ref));
                }
            }
    out.require(free_err <= 1e-12, "free " + fmt(free_err));
    out.require(worst <= 0.01, "weighted " + fmt(worst));
    out.detail << " free relative error = " << fmt(free_err) << ", weighted relative error = " << fmt(worst);
}

// 8 ---------------------------------------------------------------------------

void nonselective_oracle(Outcome& out) {
    const auto model = particle();
    const auto meas = MeasurementSpec::per_mode(1.0, std::vector<double>(64, 1.0));
    const auto structural = particle_measured_propagator(model, MeasurementSpec::uniform_accuracy(1.0, 1.0, 64));
    double worst = 0.0;
    for (auto [mu, nu] : {std::pair{0.0, 1.0}, {0.6, 0.8}}) {
        const auto prof = nonselective_profile(model, meas, mu, nu);
        worst = std::max(worst, std::abs(prof.variance / structural.variance(mu, nu) - 1.0));
    }
    const auto osc = OscillatorModel{1.0, 1.0, {}};
    const auto two = MeasurementSpec::per_mode(1.0, {0.8, 1.2});
    worst = std::max(worst, std::abs(nonselective_profile(osc, two, 0.6, 0.8).variance /
                                         oscillator_measured_propagator(osc, two).variance(0.6, 0.8) -
                                     1.0));

    const auto prof = nonselective_profile(model, meas, 0.6, 0.8);
    const auto psi = WaveFunction::gaussian_packet(QGrid(-8.0, 8.0, 256), 0.3, 1.0);
    const PhasePoint x{0.4, 0.6, 0.8};
    const double i1 = propagator_pairing(prof, psi, x, 1.0, 0.05);
    const double i2 = propagator_pairing(prof, psi, x, 2.0, 0.05);
    const double hom = std::abs(4.0 * i2 / i1 - 1.0);
    out.require(worst <= 0.05, "variance " + fmt(worst));
    out.require(hom <= 1e-3, "homogeneity " + fmt(hom));
    out.detail << " relative variance error = " << fmt(worst) << ", homogeneity error = " << fmt(hom);
}

// 9 ---------------------------------------------------------------------------

void forward_equation(Outcome& out) {
    const std::vector<FokkerPlanckSample> samples = {
        {0.0, 0.4, 0.3, 0.9, 1.0}, {0.2, -0.3, -0.5, 0.7, 0.8}, {-0.1, 0.6, 0.8, -0.6, 1.3}, {0.0, 0.1, 0.0, 1.0, 1.0}};
    const auto model = particle();
    const double c = 1.0;  // da^2 = c / T
    const auto fam = particle_family_scaled(model, c);
    double min_order = INFINITY, min_gain = INFINITY;
    for (const auto& s : samples) {
        const double r1 = std::abs(fokker_planck_residual(fam, model, s, 1.0 / c, 8e-3).residual);
        const double r2 = std::abs(fokker_planck_residual(fam, model, s, 1.0 / c, 4e-3).residual);
        const double r3 = std::abs(fokker_planck_residual(fam, model, s, 1.0 / c, 2e-3).residual);
        const double order = std::log2(std::sqrt((r1 / r2) * (r2 / r3)));
        min_order = std::min(min_order, order);
        out.require(std::abs(order - 2.0) < 0.1, "order " + fmt(order));
        const double bad = std::abs(fokker_planck_residual(fam, model, s, 1.5 / c, 4e-3).residual);
        min_gain = std::min(min_gain, bad / r2);
    }
    out.require(min_gain >= 10.0, "perturbed gain " + fmt(min_gain));
    out.detail << " observed order >= " << fmt(min_order) << ", residual gain under 50% perturbation >= "
               << fmt(min_gain);
}

// 10 --------------------------------------------------------------------------

void entropy(Outcome& out) {
    const UniformGrid x(-16.0, 16.0, 6401);
    double num_err = 0.0;
    for (double l : {0.5, 1.0, 1.7}) {
        const auto g = gaussian_packet_tomogram(0.3, l);
        for (auto [mu, nu] : {std::pair{1.0, 0.0}, {0.6, 0.8}})
            num_err = std::max(num_err, std::abs(entropy_numeric(x, g.sample(mu, nu, x).values) -
                                                 symplectic_entropy_gaussian(g, mu, nu)));
    }
    out.require(num_err <= 1e-7, "numeric " + fmt(num_err));

    const double unmeasured = entropy_delta(0.1, 1.0, particle(), MeasurementSpec::none(1.0), 0.6, 0.8);
    out.require(unmeasured == 0.0, "no measurement " + fmt(unmeasured));

    double mu0_err = 0.0;
    for (double l : {0.5, 1.0, 2.0})
        for (double da : {0.3, 1.0, 5.0})
            mu0_err = std::max(mu0_err, std::abs(entropy_delta(0.0, l, particle(), MeasurementSpec::uniform_accuracy(1.3, da, 64),
                                                               0.0, 0.7) -
                                                 0.5 * std::log1p(4 * l * l / (da * da))));
    out.require(mu0_err <= 1e-12, "mu=0 " + fmt(mu0_err));

    bool monotone = true;
    for (auto [mu, nu] : kDirections) {
        double prev = INFINITY;
        for (double e = -2.0; e <= 3.0; e += 0.25) {
            const double d =
                entropy_delta(0.0, 1.0, particle(), MeasurementSpec::uniform_accuracy(1.0, std::pow(10.0, e), 64), mu, nu);
            monotone = monotone && d < prev && d >= 0.0;
            prev = d;
        }
    }
    out.require(monotone, "not monotone");
    out.detail << " numeric error = " << fmt(num_err) << ", mu=0 error = " << fmt(mu0_err);
}

// 11 --------------------------------------------------------------------------

void unitarity(Outcome& out) {
    const auto rep = outcome_unitarity(OscillatorModel{1.0, 1.0, {}}, MeasurementSpec::per_mode(1.0, {1.0}));
    out.require(rep.gram.rows() == 32, "grid size");
    out.require(rep.deviation <= 1e-3, "deviation " + fmt(rep.deviation));
    out.detail << " max |G - I| = " << fmt(rep.deviation);
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, Criterion>> criteria = {
        {"normalization and homogeneity", normalization_and_homogeneity},
        {"tomogram/density round trip", round_trip},
        {"precision coefficients closed form", precision_closed_form},
        {"particle evolution", particle_evolution},
        {"delta limit", delta_limit},
        {"oscillator structure", oscillator_structure},
        {"path-integral oracle", path_integral},
        {"non-selective oracle", nonselective_oracle},
        {"forward equation", forward_equation},
        {"entropy", entropy},
        {"generalized unitarity", unitarity},
    };
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << " exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !out.pass;
        std::printf("%s %2zu %s:%s (%.1fs)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    out.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures ? 1 : 0;
}
