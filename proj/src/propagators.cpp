#include "symtomo/propagators.hpp"

#include <cmath>
#include <sstream>

namespace symtomo {

namespace {

double sin_scaled(double w, double x) { return w == 0.0 ? x : std::sin(w * x) / w; }
double cos_scaled(double w, double x) { return w == 0.0 ? 1.0 : std::cos(w * x); }

// Summand shape in the mode index: x^2 / (x^2 - z^2)^2 with z = omega T / pi.
double shape(double x, double z) {
    const double d = x * x - z * z;
    return x * x / (d * d);
}

double shape_derivative(double x, double z) {
    const double d = x * x - z * z;
    return -2.0 * x * (x * x + z * z) / (d * d * d);
}

// int_X^inf shape(x) dx for X > z.
double shape_tail(double X, double z) {
    if (z == 0.0) return 1.0 / X;
    return X / (2.0 * (X * X - z * z)) - std::log1p(-2.0 * z / (X + z)) / (4.0 * z);
}

void check_resonance(double z, int n) {
    if (std::abs(n - z) <= 1e-12 * std::max(1.0, z)) {
        std::ostringstream os;
        os << "resonance: mode " << n << " frequency equals omega";
        throw ResonanceError(os.str());
    }
}

}  // namespace

PrecisionCoefficients precision_partial_sums(const MeasurementSpec& meas, const OscillatorModel& model,
                                             int n_terms) {
    meas.validate();
    model.validate();
    if (n_terms < 0) throw DomainError("precision_partial_sums: n_terms must be >= 0");
    const double T = meas.duration;
    const double z = model.omega * T / kPi;
    PrecisionCoefficients out;
    for (int n = 1; n <= n_terms; ++n) {
        const double da = n <= meas.n_modes || meas.uniform ? meas.accuracy(n) : kUnmeasured;
        if (!std::isfinite(da)) continue;
        check_resonance(z, n);
        const double term = 2.0 / (kPi * kPi * da * da) * shape(n, z);
        out.kappa += term;
        out.xi += (n % 2 == 0 ? term : -term);
    }
    out.n_terms_used = n_terms;
    return out;
}

PrecisionCoefficients precision_coefficients(const MeasurementSpec& meas, const OscillatorModel& model,
                                             double tol, int max_terms) {
    meas.validate();
    model.validate();
    if (!(tol > 0.0)) throw DomainError("precision_coefficients: tol must be positive");
    if (!meas.uniform) return precision_partial_sums(meas, model, meas.n_modes);

    const double da = meas.accuracies.front();
    if (!std::isfinite(da)) return {};
    const double scale = 2.0 / (kPi * kPi * da * da);
    const double z = model.omega * meas.duration / kPi;

    // kappa: partial sum plus the midpoint-rule integral of the remainder,
    // with the endpoint correction; the bound is the size of that correction.
    // xi: alternating sum averaged over its last two partial sums.
    double kappa_sum = 0.0, xi_sum = 0.0;
    double prev_kappa = NAN, prev_xi = NAN;
    for (int n = 1; n <= max_terms; ++n) {
        check_resonance(z, n);
        const double g = shape(n, z);
        kappa_sum += g;
        xi_sum += (n % 2 == 0 ? g : -g);
        const double X = n + 0.5;
        if (X <= 2.0 * z + 1.0) continue;  // bounds only hold past the resonant region

        const double gd = shape_derivative(X, z);
        const double kappa_est = kappa_sum + shape_tail(X, z) + gd / 24.0;
        const double g_next = shape(n + 1, z), g_next2 = shape(n + 2, z);
        const double xi_est = xi_sum + ((n + 1) % 2 == 0 ? 0.5 * g_next : -0.5 * g_next);
        const double bound = scale * std::max(std::abs(gd) / 24.0, 0.5 * (g_next - g_next2));

        const bool settled = !std::isnan(prev_kappa) && scale * std::abs(kappa_est - prev_kappa) < tol / 10.0 &&
                             scale * std::abs(xi_est - prev_xi) < tol / 10.0;
        if (bound < tol && settled) {
            return {scale * kappa_est, scale * xi_est, n, bound};
        }
        prev_kappa = kappa_est;
        prev_xi = xi_est;
    }
    std::ostringstream os;
    os << "precision coefficients did not reach tol " << tol << " within " << max_terms << " terms";
    throw TruncationError(os.str());
}

// ---------------------------------------------------------------------------

StructuredPropagator identity_propagator() { return {}; }

StructuredPropagator compose(const StructuredPropagator& first, const StructuredPropagator& second) {
    StructuredPropagator out;
    out.map = first.map * second.map;
    out.sigma2 = compose(first.sigma2, second.map) + second.sigma2;
    out.mean_shift = compose(first.mean_shift, second.map) + second.mean_shift;
    out.duration = first.duration + second.duration;
    return out;
}

StructuredPropagator oscillator_measured_propagator(const OscillatorModel& model, const MeasurementSpec& meas,
                                                    double tol) {
    model.validate();
    meas.validate();
    const double m = model.mass, w = model.omega, T = meas.duration;
    const double s = sin_scaled(w, T);  // sin(wT)/w
    const double c = cos_scaled(w, T);

    StructuredPropagator out;
    out.duration = T;
    out.map = {c, -m * w * w * s, s / m, c};

    const PrecisionCoefficients pc = precision_coefficients(meas, model, tol);
    const double k = pc.kappa, x = pc.xi;
    // sin(2wT)/(m w) = 2 c s / m in scaled form
    out.sigma2 = {2.0 * k * s * s / (m * m), 2.0 * k * 2.0 * c * s / m - 4.0 * x * s / m,
                  2.0 * k * (1.0 + c * c) - 4.0 * x * c};

    if (model.has_force()) {
        // The shift below stays finite at a caustic, but the boundary-value
        // construction behind it does not, so a forced caustic is rejected.
        if (w > 0.0 && std::abs(std::sin(w * T)) < 1e-10) {
            std::ostringstream os;
            os << "caustic: forced oscillator with omega T = " << w * T << " a multiple of pi";
            throw CausticError(os.str());
        }
        const auto& f = model.force;
        const double tq = std::max(1e-13, 1e-12 * T);
        out.mean_shift.alpha = integrate_1d([&](double t) { return f(t) * sin_scaled(w, T - t); }, 0.0, T, tq) / m;
        out.mean_shift.beta = integrate_1d([&](double t) { return f(t) * cos_scaled(w, T - t); }, 0.0, T, tq);
    }
    return out;
}

StructuredPropagator particle_measured_propagator(const OscillatorModel& model, const MeasurementSpec& meas) {
    model.validate();
    meas.validate();
    if (model.omega != 0.0) throw DomainError("particle propagator needs omega = 0");
    if (!meas.uniform && meas.n_modes > 0) throw DomainError("particle propagator needs a uniform accuracy");
    const double m = model.mass, T = meas.duration;

    StructuredPropagator out;
    out.duration = T;
    out.map = {1.0, 0.0, T / m, 1.0};
    if (meas.uniform) {
        const double da = meas.accuracies.front();
        const double g = 2.0 / (3.0 * da * da);
        out.sigma2 = {g * T * T / (m * m), g * 3.0 * T / m, g * 3.0};
    }
    if (model.has_force()) {
        const auto& f = model.force;
        const double tq = std::max(1e-13, 1e-12 * T);
        out.mean_shift.alpha = integrate_1d([&](double t) { return f(t) * (T - t); }, 0.0, T, tq) / m;
        out.mean_shift.beta = integrate_1d([&](double t) { return f(t); }, 0.0, T, tq);
    }
    return out;
}

StructuredPropagator isolated_propagator(const OscillatorModel& model, double T) {
    return oscillator_measured_propagator(model, MeasurementSpec::none(T));
}

// ---------------------------------------------------------------------------

GaussianTomogram apply_propagator(const GaussianTomogram& in, const StructuredPropagator& prop) {
    GaussianTomogram out;
    out.variance_form = compose(in.variance_form, prop.map) + prop.sigma2 * 2.0;
    out.mean_form = compose(in.mean_form, prop.map) + prop.mean_shift;
    out.mean_offset = in.mean_offset;
    return out;
}

TomogramFamily apply_propagator(const TomogramFamily& in, const StructuredPropagator& prop) {
    return [in, prop](double mu, double nu) {
        require_direction(mu, nu);
        const auto [mu_in, nu_in] = prop.map(mu, nu);
        SampledTomogram src = in(mu_in, nu_in);
        const double var = prop.variance(mu, nu);
        if (var < 0.0) throw DomainError("propagator variance is negative");
        SampledTomogram out{mu, nu, src.x_grid, gaussian_convolve(src.x_grid, src.values, prop.shift(mu, nu), var)};
        return out;
    };
}

std::vector<double> apply_propagator(const TomogramFamily& in, const StructuredPropagator& prop,
                                     std::span<const PhasePoint> query) {
    const TomogramFamily evolved = apply_propagator(in, prop);
    std::vector<double> out;
    out.reserve(query.size());
    for (const PhasePoint& x : query) out.push_back(evolved(x.mu, x.nu)(x.X));
    return out;
}

std::vector<double> apply_propagator(const GaussianTomogram& in, const StructuredPropagator& prop,
                                     std::span<const PhasePoint> query) {
    const GaussianTomogram evolved = apply_propagator(in, prop);
    std::vector<double> out;
    out.reserve(query.size());
    for (const PhasePoint& x : query) out.push_back(evolved(x));
    return out;
}

GaussianTomogram evolved_gaussian_tomogram(double p, double l, const OscillatorModel& model,
                                           const MeasurementSpec& meas) {
    return apply_propagator(gaussian_packet_tomogram(p, l), particle_measured_propagator(model, meas));
}

}  // namespace symtomo
