#include "symtomo/analysis.hpp"

#include <cmath>
#include <sstream>

#include "symtomo/propagators.hpp"

namespace symtomo {

double symplectic_entropy_gaussian(const GaussianTomogram& tomo, double mu, double nu) {
    const double s2 = tomo.width2(mu, nu);
    return 0.5 * (1.0 + std::log(kPi)) + 0.5 * std::log(s2);
}

double entropy_delta(double p, double l, const OscillatorModel& model, const MeasurementSpec& meas, double mu,
                     double nu) {
    require_direction(mu, nu);
    const StructuredPropagator measured = particle_measured_propagator(model, meas);
    StructuredPropagator isolated = measured;
    isolated.sigma2 = {};
    const GaussianTomogram free = apply_propagator(gaussian_packet_tomogram(p, l), isolated);
    // log1p keeps the difference accurate when the broadening is small
    return 0.5 * std::log1p(2.0 * measured.variance(mu, nu) / free.width2(mu, nu));
}

Moments tomogram_moments(const GaussianTomogram& tomo, double mu, double nu) {
    return {tomo.mean(mu, nu), 0.5 * tomo.width2(mu, nu)};
}

Moments tomogram_moments(const SampledTomogram& tomo, double mass_tol) {
    const auto& g = tomo.x_grid;
    const int n = g.size();
    double m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < n; ++i) {
        m0 += g.weight(i) * tomo.values[i];
        m1 += g.weight(i) * tomo.values[i] * g[i];
    }
    if (std::abs(m0 - 1.0) > mass_tol) {
        std::ostringstream os;
        os << "tomogram mass " << m0 << " differs from 1 by more than " << mass_tol;
        throw DomainError(os.str());
    }
    const double mean = m1 / m0;
    double m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = g[i] - mean;
        m2 += g.weight(i) * tomo.values[i] * d * d;
    }
    return {mean, m2 / m0};
}

}  // namespace symtomo
