#include <cmath>

#include <gtest/gtest.h>

#include "symtomo/analysis.hpp"
#include "symtomo/oracle.hpp"

using namespace symtomo;

namespace {

OscillatorModel particle(double m = 1.0) { return OscillatorModel{m, 0.0, {}}; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

MeasurementSpec identical_modes(double T, double da, int n) {
    return MeasurementSpec::per_mode(T, std::vector<double>(n, da));
}

}  // namespace

// ---------------------------------------------------------------------------
// sliced path integral

TEST(PathIntegral, FreeIsExactAtEverySlicing) {
    for (int n : {4, 7, 16, 33})
        for (auto [qi, qf] : {std::pair{0.0, 1.0}, {-0.7, 0.4}}) {
            const cplx u = discrete_path_amplitude(particle(1.3), MeasurementSpec::none(0.9), {}, qi, qf, n);
            EXPECT_LT(rel(u, free_particle_kernel(1.3, 0.9, qi, qf)), 1e-12) << n;
        }
}

TEST(PathIntegral, OscillatorAfterExtrapolation) {
    const OscillatorModel osc{1.0, 1.0, {}};
    for (double T : {0.5, 1.0, 2.5, 4.0}) {
        const cplx u = discrete_path_amplitude_extrapolated(osc, MeasurementSpec::none(T), {}, 0.3, -0.5);
        EXPECT_LT(rel(u, oscillator_kernel(1.0, 1.0, T, 0.3, -0.5)), 1e-3) << "T=" << T;
    }
}

TEST(PathIntegral, ExtrapolationBeatsSingleSlicing) {
    const OscillatorModel osc{1.0, 1.0, {}};
    const cplx exact = oscillator_kernel(1.0, 1.0, 1.0, 0.3, -0.5);
    const double single = rel(discrete_path_amplitude(osc, MeasurementSpec::none(1.0), {}, 0.3, -0.5, 64), exact);
    const double extra = rel(discrete_path_amplitude_extrapolated(osc, MeasurementSpec::none(1.0), {}, 0.3, -0.5), exact);
    EXPECT_LT(extra, 0.01 * single);
}

struct AmplitudeCase {
    double omega;
    bool force;
    int modes;
};

class PathVsAmplitude : public ::testing::TestWithParam<AmplitudeCase> {};

TEST_P(PathVsAmplitude, AgreeWithinOnePercent) {
    const auto c = GetParam();
    const double T = 1.0;
    OscillatorModel model{1.0, c.omega, {}};
    // time-dependent so that swapping the endpoints would show
    if (c.force) model.force = [](double t) { return 0.8 - 0.6 * t; };
    const auto meas = c.modes == 1 ? MeasurementSpec::per_mode(T, {0.9}) : MeasurementSpec::per_mode(T, {0.9, 1.3});
    const SpectralOutcome a = c.modes == 1 ? SpectralOutcome{{0.2}} : SpectralOutcome{{0.2, -0.1}};
    for (auto [qi, qf] : {std::pair{0.0, 0.5}, {-0.4, 0.3}}) {
        const cplx ref = weighted_amplitude(model, meas, a, qi, qf);
        const cplx num = discrete_path_amplitude_extrapolated(model, meas, a, qi, qf);
        EXPECT_LT(rel(num, ref), 0.01);
    }
}

INSTANTIATE_TEST_SUITE_P(Cases, PathVsAmplitude,
                         ::testing::Values(AmplitudeCase{0.0, false, 1}, AmplitudeCase{0.0, true, 2},
                                           AmplitudeCase{1.0, false, 2}, AmplitudeCase{1.0, true, 1},
                                           AmplitudeCase{1.0, true, 2}));

TEST(PathIntegral, Errors) {
    EXPECT_THROW(discrete_path_amplitude(particle(), MeasurementSpec::none(1.0), {}, 0.0, 1.0, 3), DomainError);
    EXPECT_THROW(oscillator_kernel(1.0, 1.0, kPi, 0.0, 1.0), CausticError);
}

// ---------------------------------------------------------------------------
// numeric propagators

TEST(NumericPropagator, ParticleVarianceWithinFivePercent) {
    const auto model = particle();
    const auto meas = identical_modes(1.0, 1.0, 64);
    const auto structural = particle_measured_propagator(model, MeasurementSpec::uniform_accuracy(1.0, 1.0, 64));
    for (auto [mu, nu] : {std::pair{0.0, 1.0}, {0.6, 0.8}}) {
        const auto prof = nonselective_profile(model, meas, mu, nu);
        EXPECT_NEAR(prof.variance, structural.variance(mu, nu), 0.05 * structural.variance(mu, nu));
        EXPECT_DOUBLE_EQ(prof.mapped_mu, mu);
        EXPECT_NEAR(prof.mapped_nu, nu + mu, 1e-15);
        EXPECT_LT(prof.max_imag, 1e-6);
        EXPECT_NEAR(prof.mass, 1.0, 1e-3);
    }
}

TEST(NumericPropagator, TwoModeQuadratureMatchesStructure) {
    const OscillatorModel osc{1.0, 1.0, {}};
    const auto meas = MeasurementSpec::per_mode(1.0, {0.8, 1.2});
    const auto structural = oscillator_measured_propagator(osc, meas);
    const auto prof = nonselective_profile(osc, meas, 0.6, 0.8);
    EXPECT_NEAR(prof.variance, structural.variance(0.6, 0.8), 0.05 * structural.variance(0.6, 0.8));
    EXPECT_NEAR(prof.mean, structural.shift(0.6, 0.8), 1e-6);
    EXPECT_LT(prof.max_imag, 1e-6);
}

TEST(NumericPropagator, ForcedMeanShift) {
    const OscillatorModel osc{1.0, 0.7, [](double t) { return 0.4 + 0.3 * t; }};
    const auto meas = MeasurementSpec::per_mode(1.0, {1.0});
    const auto structural = oscillator_measured_propagator(osc, meas);
    const auto prof = nonselective_profile(osc, meas, 0.5, 0.9);
    EXPECT_NEAR(prof.mean, structural.shift(0.5, 0.9), 1e-4);
    EXPECT_NEAR(prof.variance, structural.variance(0.5, 0.9), 0.05 * structural.variance(0.5, 0.9));
}

TEST(NumericPropagator, UnmeasuredWidthIsMollifierOnly) {
    const auto prof = nonselective_profile(particle(), MeasurementSpec::none(1.0), 0.6, 0.8);
    EXPECT_NEAR(prof.variance, 0.0, 1e-4);
    EXPECT_GT(prof.mollifier2, 0.0);
    // Matched-mollifier comparison with the structural shear.
    const auto iso = isolated_propagator(particle(), 1.0);
    const auto [mp, np] = iso.map(0.6, 0.8);
    const PhasePoint x{0.3, 0.6, 0.8};
    const double w = 0.05;
    for (double d : {-0.2, 0.0, 0.1}) {
        const PhasePoint xp{0.3 - d, mp, np};
        const double structural = normal_pdf(d, 0.0, prof.mollifier2) / (2 * kPi * w * w);
        EXPECT_NEAR(nonselective_propagator_numeric(prof, xp, x, w), structural, 1e-3 * structural);
    }
}

TEST(NumericPropagator, DegreeMinusTwoHomogeneity) {
    const auto model = particle();
    const auto prof = nonselective_profile(model, identical_modes(1.0, 1.0, 64), 0.6, 0.8);
    const auto psi = WaveFunction::gaussian_packet(QGrid(-8.0, 8.0, 256), 0.3, 1.0);
    const PhasePoint x{0.4, 0.6, 0.8};
    const double i1 = propagator_pairing(prof, psi, x, 1.0, 0.05);
    const double i2 = propagator_pairing(prof, psi, x, 2.0, 0.05);
    EXPECT_GT(i1, 0.0);
    EXPECT_NEAR(4.0 * i2, i1, 1e-3 * i1);
}

TEST(NumericPropagator, PartialMassesIntegrateToOne) {
    // Single measured mode: the outcome probabilities (profile masses) integrate to 1.
    const auto model = particle();
    const auto meas = MeasurementSpec::per_mode(1.0, {1.0});
    const GaussHermite gh = gauss_hermite(12);
    const double centre = 0.0, width = 1.2;
    double total = 0.0;
    for (size_t i = 0; i < gh.nodes.size(); ++i) {
        const double a = centre + std::sqrt(2.0) * width * gh.nodes[i];
        const auto prof = partial_profile(model, meas, {{a}}, 0.6, 0.8);
        total += gh.weights[i] * std::exp(gh.nodes[i] * gh.nodes[i]) * std::sqrt(2.0) * width * prof.mass;
    }
    EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(NumericPropagator, DirectionMismatchThrows) {
    const auto prof = nonselective_profile(particle(), MeasurementSpec::per_mode(1.0, {1.0}), 0.6, 0.8);
    EXPECT_THROW(nonselective_propagator_numeric(prof, {0.0, 0.6, 1.4}, {0.0, 1.0, 0.0}, 0.05), DomainError);
    EXPECT_THROW(nonselective_propagator_numeric(prof, {0.0, 0.6, 1.4}, {0.0, 0.6, 0.8}, 0.0), DomainError);
}

TEST(NumericPropagator, DirectionMapMatchesIsolated) {
    const OscillatorModel osc{1.3, 0.7, {}};
    const Map2 a = classical_direction_map(osc, 1.1), b = isolated_propagator(osc, 1.1).map;
    EXPECT_NEAR(a.m00, b.m00, 1e-15);
    EXPECT_NEAR(a.m01, b.m01, 1e-15);
    EXPECT_NEAR(a.m10, b.m10, 1e-15);
    EXPECT_NEAR(a.m11, b.m11, 1e-15);
}

// ---------------------------------------------------------------------------
// forward equation

namespace {

const std::vector<FokkerPlanckSample> kSamples = {
    {0.0, 0.4, 0.3, 0.9, 1.0}, {0.2, -0.3, -0.5, 0.7, 0.8}, {-0.1, 0.6, 0.8, -0.6, 1.3}, {0.0, 0.1, 0.0, 1.0, 1.0}};

}  // namespace

TEST(ForwardEquation, SecondOrderAtMatchedStrength) {
    const double c = 1.0;
    const auto model = particle();
    const auto fam = particle_family_scaled(model, c);
    for (const auto& s : kSamples) {
        const double r1 = std::abs(fokker_planck_residual(fam, model, s, 1.0 / c, 8e-3).residual);
        const double r2 = std::abs(fokker_planck_residual(fam, model, s, 1.0 / c, 4e-3).residual);
        EXPECT_NEAR(r1 / r2, 4.0, 0.2);
        EXPECT_LT(r2, 1e-4);
        EXPECT_LT(fokker_planck_residual(fam, model, s, 1.0 / c, 4e-3).chain_rule, 1e-10);
    }
}

TEST(ForwardEquation, MismatchedStrengthIsDetected) {
    const double c = 2.0;
    const auto model = particle(1.5);
    const auto fam = particle_family_scaled(model, c);
    for (const auto& s : kSamples) {
        const double good = std::abs(fokker_planck_residual(fam, model, s, 1.0 / c, 4e-3).residual);
        const double bad = std::abs(fokker_planck_residual(fam, model, s, 1.5 / c, 4e-3).residual);
        EXPECT_GT(bad, 10.0 * good);
    }
}

TEST(ForwardEquation, FittedStrength) {
    const double c = 0.7;
    const auto model = particle();
    EXPECT_NEAR(fit_diffusion_strength(particle_family_scaled(model, c), model, kSamples, 4e-3), 1.0 / c, 1e-3 / c);
}

TEST(ForwardEquation, ConstantForceDriftBalances) {
    const auto forced = OscillatorModel{1.0, 0.0, [](double) { return 0.9; }};
    const auto fam = particle_family_scaled(forced, 1.0);
    for (const auto& s : kSamples) {
        const auto with = fokker_planck_residual(fam, forced, s, 1.0, 4e-3);
        const auto without = fokker_planck_residual(fam, particle(), s, 1.0, 4e-3);
        EXPECT_LT(std::abs(with.residual), 1e-4);
        if (s.nu != 0.0) EXPECT_GT(std::abs(without.residual), 100.0 * std::abs(with.residual));
    }
}

TEST(ForwardEquation, StepUnderflow) {
    const auto fam = particle_family_scaled(particle(), 1.0);
    EXPECT_THROW(fokker_planck_residual(fam, particle(), kSamples[0], 1.0, 1e-9), DomainError);
}

// ---------------------------------------------------------------------------
// numeric entropy

TEST(NumericEntropy, UnitGaussian) {
    const UniformGrid x(-14.0, 14.0, 5601);
    const GaussianTomogram g{{0.0, 0.0, 1.0}, {0.0, 0.0}, 0.0};
    const double s = entropy_numeric(x, g.sample(0.0, 1.0, x).values);
    EXPECT_NEAR(s, 0.5 * (1.0 + std::log(kPi)), 1e-7);
    EXPECT_NEAR(s, 1.0724, 5e-5);
}

TEST(NumericEntropy, ScalingByESquaredAddsOne) {
    const UniformGrid x(-40.0, 40.0, 16001);
    const GaussianTomogram g{{0.0, 0.0, 1.0}, {0.0, 0.0}, 0.0};
    const GaussianTomogram wide{{0.0, 0.0, std::exp(2.0)}, {0.0, 0.0}, 0.0};
    EXPECT_NEAR(entropy_numeric(x, wide.sample(0.0, 1.0, x).values) - entropy_numeric(x, g.sample(0.0, 1.0, x).values),
                1.0, 1e-7);
}

TEST(NumericEntropy, NegativeValuesThrow) {
    const UniformGrid x(-1.0, 1.0, 3);
    EXPECT_THROW(entropy_numeric(x, std::vector<double>{0.5, -1e-6, 0.5}), DomainError);
    EXPECT_NO_THROW(entropy_numeric(x, std::vector<double>{0.5, -1e-12, 0.5}));
}

// ---------------------------------------------------------------------------

TEST(Unitarity, SingleModeGramIsIdentity) {
    const auto rep = outcome_unitarity(OscillatorModel{1.0, 1.0, {}}, MeasurementSpec::per_mode(1.0, {1.0}));
    EXPECT_EQ(rep.gram.rows(), 32);
    EXPECT_LT(rep.deviation, 1e-3);
}

TEST(Unitarity, NeedsOneMode) {
    EXPECT_THROW(outcome_unitarity(particle(), MeasurementSpec::per_mode(1.0, {1.0, 1.0})), DomainError);
}
