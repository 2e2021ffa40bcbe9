#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "symtomo/core.hpp"

namespace symtomo {

/// Pure state sampled on a position grid. Construction normalizes the
/// samples so that sum |psi|^2 * spacing = 1.
class WaveFunction {
public:
    WaveFunction(QGrid grid, std::vector<cplx> amplitudes);

    /// (pi l^2)^(-1/4) exp(i p (q - q0) - (q - q0)^2 / (2 l^2)).
    static WaveFunction gaussian_packet(const QGrid& grid, double p, double l, double q0 = 0.0);

    const QGrid& grid() const { return grid_; }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    cplx operator()(double q) const;  ///< band-limited interpolation between samples

private:
    QGrid grid_;
    std::vector<cplx> amps_;
};

/// Tolerances used to validate a DensityMatrix on construction.
struct DensityTolerances {
    double hermitian = 1e-10;
    double trace = 1e-8;
    double eigenvalue = 1e-8;
};

/// Density matrix rho(q_i, q_j) on a position grid; trace is sum rho_ii * spacing.
class DensityMatrix {
public:
    DensityMatrix(QGrid grid, Eigen::MatrixXcd entries, DensityTolerances tol = {});

    static DensityMatrix pure(const WaveFunction& psi);
    /// Convex combination sum w_k |psi_k><psi_k|; weights must sum to 1.
    static DensityMatrix mixture(const std::vector<WaveFunction>& states, const std::vector<double>& weights);

    const QGrid& grid() const { return grid_; }
    const Eigen::MatrixXcd& entries() const { return rho_; }
    double trace() const;

private:
    QGrid grid_;
    Eigen::MatrixXcd rho_;
};

/// Tomogram at a fixed direction (mu, nu), sampled on an X grid.
struct SampledTomogram {
    double mu;
    double nu;
    UniformGrid x_grid;
    std::vector<double> values;

    double integral() const { return trapezoid(values, x_grid.spacing()); }
    double operator()(double X) const { return interpolate_linear(x_grid, values, X); }
};

/// Source of tomograms by direction; used by the inverse map and by the
/// propagator when the input is not analytic.
using TomogramFamily = std::function<SampledTomogram(double mu, double nu)>;

/// Gaussian tomogram (pi s^2)^(-1/2) exp(-(X - m)^2 / s^2) with
/// s^2 = variance_form(mu, nu) and m = mean_form(mu, nu) + mean_offset.
/// The statistical variance of X is s^2 / 2.
struct GaussianTomogram {
    QuadraticForm2 variance_form;
    LinearForm2 mean_form;
    double mean_offset = 0.0;

    double width2(double mu, double nu) const;  ///< s^2, throws DomainError when not positive
    double mean(double mu, double nu) const { return mean_form(mu, nu) + mean_offset; }
    double operator()(double X, double mu, double nu) const;
    double operator()(const PhasePoint& x) const { return (*this)(x.X, x.mu, x.nu); }
    SampledTomogram sample(double mu, double nu, const UniformGrid& x_grid) const;
};

/// Tomogram of a pure state. For nu != 0 this is the chirp integral
/// (2 pi |nu|)^-1 |int psi(q) exp(i mu q^2 / (2 nu) - i X q / nu) dq|^2;
/// for nu == 0 it is |psi(X/mu)|^2 / |mu|.
/// Throws DomainError for (0, 0) and ResolutionError when the position grid
/// cannot resolve the chirp (|mu| q_max spacing / |nu| > pi/4) or the X range.
SampledTomogram tomogram_from_wavefunction(const WaveFunction& psi, double mu, double nu,
                                           const UniformGrid& x_grid);

/// Mixes pure-state tomograms of the eigenvectors of rho with eigenvalue weights.
SampledTomogram tomogram_from_density(const DensityMatrix& rho, double mu, double nu,
                                      const UniformGrid& x_grid);

struct ReconstructionOptions {
    double mu_max = 12.0;  ///< characteristic function is integrated over [-mu_max, mu_max]
    int n_mu = 193;        ///< odd, so that mu = 0 is a node
    double hermitian_tol = 1e-6;
    double trace_tol = 1e-4;
    double tail_tol = 1e-6;  ///< |chi| allowed at the edge of the mu box
};

/// Inverse map rho = int T(x) D(x) dx. The family is queried on unit
/// directions (cos theta, sin theta) only; other points of the (mu, nu) plane
/// follow from T(kx) = |k|^-1 T(x). Throws ReconstructionError when the box is
/// under-sampled or the result misses its Hermiticity / trace tolerances.
DensityMatrix density_from_tomogram(const TomogramFamily& family, const QGrid& q_grid,
                                    const ReconstructionOptions& opts = {});

/// Characteristic function <exp(i(mu q + nu p))> from a family, through the
/// unit-direction tomogram at |(mu, nu)|.
cplx characteristic_from_family(const TomogramFamily& family, double mu, double nu);

/// Star-product kernel M_{x1 x2}(x) with the delta factor replaced by a
/// normalized Gaussian of width delta_width. Requires x.nu != 0.
cplx star_kernel(const PhasePoint& x1, const PhasePoint& x2, const PhasePoint& x, double delta_width);

/// M_{x1 x2}(x) - M_{x2 x1}(x).
cplx commutator_kernel(const PhasePoint& x1, const PhasePoint& x2, const PhasePoint& x, double delta_width);

/// Tomogram of the Gaussian packet (pi l^2)^(-1/4) exp(i p q - q^2/(2 l^2)):
/// s^2 = mu^2 l^2 + nu^2 / l^2, mean nu p.
GaussianTomogram gaussian_packet_tomogram(double p, double l);

}  // namespace symtomo
