#include "symtomo/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace symtomo {

UniformGrid::UniformGrid(double lo, double hi, int n) : lo_(lo), hi_(hi), n_(n), h_(0.0) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(hi > lo) || n < 2) {
        std::ostringstream os;
        os << "invalid grid [" << lo << ", " << hi << "] with " << n << " points";
        throw DomainError(os.str());
    }
    h_ = (hi - lo) / (n - 1);
}

std::vector<double> UniformGrid::points() const {
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = (*this)[i];
    return out;
}

int UniformGrid::cell(double x) const {
    const int i = static_cast<int>(std::floor((x - lo_) / h_));
    return std::clamp(i, 0, n_ - 2);
}

QGrid::QGrid(double q_min, double q_max, int n_points) : UniformGrid(q_min, q_max, n_points) {
    if (n_points < 8) throw DomainError("QGrid needs at least 8 points");
}

void require_direction(double mu, double nu) {
    if (mu == 0.0 && nu == 0.0) throw DomainError("degenerate tomographic direction (mu, nu) = (0, 0)");
}

bool QuadraticForm2::is_positive_semidefinite(double tol) const {
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
    return a >= -tol * scale && c >= -tol * scale && 4.0 * a * c - b * b >= -tol * scale * scale;
}

Map2 Map2::operator*(const Map2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
}

QuadraticForm2 compose(const QuadraticForm2& q, const Map2& L) {
    // q(L v) with v = (mu, nu); expand the symmetric matrix L^T Q L.
    const double qa = q.a, qb = 0.5 * q.b, qc = q.c;
    const double a = qa * L.m00 * L.m00 + 2 * qb * L.m00 * L.m10 + qc * L.m10 * L.m10;
    const double c = qa * L.m01 * L.m01 + 2 * qb * L.m01 * L.m11 + qc * L.m11 * L.m11;
    const double off = qa * L.m00 * L.m01 + qb * (L.m00 * L.m11 + L.m10 * L.m01) + qc * L.m10 * L.m11;
    return {a, 2 * off, c};
}

LinearForm2 compose(const LinearForm2& l, const Map2& L) {
    return {l.alpha * L.m00 + l.beta * L.m10, l.alpha * L.m01 + l.beta * L.m11};
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7/15

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Segment {
    double a, b;
    T value;
    double error;
    int depth;
    bool operator<(const Segment& o) const { return error < o.error; }
};

double magnitude(double x) { return std::abs(x); }
double magnitude(const cplx& x) { return std::abs(x); }

template <typename T, typename F>
Segment<T> gk15(const F& f, double a, double b, int depth) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kron = fc * kWgk[7];
    T gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const T s = f(c - dx) + f(c + dx);
        kron += s * kWgk[j];
        if (j % 2 == 1) gauss += s * kWg[j / 2];
    }
    kron *= h;
    gauss *= h;
    return {a, b, kron, magnitude(kron - gauss), depth};
}

template <typename T>
struct Adaptive {
    T value;
    double error;
    int intervals;
};

template <typename T, typename F>
Adaptive<T> adaptive(const F& f, double a, double b, const QuadratureOptions& opts) {
    std::priority_queue<Segment<T>> queue;
    queue.push(gk15<T>(f, a, b, 0));
    T total = queue.top().value;
    double err = queue.top().error;
    int intervals = 1;
    while (err > opts.tol) {
        Segment<T> worst = queue.top();
        if (worst.depth >= opts.max_depth || intervals >= opts.max_intervals) {
            std::ostringstream os;
            os << "adaptive quadrature did not converge on [" << a << ", " << b
               << "]: error estimate " << err << " > tol " << opts.tol;
            throw QuadratureError(os.str());
        }
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = gk15<T>(f, worst.a, mid, worst.depth + 1);
        auto right = gk15<T>(f, mid, worst.b, worst.depth + 1);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++intervals;
        if (err <= opts.tol) {
            // Re-sum to wash out accumulated cancellation in the running totals.
            T fresh{};
            double ferr = 0.0;
            auto copy = queue;
            while (!copy.empty()) {
                fresh += copy.top().value;
                ferr += copy.top().error;
                copy.pop();
            }
            total = fresh;
            err = ferr;
        }
    }
    return {total, err, intervals};
}

template <typename T>
Adaptive<T> integrate_any(const std::function<T(double)>& f, double lo, double hi,
                          const QuadratureOptions& opts) {
    if (!(opts.tol > 0)) throw DomainError("quadrature tolerance must be positive");
    if (std::isnan(lo) || std::isnan(hi)) throw DomainError("NaN integration limit");
    if (lo == hi) return {T{}, 0.0, 0};
    if (lo > hi) {
        auto r = integrate_any<T>(f, hi, lo, opts);
        return {-r.value, r.error, r.intervals};
    }
    const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) {
        auto g = [&](double t) -> T {
            const double d = 1.0 - t * t;
            const double x = t / d;
            const double jac = (1.0 + t * t) / (d * d);
            return std::isfinite(x) ? f(x) * jac : T{};
        };
        return adaptive<T>(g, -1.0, 1.0, opts);
    }
    if (hi_inf) {
        auto g = [&](double t) -> T {
            const double d = 1.0 - t;
            const double x = lo + t / d;
            const double jac = 1.0 / (d * d);
            return std::isfinite(x) ? f(x) * jac : T{};
        };
        return adaptive<T>(g, 0.0, 1.0, opts);
    }
    if (lo_inf) {
        auto g = [&](double t) -> T {
            const double d = 1.0 - t;
            const double x = hi - t / d;
            const double jac = 1.0 / (d * d);
            return std::isfinite(x) ? f(x) * jac : T{};
        };
        return adaptive<T>(g, 0.0, 1.0, opts);
    }
    return adaptive<T>(f, lo, hi, opts);
}

}  // namespace

double integrate_real(const std::function<double(double)>& f, double lo, double hi, double tol) {
    return integrate_any<double>(f, lo, hi, QuadratureOptions{.tol = tol}).value;
}

cplx integrate_complex(const std::function<cplx(double)>& f, double lo, double hi, double tol) {
    return integrate_any<cplx>(f, lo, hi, QuadratureOptions{.tol = tol}).value;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    const QuadratureOptions& opts) {
    auto r = integrate_any<double>(f, lo, hi, opts);
    return {r.value, r.error, r.intervals};
}

double trapezoid(std::span<const double> v, double h) {
    if (v.empty()) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return v.size() == 1 ? 0.0 : s * h;
}

cplx trapezoid(std::span<const cplx> v, double h) {
    if (v.size() < 2) return {};
    cplx s = 0.5 * (v.front() + v.back());
    for (size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * h;
}

// ---------------------------------------------------------------------------

double normal_pdf(double x, double mean, double variance) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * kPi * variance);
}

double interpolate_linear(const UniformGrid& grid, std::span<const double> f, double x) {
    if (x < grid.lo() || x > grid.hi()) return 0.0;
    const int i = grid.cell(x);
    const double t = (x - grid[i]) / grid.spacing();
    return (1.0 - t) * f[i] + t * f[i + 1];
}

cplx interpolate_lagrange(const UniformGrid& grid, std::span<const cplx> f, double x) {
    constexpr int kStencil = 8;
    const int n = grid.size();
    if (x < grid.lo() || x > grid.hi()) return {};
    if (n < kStencil) throw DomainError("Lagrange interpolation needs at least 8 samples");
    const int start = std::clamp(grid.cell(x) - kStencil / 2 + 1, 0, n - kStencil);
    const double u = (x - grid[start]) / grid.spacing();
    cplx out{};
    for (int j = 0; j < kStencil; ++j) {
        double w = 1.0;
        for (int k = 0; k < kStencil; ++k) {
            if (k != j) w *= (u - k) / static_cast<double>(j - k);
        }
        out += w * f[start + j];
    }
    return out;
}

std::vector<double> gaussian_convolve(const UniformGrid& grid, std::span<const double> f,
                                      double mean_shift, double variance) {
    const int n = grid.size();
    if (static_cast<int>(f.size()) != n) throw DomainError("gaussian_convolve: sample count != grid size");
    if (!(variance >= 0.0) || !std::isfinite(mean_shift)) {
        throw DomainError("gaussian_convolve: variance must be >= 0 and the shift finite");
    }

    double fmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    std::vector<double> out(n, 0.0);
    if (fmax == 0.0) return out;

    int first = n, last = -1;
    for (int i = 0; i < n; ++i) {
        if (std::abs(f[i]) > 1e-10 * fmax) {
            first = std::min(first, i);
            last = i;
        }
    }
    const double sd = std::sqrt(variance);
    const double reach = std::abs(mean_shift) + 6.0 * sd;
    if (grid[first] - reach < grid.lo() - 1e-12 || grid[last] + reach > grid.hi() + 1e-12) {
        std::ostringstream os;
        os << "gaussian_convolve: support [" << grid[first] << ", " << grid[last]
           << "] widened by " << reach << " leaves the grid [" << grid.lo() << ", " << grid.hi() << "]";
        throw DomainError(os.str());
    }

    if (variance == 0.0) {
        for (int i = 0; i < n; ++i) out[i] = interpolate_linear(grid, f, grid[i] - mean_shift);
        return out;
    }

    const double h = grid.spacing();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * kPi);
    auto Phi = [&](double z) { return 0.5 * std::erfc(-z * inv_sqrt2); };
    auto phi = [&](double z) { return inv_sqrt2pi * std::exp(-0.5 * z * z); };

    // A kernel spanning several cells is integrated by the trapezoid rule,
    // which is spectrally accurate here; narrower kernels integrate the
    // piecewise-linear interpolant of f exactly.
    if (sd >= 4.0 * h) {
        for (int i = 0; i < n; ++i) {
            const double centre = grid[i] - mean_shift;
            const int j_lo = std::max(0, static_cast<int>(std::floor((centre - 12.0 * sd - grid.lo()) / h)));
            const int j_hi = std::min(n - 1, static_cast<int>(std::ceil((centre + 12.0 * sd - grid.lo()) / h)));
            double acc = 0.0;
            for (int j = j_lo; j <= j_hi; ++j) acc += f[j] * phi((grid[j] - centre) / sd);
            out[i] = acc * h / sd;
        }
        return out;
    }

    for (int i = 0; i < n; ++i) {
        const double centre = grid[i] - mean_shift;
        const int j_lo = std::max(0, static_cast<int>(std::floor((centre - 9.0 * sd - grid.lo()) / h)));
        const int j_hi = std::min(n - 2, static_cast<int>(std::ceil((centre + 9.0 * sd - grid.lo()) / h)));
        double acc = 0.0;
        for (int j = j_lo; j <= j_hi; ++j) {
            const double a = grid[j], b = grid[j + 1];
            const double za = (a - centre) / sd, zb = (b - centre) / sd;
            const double slope = (f[j + 1] - f[j]) / h;
            const double mass = Phi(zb) - Phi(za);
            const double first_moment = sd * (phi(za) - phi(zb));
            acc += (f[j] + slope * (centre - a)) * mass + slope * first_moment;
        }
        out[i] = acc;
    }
    return out;
}

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw DomainError("gauss_hermite needs n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        J(i, i - 1) = J(i - 1, i) = std::sqrt(0.5 * i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite out;
    out.nodes.resize(n);
    out.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        out.weights[i] = std::sqrt(kPi) * v0 * v0;
    }
    return out;
}

}  // namespace symtomo
