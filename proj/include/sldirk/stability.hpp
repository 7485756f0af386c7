#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sldirk/butcher.hpp"
#include "sldirk/errors.hpp"

namespace sldirk {

using complex = std::complex<double>;

/// Dense 2x2 matrix, row-major.
template <typename T>
struct Mat2 {
    std::array<T, 4> m{};

    T& operator()(int i, int j) { return m[2 * i + j]; }
    const T& operator()(int i, int j) const { return m[2 * i + j]; }

    static Mat2 identity() { return Mat2{{T(1), T(0), T(0), T(1)}}; }
    static Mat2 diag(T a, T b) { return Mat2{{a, T(0), T(0), b}}; }

    T trace() const { return m[0] + m[3]; }
    T det() const { return m[0] * m[3] - m[1] * m[2]; }

    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        return Mat2{{x.m[0] + y.m[0], x.m[1] + y.m[1], x.m[2] + y.m[2], x.m[3] + y.m[3]}};
    }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return Mat2{{x.m[0] * y.m[0] + x.m[1] * y.m[2], x.m[0] * y.m[1] + x.m[1] * y.m[3],
                     x.m[2] * y.m[0] + x.m[3] * y.m[2], x.m[2] * y.m[1] + x.m[3] * y.m[3]}};
    }
    friend Mat2 operator*(T s, const Mat2& x) {
        return Mat2{{s * x.m[0], s * x.m[1], s * x.m[2], s * x.m[3]}};
    }
    friend std::array<T, 2> operator*(const Mat2& x, const std::array<T, 2>& v) {
        return {x.m[0] * v[0] + x.m[1] * v[1], x.m[2] * v[0] + x.m[3] * v[1]};
    }
};

using RealMat2 = Mat2<double>;
using ComplexMat2 = Mat2<complex>;

inline ComplexMat2 to_complex(const RealMat2& r) {
    return ComplexMat2{{r.m[0], r.m[1], r.m[2], r.m[3]}};
}

inline constexpr double kInfiniteStiffness = std::numeric_limits<double>::infinity();

/// Point of the linear two-velocity Fourier analysis.
struct StabilityPoint {
    double b = 0.0;     // relaxation parameter, [0, 1]
    double k_dt = 0.0;  // wavenumber times step
    double xi = 0.0;    // dt / epsilon; +inf for the relaxed limit
};

/// Jacobian of the linear two-velocity relaxation, f -> M_U[f] - f.
/// Eigenvalues are 0 and -1 for every b.
inline RealMat2 relaxation_jacobian(double b) {
    return RealMat2{{0.5 * (-1.0 + b), 0.5 * (1.0 + b), 0.5 * (1.0 - b), 0.5 * (-1.0 - b)}};
}

/// (I - a_ll xi Q)^{-1}. At xi = inf this is the projection onto equilibrium.
inline RealMat2 stage_inverse(double a_ll, double xi, double b) {
    if (std::isinf(xi)) {
        const double p = 0.5 * (1.0 + b), q = 0.5 * (1.0 - b);
        return RealMat2{{p, p, q, q}};
    }
    const double z = a_ll * xi;
    const double p = 0.5 * (1.0 + b) * z, q = 0.5 * (1.0 - b) * z;
    const double inv = 1.0 / (1.0 + z);
    return RealMat2{{(1.0 + p) * inv, p * inv, q * inv, (1.0 + q) * inv}};
}

/// diag(e^{-i theta}, e^{+i theta}): transport of the (+1, -1) velocity pair
/// by a shift of theta / k.
inline ComplexMat2 transport_phase(double theta) {
    const complex e = std::polar(1.0, -theta);
    return ComplexMat2::diag(e, std::conj(e));
}

/// Per-stage maps from f^n to f^(l), built with the Shu-Osher recursion
/// M_l = A_l^{-1} [B_l + sum_j C_lj M_j].
inline std::vector<ComplexMat2> stage_amplifications(const ShuOsherForm& so, const StabilityPoint& p) {
    std::vector<ComplexMat2> stages;
    stages.reserve(so.stages);
    for (std::size_t l = 0; l < so.stages; ++l) {
        ComplexMat2 E = complex(1.0 - so.row_sum(l)) * transport_phase(so.c[l] * p.k_dt);
        for (std::size_t j = 0; j < l; ++j) {
            const ComplexMat2 C = complex(so.b(l, j)) * transport_phase((so.c[l] - so.c[j]) * p.k_dt);
            E = E + C * stages[j];
        }
        stages.push_back(to_complex(stage_inverse(so.diag[l], p.xi, p.b)) * E);
    }
    return stages;
}

struct AmplificationMatrix {
    ComplexMat2 matrix;
    std::string tableau;
    StabilityPoint point;
};

inline AmplificationMatrix amplification(const ButcherTableau& t, const ShuOsherForm& so,
                                         const StabilityPoint& p) {
    return {stage_amplifications(so, p).back(), t.name, p};
}

inline AmplificationMatrix amplification(const ButcherTableau& t, const StabilityPoint& p) {
    return amplification(t, to_shu_osher(t), p);
}

/// Both eigenvalues of a 2x2 complex matrix, larger magnitude first.
inline std::array<complex, 2> eigenvalues(const ComplexMat2& m) {
    const complex tr = m.trace();
    const complex det = m.det();
    complex root = std::sqrt(tr * tr - 4.0 * det);
    if (std::real(std::conj(tr) * root) < 0.0) root = -root;
    const complex big = 0.5 * (tr + root);
    const complex small = (big == complex(0.0)) ? complex(0.0) : det / big;
    if (std::abs(small) > std::abs(big)) return {small, big};
    return {big, small};
}

inline double spectral_radius(const ComplexMat2& m) { return std::abs(eigenvalues(m)[0]); }
inline double spectral_radius(const AmplificationMatrix& a) { return spectral_radius(a.matrix); }

struct ScanSample {
    StabilityPoint point;
    double lambda1_abs = 0.0;  // smaller magnitude
    double lambda2_abs = 0.0;  // larger magnitude, equals rho
    double rho() const { return lambda2_abs; }
};

struct ScanResult {
    std::vector<ScanSample> samples;  // ordered b-major, then k_dt, then xi
    std::size_t argmax = 0;

    double max_rho() const { return samples.empty() ? 0.0 : samples[argmax].rho(); }
};

/// Spectral radii over the tensor grid b x k_dt x xi. Points are split
/// across `threads` workers; output order does not depend on the split.
inline ScanResult scan(const ButcherTableau& t, std::span<const double> b_grid,
                       std::span<const double> kdt_grid, std::span<const double> xi_grid,
                       unsigned threads = 0) {
    if (b_grid.empty() || kdt_grid.empty() || xi_grid.empty()) {
        throw ConfigError("stability scan grids must be nonempty");
    }
    const ShuOsherForm so = to_shu_osher(t);
    const std::size_t nk = kdt_grid.size(), nx = xi_grid.size();
    ScanResult result;
    result.samples.resize(b_grid.size() * nk * nx);

    const auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const StabilityPoint p{b_grid[i / (nk * nx)], kdt_grid[(i / nx) % nk], xi_grid[i % nx]};
            const auto ev = eigenvalues(stage_amplifications(so, p).back());
            result.samples[i] = {p, std::abs(ev[1]), std::abs(ev[0])};
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n = result.samples.size();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (result.samples[i].rho() > result.samples[result.argmax].rho()) result.argmax = i;
    }
    return result;
}

/// End of the stable interval [0, k*] in k_dt for fixed b and xi: the first
/// point where rho exceeds 1 + tol, refined by bisection. Returns `kdt_max`
/// when no crossing is found on the sampling grid.
inline double stability_boundary(const ButcherTableau& t, double b, double xi, double kdt_max,
                                 double tol = 1e-12, std::size_t samples = 4000) {
    const ShuOsherForm so = to_shu_osher(t);
    const auto rho = [&](double kdt) {
        return spectral_radius(stage_amplifications(so, {b, kdt, xi}).back());
    };
    double prev = 0.0;
    for (std::size_t i = 1; i <= samples; ++i) {
        const double kdt = kdt_max * static_cast<double>(i) / static_cast<double>(samples);
        if (rho(kdt) > 1.0 + tol) {
            double lo = prev, hi = kdt;
            for (int it = 0; it < 100 && hi - lo > 1e-15 * kdt_max; ++it) {
                const double mid = 0.5 * (lo + hi);
                (rho(mid) > 1.0 + tol ? hi : lo) = mid;
            }
            return lo;
        }
        prev = kdt;
    }
    return kdt_max;
}

}  // namespace sldirk
