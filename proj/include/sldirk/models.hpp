#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sldirk/errors.hpp"

namespace sldirk {

/// Discrete velocities with positive quadrature weights; <g> = sum_j w_j g(v_j).
struct VelocitySet {
    std::vector<double> velocities;
    std::vector<double> weights;

    std::size_t size() const { return velocities.size(); }

    double max_speed() const {
        double a = 0.0;
        for (double v : velocities) a = std::max(a, std::abs(v));
        return a;
    }

    /// {+1, -1} with unit weights.
    static VelocitySet two_velocity() { return {{1.0, -1.0}, {1.0, 1.0}}; }

    /// n cell midpoints of [v_min, v_max], each weighted by the cell width.
    static VelocitySet uniform_grid(double v_min, double v_max, std::size_t n) {
        if (n < 1 || !(v_max > v_min)) throw ConfigError("velocity grid needs n >= 1 and v_max > v_min");
        VelocitySet set;
        const double dv = (v_max - v_min) / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            set.velocities.push_back(v_min + (static_cast<double>(j) + 0.5) * dv);
            set.weights.push_back(dv);
        }
        return set;
    }
};

/// Moments U = <f phi> of a distribution at one spatial point.
struct MacroState {
    std::array<double, 3> values{};
    std::size_t count = 1;

    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

/// A relaxation model Q(f) = M_U[<f phi>] - f over a fixed velocity set.
template <typename M>
concept KineticModel = requires(const M& m, std::span<const double> f, const MacroState& u,
                                std::span<double> out, std::size_t i, double v) {
    { m.name() } -> std::convertible_to<std::string>;
    { m.velocity_set() } -> std::same_as<const VelocitySet&>;
    { m.invariant_count() } -> std::convertible_to<std::size_t>;
    { m.invariant(i, v) } -> std::convertible_to<double>;
    { m.moments(f) } -> std::same_as<MacroState>;
    m.equilibrium(u, out);
};

/// Linear two-velocity relaxation system with parameter |b| < 1:
/// M_U = ((1+b)/2 U, (1-b)/2 U), U = f_1 + f_2.
class LinearTwoVelocity {
public:
    explicit LinearTwoVelocity(double b) : b_(b), velocities_(VelocitySet::two_velocity()) {
        if (!(std::abs(b) < 1.0)) throw ConfigError("linear two-velocity model needs |b| < 1");
    }

    std::string name() const { return "linear"; }
    double b() const { return b_; }
    const VelocitySet& velocity_set() const { return velocities_; }
    std::size_t invariant_count() const { return 1; }
    double invariant(std::size_t, double) const { return 1.0; }

    MacroState moments(std::span<const double> f) const { return {{f[0] + f[1], 0.0, 0.0}, 1}; }

    void equilibrium(const MacroState& u, std::span<double> out) const {
        out[0] = 0.5 * (1.0 + b_) * u[0];
        out[1] = 0.5 * (1.0 - b_) * u[0];
    }

private:
    double b_;
    VelocitySet velocities_;
};

/// Two-velocity form of u_t + v_x = 0, v_t + u_x = (b u^2 - v)/eps:
/// f_1 = (u+v)/2, f_2 = (u-v)/2, M_U = ((b u^2 + u)/2, (-b u^2 + u)/2).
class NonlinearTwoVelocity {
public:
    explicit NonlinearTwoVelocity(double b) : b_(b), velocities_(VelocitySet::two_velocity()) {}

    std::string name() const { return "nonlinear"; }
    double b() const { return b_; }
    const VelocitySet& velocity_set() const { return velocities_; }
    std::size_t invariant_count() const { return 1; }
    double invariant(std::size_t, double) const { return 1.0; }

    MacroState moments(std::span<const double> f) const { return {{f[0] + f[1], 0.0, 0.0}, 1}; }

    void equilibrium(const MacroState& u, std::span<double> out) const {
        const double q = b_ * u[0] * u[0];
        out[0] = 0.5 * (q + u[0]);
        out[1] = 0.5 * (-q + u[0]);
    }

private:
    double b_;
    VelocitySet velocities_;
};

/// Primitive variables of a 1D BGK state.
struct Primitive {
    double rho, u, T;
};

/// 1D1V BGK model on a discrete velocity grid, invariants (1, v, v^2/2).
///
/// With `discrete_conservative` (the default) the equilibrium is the
/// Gaussian exp(alpha + beta v + gamma v^2) whose *discrete* moments equal U,
/// found by Newton iteration from the analytic Maxwellian. This makes
/// <(M_U - f) phi> vanish to rounding instead of quadrature error.
class Bgk1D1V {
public:
    explicit Bgk1D1V(VelocitySet grid, bool discrete_conservative = true)
        : grid_(std::move(grid)), conservative_(discrete_conservative) {}

    std::string name() const { return "bgk"; }
    const VelocitySet& velocity_set() const { return grid_; }
    bool discrete_conservative() const { return conservative_; }
    std::size_t invariant_count() const { return 3; }

    double invariant(std::size_t i, double v) const {
        return i == 0 ? 1.0 : (i == 1 ? v : 0.5 * v * v);
    }

    MacroState moments(std::span<const double> f) const {
        MacroState u{{0.0, 0.0, 0.0}, 3};
        for (std::size_t j = 0; j < grid_.size(); ++j) {
            const double v = grid_.velocities[j];
            const double wf = grid_.weights[j] * f[j];
            u[0] += wf;
            u[1] += wf * v;
            u[2] += 0.5 * wf * v * v;
        }
        (void)primitive(u);
        return u;
    }

    /// (rho, u, T) with T = 2E/rho - u^2. Throws on rho <= 0 or T <= 0.
    static Primitive primitive(const MacroState& u) {
        const double rho = u[0];
        if (!(rho > 0.0)) throw ModelError("BGK state with nonpositive density");
        const double vel = u[1] / rho;
        const double T = 2.0 * u[2] / rho - vel * vel;
        if (!(T > 0.0)) throw ModelError("BGK state with nonpositive temperature");
        return {rho, vel, T};
    }

    static MacroState conserved(const Primitive& p) {
        return {{p.rho, p.rho * p.u, 0.5 * p.rho * p.u * p.u + 0.5 * p.rho * p.T}, 3};
    }

    static double maxwellian(const Primitive& p, double v) {
        const double dv = v - p.u;
        return p.rho / std::sqrt(2.0 * std::numbers::pi * p.T) * std::exp(-dv * dv / (2.0 * p.T));
    }

    void equilibrium(const MacroState& u, std::span<double> out) const {
        const Primitive p = primitive(u);
        if (!conservative_) {
            for (std::size_t j = 0; j < grid_.size(); ++j) out[j] = maxwellian(p, grid_.velocities[j]);
            return;
        }
        match_moments(u, p, out);
    }

private:
    void match_moments(const MacroState& target, const Primitive& p, std::span<double> out) const {
        std::array<double, 3> theta{
            std::log(p.rho / std::sqrt(2.0 * std::numbers::pi * p.T)) - p.u * p.u / (2.0 * p.T),
            p.u / p.T, -0.5 / p.T};
        const double scale = std::abs(target[0]) + std::abs(target[1]) + std::abs(target[2]);
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> best_out(out.size());
        for (int it = 0; it < 30; ++it) {
            // J[i][k] = <phi_i psi_k M>, psi = (1, v, v^2) = d(exponent)/d(theta)
            std::array<double, 3> r{target[0], target[1], target[2]};
            std::array<double, 5> pm{};  // <v^n M>, n = 0..4
            for (std::size_t j = 0; j < grid_.size(); ++j) {
                const double v = grid_.velocities[j];
                const double m = std::exp(theta[0] + v * (theta[1] + v * theta[2]));
                out[j] = m;
                double wm = grid_.weights[j] * m;
                for (double& power : pm) {
                    power += wm;
                    wm *= v;
                }
            }
            r[0] -= pm[0];
            r[1] -= pm[1];
            r[2] -= 0.5 * pm[2];
            const double res = std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
            if (res < best) {
                best = res;
                std::copy(out.begin(), out.end(), best_out.begin());
            } else if (res <= 1e-13 * scale) {
                break;  // stagnated at rounding level
            }
            if (res <= 1e-15 * scale) break;
            const std::array<std::array<double, 3>, 3> J{{{pm[0], pm[1], pm[2]},
                                                          {pm[1], pm[2], pm[3]},
                                                          {0.5 * pm[2], 0.5 * pm[3], 0.5 * pm[4]}}};
            const auto delta = solve3(J, r);
            for (int k = 0; k < 3; ++k) theta[k] += delta[k];
            if (!(theta[2] < 0.0)) throw ModelError("BGK equilibrium fit lost a negative quadratic coefficient");
        }
        if (!(best <= 1e-10 * scale)) throw ModelError("BGK equilibrium moment matching did not converge");
        std::copy(best_out.begin(), best_out.end(), out.begin());
    }

    static std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b) {
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r) {
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
            }
            std::swap(a[col], a[piv]);
            std::swap(b[col], b[piv]);
            for (int r = col + 1; r < 3; ++r) {
                const double f = a[r][col] / a[col][col];
                for (int k = col; k < 3; ++k) a[r][k] -= f * a[col][k];
                b[r] -= f * b[col];
            }
        }
        std::array<double, 3> x{};
        for (int r = 2; r >= 0; --r) {
            double s = b[r];
            for (int k = r + 1; k < 3; ++k) s -= a[r][k] * x[k];
            x[r] = s / a[r][r];
        }
        return x;
    }

    VelocitySet grid_;
    bool conservative_;
};

/// Moments of a distribution given by its values over the model's velocities.
template <KineticModel Model>
MacroState moments(const Model& model, std::span<const double> f) {
    return model.moments(f);
}

template <KineticModel Model>
std::vector<double> equilibrium(const Model& model, const MacroState& u) {
    std::vector<double> out(model.velocity_set().size());
    model.equilibrium(u, out);
    return out;
}

/// Q(f)/eps = (M_U[<f phi>] - f)/eps.
template <KineticModel Model>
std::vector<double> relaxation(const Model& model, std::span<const double> f, double eps) {
    if (!(eps > 0.0)) throw ConfigError("relaxation: epsilon must be positive");
    std::vector<double> out = equilibrium(model, model.moments(f));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (out[j] - f[j]) / eps;
    return out;
}

/// <g phi_i> over the model's velocity set.
template <KineticModel Model>
double invariant_moment(const Model& model, std::span<const double> g, std::size_t i) {
    const auto& vs = model.velocity_set();
    double sum = 0.0;
    for (std::size_t j = 0; j < vs.size(); ++j) sum += vs.weights[j] * g[j] * model.invariant(i, vs.velocities[j]);
    return sum;
}

}  // namespace sldirk
