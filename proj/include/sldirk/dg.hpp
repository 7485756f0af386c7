#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sldirk/errors.hpp"

namespace sldirk {

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one point");
        for (int i = 0; i < n; ++i) {
            double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 1.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        if (n % 2 == 1) nodes[n / 2] = 0.0;
    }

    std::size_t size() const { return nodes.size(); }
};

/// Uniform periodic mesh of [x_lo, x_hi].
struct Mesh1D {
    double x_lo = 0.0;
    double x_hi = 1.0;
    int elements = 1;

    double dx() const { return (x_hi - x_lo) / elements; }
    double length() const { return x_hi - x_lo; }
};

/// Nodal DG space of degree p on a periodic mesh: p+1 Gauss-Legendre nodes
/// per element, Lagrange basis through them.
class DGSpace {
public:
    DGSpace(Mesh1D mesh, int degree) : mesh_(mesh), degree_(degree), rule_(degree + 1) {
        if (mesh.elements < 1) throw ConfigError("mesh needs at least one element");
        if (!(mesh.x_hi > mesh.x_lo)) throw ConfigError("mesh domain must have positive length");
        if (degree < 0 || degree > 4) throw ConfigError("DG degree must be in 0..4");
    }

    const Mesh1D& mesh() const { return mesh_; }
    int degree() const { return degree_; }
    int nodes_per_element() const { return degree_ + 1; }
    int elements() const { return mesh_.elements; }
    std::size_t dofs() const { return static_cast<std::size_t>(mesh_.elements) * (degree_ + 1); }
    const GaussLegendre& rule() const { return rule_; }

    /// Physical coordinate of node i of element e.
    double node_x(int e, int i) const {
        return mesh_.x_lo + (e + 0.5 * (rule_.nodes[i] + 1.0)) * mesh_.dx();
    }

    /// Lagrange basis function j at reference coordinate xi.
    double basis(int j, double xi) const {
        double v = 1.0;
        for (int m = 0; m <= degree_; ++m) {
            if (m != j) v *= (xi - rule_.nodes[m]) / (rule_.nodes[j] - rule_.nodes[m]);
        }
        return v;
    }

    /// Evaluate the polynomial with the given nodal values at reference xi.
    double evaluate(std::span<const double> nodal, double xi) const {
        double v = 0.0;
        for (int j = 0; j <= degree_; ++j) v += nodal[j] * basis(j, xi);
        return v;
    }

    /// Evaluate a single-component field (dofs() values) at physical x,
    /// wrapped periodically.
    double evaluate_at(std::span<const double> values, double x) const {
        const double dx = mesh_.dx();
        double rel = std::fmod(x - mesh_.x_lo, mesh_.length());
        if (rel < 0.0) rel += mesh_.length();
        int e = std::min(static_cast<int>(rel / dx), mesh_.elements - 1);
        const double xi = 2.0 * (rel - e * dx) / dx - 1.0;
        return evaluate(values.subspan(static_cast<std::size_t>(e) * (degree_ + 1), degree_ + 1), xi);
    }

private:
    Mesh1D mesh_;
    int degree_;
    GaussLegendre rule_;
};

/// Piecewise-polynomial phase-space field: one DG function per velocity.
/// Storage is component-major: [component][element][node].
class DGField {
public:
    DGField() = default;
    DGField(std::shared_ptr<const DGSpace> space, std::size_t components)
        : space_(std::move(space)), components_(components),
          values_(components * space_->dofs(), 0.0) {}

    const DGSpace& space() const { return *space_; }
    const std::shared_ptr<const DGSpace>& space_ptr() const { return space_; }
    std::size_t components() const { return components_; }
    std::size_t dofs() const { return space_->dofs(); }

    std::span<double> component(std::size_t c) {
        return std::span<double>(values_).subspan(c * dofs(), dofs());
    }
    std::span<const double> component(std::size_t c) const {
        return std::span<const double>(values_).subspan(c * dofs(), dofs());
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool same_layout(const DGField& other) const {
        return components_ == other.components_ && space_ && other.space_ &&
               space_->elements() == other.space_->elements() &&
               space_->degree() == other.space_->degree() &&
               space_->mesh().x_lo == other.space_->mesh().x_lo &&
               space_->mesh().x_hi == other.space_->mesh().x_hi;
    }

    /// Nodal interpolation of fn(component, x).
    template <typename Fn>
    void interpolate(Fn&& fn) {
        const int np = space_->nodes_per_element();
        for (std::size_t c = 0; c < components_; ++c) {
            auto out = component(c);
            for (int e = 0; e < space_->elements(); ++e) {
                for (int i = 0; i < np; ++i) out[e * np + i] = fn(c, space_->node_x(e, i));
            }
        }
    }

    /// Integral over the domain of one component.
    double integral(std::size_t c) const {
        const auto& w = space_->rule().weights;
        const int np = space_->nodes_per_element();
        const auto vals = component(c);
        double sum = 0.0;
        for (int e = 0; e < space_->elements(); ++e) {
            double local = 0.0;
            for (int i = 0; i < np; ++i) local += w[i] * vals[e * np + i];
            sum += local;
        }
        return 0.5 * space_->mesh().dx() * sum;
    }

private:
    std::shared_ptr<const DGSpace> space_;
    std::size_t components_ = 0;
    std::vector<double> values_;
};

/// L2 projection onto the DG space of x -> u(x - shift), for u in the same
/// space. The shifted cell overlaps at most two source cells, so the operator
/// is a pair of (p+1)x(p+1) blocks and an integer cell offset:
///
///   out_e = left * in_{e-m-1} + right * in_{e-m},   shift = (m + theta) dx.
///
/// Each block entry is integrated exactly with a (p+1)-point Gauss rule on
/// its overlap segment, so total mass is preserved to rounding.
class RemapOperator {
public:
    RemapOperator(const DGSpace& space, double shift) : np_(space.nodes_per_element()) {
        const double ratio = shift / space.mesh().dx();
        const double whole = std::floor(ratio);
        theta_ = ratio - whole;
        offset_ = static_cast<long>(whole);
        // Snap fractions within rounding of a cell edge, so aligned shifts
        // such as 3 * dx stay exact copies.
        if (theta_ >= 1.0 - 1e-12) {
            theta_ = 0.0;
            ++offset_;
        } else if (theta_ <= 1e-12) {
            theta_ = 0.0;
        }
        left_.assign(np_ * np_, 0.0);
        right_.assign(np_ * np_, 0.0);
        if (theta_ == 0.0) {
            for (int i = 0; i < np_; ++i) right_[i * np_ + i] = 1.0;
            return;
        }
        const auto& rule = space.rule();
        const auto& w = rule.weights;
        const double split = -1.0 + 2.0 * theta_;
        // Target segment [split, 1] reads source cell e-m at xi - 2 theta;
        // target segment [-1, split] reads source cell e-m-1 at xi - 2 theta + 2.
        const auto fill = [&](std::vector<double>& block, double lo, double hi, double src_offset) {
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double xi = mid + half * rule.nodes[q];
                const double wq = half * rule.weights[q];
                for (int i = 0; i < np_; ++i) {
                    const double ti = space.basis(i, xi) * wq / w[i];
                    for (int j = 0; j < np_; ++j) {
                        block[i * np_ + j] += ti * space.basis(j, xi + src_offset);
                    }
                }
            }
        };
        fill(right_, split, 1.0, -2.0 * theta_);
        fill(left_, -1.0, split, 2.0 - 2.0 * theta_);
    }

    bool aligned() const { return theta_ == 0.0; }
    long cell_offset() const { return offset_; }
    double fraction() const { return theta_; }

    /// out must not alias in.
    void apply(std::span<const double> in, std::span<double> out) const {
        const long n = static_cast<long>(in.size()) / np_;
        const auto wrap = [n](long e) { return ((e % n) + n) % n; };
        for (long e = 0; e < n; ++e) {
            const double* src_r = in.data() + wrap(e - offset_) * np_;
            double* dst = out.data() + e * np_;
            if (theta_ == 0.0) {
                std::copy(src_r, src_r + np_, dst);
                continue;
            }
            const double* src_l = in.data() + wrap(e - offset_ - 1) * np_;
            for (int i = 0; i < np_; ++i) {
                double acc = 0.0;
                for (int j = 0; j < np_; ++j) {
                    acc += left_[i * np_ + j] * src_l[j] + right_[i * np_ + j] * src_r[j];
                }
                dst[i] = acc;
            }
        }
    }

    /// out += scale * remap(in).
    void apply_add(std::span<const double> in, double scale, std::span<double> out) const {
        const long n = static_cast<long>(in.size()) / np_;
        const auto wrap = [n](long e) { return ((e % n) + n) % n; };
        for (long e = 0; e < n; ++e) {
            const double* src_r = in.data() + wrap(e - offset_) * np_;
            const double* src_l = in.data() + wrap(e - offset_ - 1) * np_;
            double* dst = out.data() + e * np_;
            for (int i = 0; i < np_; ++i) {
                double acc = 0.0;
                if (theta_ == 0.0) {
                    acc = src_r[i];
                } else {
                    for (int j = 0; j < np_; ++j) {
                        acc += left_[i * np_ + j] * src_l[j] + right_[i * np_ + j] * src_r[j];
                    }
                }
                dst[i] += scale * acc;
            }
        }
    }

private:
    int np_;
    long offset_ = 0;
    double theta_ = 0.0;
    std::vector<double> left_, right_;
};

/// Semi-Lagrangian transport of every component c by velocity v_c over time
/// tau: out_c(x) = P[in_c(x - v_c tau)]. tau may be negative.
inline DGField advect(const DGField& field, std::span<const double> velocities, double tau) {
    if (velocities.size() != field.components()) {
        throw ConfigError("advect: one velocity per field component required");
    }
    DGField out(field.space_ptr(), field.components());
    for (std::size_t c = 0; c < field.components(); ++c) {
        if (tau == 0.0 || velocities[c] == 0.0) {
            std::ranges::copy(field.component(c), out.component(c).begin());
            continue;
        }
        RemapOperator(field.space(), velocities[c] * tau).apply(field.component(c), out.component(c));
    }
    return out;
}

/// Single-velocity convenience overload: every component moves with v.
inline DGField advect(const DGField& field, double v, double tau) {
    const std::vector<double> velocities(field.components(), v);
    return advect(field, velocities, tau);
}

/// Number of Gauss points per element used by the L1 norms; the integrand
/// |a - b| is only piecewise smooth so we over-integrate.
inline int l1_quadrature_points(const DGSpace& space) { return std::max(2 * space.degree() + 4, 6); }

/// Integral of |a_c(x) - b_c(x)| over the domain, summed over components with
/// the given weights (all ones if empty).
inline double l1_error(const DGField& a, const DGField& b, std::span<const double> weights = {}) {
    if (!a.same_layout(b)) throw ConfigError("l1_error: fields live on different discretizations");
    if (!weights.empty() && weights.size() != a.components()) {
        throw ConfigError("l1_error: one weight per component required");
    }
    const DGSpace& space = a.space();
    const GaussLegendre rule(l1_quadrature_points(space));
    const int np = space.nodes_per_element();
    std::vector<double> table(rule.size() * np);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        for (int j = 0; j < np; ++j) table[q * np + j] = space.basis(j, rule.nodes[q]);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < a.components(); ++c) {
        const auto va = a.component(c), vb = b.component(c);
        double sum = 0.0;
        for (int e = 0; e < space.elements(); ++e) {
            for (std::size_t q = 0; q < rule.size(); ++q) {
                double diff = 0.0;
                for (int j = 0; j < np; ++j) diff += table[q * np + j] * (va[e * np + j] - vb[e * np + j]);
                sum += rule.weights[q] * std::abs(diff);
            }
        }
        total += (weights.empty() ? 1.0 : weights[c]) * sum;
    }
    return 0.5 * space.mesh().dx() * total;
}

/// Integral of |a_c(x) - exact(c, x)|, summed over components.
inline double l1_error(const DGField& a, const std::function<double(std::size_t, double)>& exact) {
    const DGSpace& space = a.space();
    const GaussLegendre rule(l1_quadrature_points(space));
    const int np = space.nodes_per_element();
    const double dx = space.mesh().dx();
    double total = 0.0;
    for (std::size_t c = 0; c < a.components(); ++c) {
        const auto va = a.component(c);
        for (int e = 0; e < space.elements(); ++e) {
            const auto local = va.subspan(static_cast<std::size_t>(e) * np, np);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double x = space.mesh().x_lo + (e + 0.5 * (rule.nodes[q] + 1.0)) * dx;
                total += rule.weights[q] * std::abs(space.evaluate(local, rule.nodes[q]) - exact(c, x));
            }
        }
    }
    return 0.5 * dx * total;
}

}  // namespace sldirk
