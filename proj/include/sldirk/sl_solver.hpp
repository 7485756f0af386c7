#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sldirk/butcher.hpp"
#include "sldirk/dg.hpp"
#include "sldirk/errors.hpp"
#include "sldirk/models.hpp"

namespace sldirk {

/// How the implicit relaxation closes at each stage.
enum class StageUpdate {
    /// f^(k) = (eps f* + a_kk dt M*) / (eps + a_kk dt), consistent with the
    /// DIRK stage equation.
    Consistent,
    /// f^(k) = (eps f* + dt M*) / (eps + dt), as printed in the original
    /// description of the nodal SL-DG scheme. Only for comparison runs.
    AsPrinted,
};

struct SimConfig {
    ButcherTableau tableau;
    double cfl = 0.5;
    double epsilon = 1e-2;  // +inf switches relaxation off
    double t_final = 0.2;
    Mesh1D mesh;
    int degree = 2;
    StageUpdate update = StageUpdate::Consistent;

    /// dt = CFL dx / a, a the largest transport speed.
    double time_step(const VelocitySet& velocities) const {
        return cfl * mesh.dx() / velocities.max_speed();
    }

    void validate() const {
        if (!(cfl > 0.0)) throw ConfigError("CFL must be positive");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (!(t_final > 0.0)) throw ConfigError("final time must be positive");
        if (const auto report = validate_tableau(tableau); !report.empty()) {
            throw ConfigError("invalid tableau '" + tableau.name + "': " + report.front());
        }
    }
};

/// Nodal moments of a phase-space field: one DG component per invariant.
template <KineticModel Model>
DGField macro_field(const Model& model, const DGField& f) {
    const std::size_t nv = f.components(), n = f.dofs(), K = model.invariant_count();
    DGField out(f.space_ptr(), K);
    std::vector<double> local(nv);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nv; ++j) local[j] = f.values()[j * n + i];
        const MacroState u = model.moments(local);
        for (std::size_t k = 0; k < K; ++k) out.values()[k * n + i] = u[k];
    }
    return out;
}

/// Domain totals of each collision invariant, integral of <f phi_i> dx.
template <KineticModel Model>
std::vector<double> invariant_totals(const Model& model, const DGField& f) {
    const auto& vs = model.velocity_set();
    std::vector<double> totals(model.invariant_count(), 0.0);
    for (std::size_t j = 0; j < vs.size(); ++j) {
        const double mass = vs.weights[j] * f.integral(j);
        for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += mass * model.invariant(i, vs.velocities[j]);
    }
    return totals;
}

/// Equilibrium projection M_U[<f phi>] at every node.
template <KineticModel Model>
DGField equilibrium_field(const Model& model, const DGField& f) {
    const std::size_t nv = f.components(), n = f.dofs();
    DGField out(f.space_ptr(), nv);
    std::vector<double> local(nv), eq(nv);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nv; ++j) local[j] = f.values()[j * n + i];
        model.equilibrium(model.moments(local), eq);
        for (std::size_t j = 0; j < nv; ++j) out.values()[j * n + i] = eq[j];
    }
    return out;
}

/// L1 distance, velocity-weighted, of f from its local equilibrium.
template <KineticModel Model>
double equilibrium_distance(const Model& model, const DGField& f) {
    return l1_error(f, equilibrium_field(model, f), model.velocity_set().weights);
}

/// Semi-Lagrangian DIRK integrator for f_t + v f_x = (M_U[f] - f)/eps.
///
/// Each stage predicts by transporting f^n and the earlier relaxation
/// increments along characteristics, then closes the implicit relaxation
/// pointwise: the moments of f^(k) equal those of the prediction, so the
/// equilibrium is known before f^(k) is.
template <KineticModel Model>
class SlDirkSolver {
public:
    SlDirkSolver(Model model, ButcherTableau tableau, double epsilon,
                 StageUpdate update = StageUpdate::Consistent)
        : model_(std::move(model)), tableau_(std::move(tableau)), epsilon_(epsilon), update_(update) {
        if (!(epsilon_ > 0.0)) throw ConfigError("epsilon must be positive");
        if (const auto report = validate_tableau(tableau_); !report.empty()) {
            throw ConfigError("invalid tableau '" + tableau_.name + "': " + report.front());
        }
    }

    const Model& model() const { return model_; }
    const ButcherTableau& tableau() const { return tableau_; }
    double epsilon() const { return epsilon_; }

    struct Stage {
        DGField value;      // f^(k)
        DGField increment;  // (dt/eps) (M^(k) - f^(k))
    };

    /// Stage k (zero-based) from f^n and the increments of stages 0..k-1.
    Stage dirk_stage(const DGField& fn, std::span<const Stage> previous, std::size_t k, double dt) const {
        const auto& vs = model_.velocity_set();
        const std::size_t nv = vs.size();
        if (fn.components() != nv) throw ConfigError("field components must match the velocity set");
        const double ck = tableau_.c[k];

        DGField predicted(fn.space_ptr(), nv);
        for (std::size_t v = 0; v < nv; ++v) {
            const double vel = vs.velocities[v];
            auto out = predicted.component(v);
            RemapOperator(fn.space(), vel * ck * dt).apply(fn.component(v), out);
            for (std::size_t j = 0; j < k; ++j) {
                const double akj = tableau_.a(k, j);
                if (akj == 0.0) continue;
                RemapOperator(fn.space(), vel * (ck - tableau_.c[j]) * dt)
                    .apply_add(previous[j].increment.component(v), akj, out);
            }
        }

        // Implicit closure: f = (1 - w) f* + w M*, increment = gamma (M* - f*).
        const double alpha = update_ == StageUpdate::Consistent ? tableau_.a(k, k) : 1.0;
        double w = 0.0, gamma = 0.0;
        if (!std::isinf(epsilon_)) {
            w = alpha * dt / (epsilon_ + alpha * dt);
            gamma = dt / (epsilon_ + alpha * dt);
        }
        Stage stage{DGField(fn.space_ptr(), nv), DGField(fn.space_ptr(), nv)};
        const std::size_t n = fn.dofs();
        const int np = fn.space().nodes_per_element();
        std::vector<double> local(nv), eq(nv);
        auto& pv = predicted.values();
        auto& sv = stage.value.values();
        auto& iv = stage.increment.values();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t v = 0; v < nv; ++v) local[v] = pv[v * n + i];
            try {
                model_.equilibrium(model_.moments(local), eq);
            } catch (const ModelError& err) {
                throw ModelError(std::string(err.what()) + " at x = " +
                                 std::to_string(fn.space().node_x(static_cast<int>(i) / np,
                                                                  static_cast<int>(i) % np)) +
                                 ", stage " + std::to_string(k + 1));
            }
            for (std::size_t v = 0; v < nv; ++v) {
                const double diff = eq[v] - local[v];
                sv[v * n + i] = local[v] + w * diff;
                iv[v * n + i] = gamma * diff;
            }
        }
        return stage;
    }

    /// One step of size dt; the result is the last stage.
    DGField step(const DGField& fn, double dt) const {
        std::vector<Stage> stages;
        stages.reserve(tableau_.stages);
        for (std::size_t k = 0; k < tableau_.stages; ++k) {
            stages.push_back(dirk_stage(fn, stages, k, dt));
        }
        return std::move(stages.back().value);
    }

private:
    Model model_;
    ButcherTableau tableau_;
    double epsilon_;
    StageUpdate update_;
};

struct Diagnostic {
    long step = 0;
    double t = 0.0;
    std::vector<double> invariants;
    double equilibrium_distance = 0.0;  // NaN when not sampled
};

struct RunOptions {
    double t_final = 0.2;
    double dt = 1e-3;
    /// Record invariants every step; equilibrium distance every
    /// `distance_every` steps (0 = never).
    bool record_invariants = true;
    long distance_every = 0;
};

struct RunResult {
    DGField final_field;
    long steps = 0;
    std::vector<Diagnostic> diagnostics;
};

/// March from t = 0 to t_final with a fixed step, shrinking the last one to
/// land on t_final. Aborts with DivergenceError on non-finite values.
template <KineticModel Model>
RunResult run(const SlDirkSolver<Model>& solver, DGField initial, const RunOptions& opts) {
    if (!(opts.t_final > 0.0)) throw ConfigError("final time must be positive");
    if (!(opts.dt > 0.0)) throw ConfigError("time step must be positive");
    long full = static_cast<long>(std::floor(opts.t_final / opts.dt * (1.0 + 1e-12)));
    const double remainder = opts.t_final - static_cast<double>(full) * opts.dt;
    const bool partial = remainder > 1e-12 * opts.t_final;
    const long total = full + (partial ? 1 : 0);

    RunResult result;
    const auto record = [&](long step, double t, const DGField& f) {
        if (!opts.record_invariants) return;
        Diagnostic d{step, t, invariant_totals(solver.model(), f), std::nan("")};
        if (opts.distance_every > 0 && step % opts.distance_every == 0) {
            d.equilibrium_distance = equilibrium_distance(solver.model(), f);
        }
        result.diagnostics.push_back(std::move(d));
    };

    DGField f = std::move(initial);
    record(0, 0.0, f);
    for (long n = 1; n <= total; ++n) {
        const double dt = (partial && n == total) ? remainder : opts.dt;
        f = solver.step(f, dt);
        for (double x : f.values()) {
            if (!std::isfinite(x)) {
                throw DivergenceError("non-finite solution at step " + std::to_string(n), n);
            }
        }
        const double t = (partial && n == total) ? opts.t_final : static_cast<double>(n) * opts.dt;
        record(n, t, f);
    }
    result.final_field = std::move(f);
    result.steps = total;
    return result;
}

}  // namespace sldirk
