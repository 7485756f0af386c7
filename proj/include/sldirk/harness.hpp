#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "sldirk/butcher.hpp"
#include "sldirk/dg.hpp"
#include "sldirk/errors.hpp"
#include "sldirk/keyvalue.hpp"
#include "sldirk/models.hpp"
#include "sldirk/sl_solver.hpp"
#include "sldirk/stability.hpp"

namespace sldirk {

/// Benchmark problems: linear two-velocity (5.1), nonlinear two-velocity
/// with a Burgers limit (5.2), and 1D1V BGK with a smooth velocity bump (5.3).
enum class Example { Linear, Nonlinear, Bgk };

inline Example parse_example(const std::string& id) {
    if (id == "5.1" || id == "linear") return Example::Linear;
    if (id == "5.2" || id == "nonlinear") return Example::Nonlinear;
    if (id == "5.3" || id == "bgk") return Example::Bgk;
    throw ConfigError("unknown example '" + id + "' (expected 5.1, 5.2 or 5.3)");
}

inline std::string example_id(Example e) {
    switch (e) {
        case Example::Linear: return "5.1";
        case Example::Nonlinear: return "5.2";
        case Example::Bgk: return "5.3";
    }
    return "?";
}

/// Discretization and model parameters. Unset optionals take the example's
/// default.
struct ProblemSettings {
    int nx = 160;
    int degree = 2;
    std::size_t nv = 100;
    double vmax = 15.0;
    std::optional<double> b;
    std::optional<double> t_final;
    bool analytic_maxwellian = false;
};

using AnyModel = std::variant<LinearTwoVelocity, NonlinearTwoVelocity, Bgk1D1V>;

struct Problem {
    Example example;
    AnyModel model;
    std::shared_ptr<const DGSpace> space;
    double t_final;

    const VelocitySet& velocities() const {
        return std::visit([](const auto& m) -> const VelocitySet& { return m.velocity_set(); }, model);
    }
    std::size_t invariant_count() const {
        return std::visit([](const auto& m) { return m.invariant_count(); }, model);
    }
};

inline Problem make_problem(Example example, const ProblemSettings& s) {
    switch (example) {
        case Example::Linear:
            return {example, LinearTwoVelocity(s.b.value_or(0.6)),
                    std::make_shared<const DGSpace>(Mesh1D{0.0, 1.0, s.nx}, s.degree),
                    s.t_final.value_or(0.2)};
        case Example::Nonlinear:
            return {example, NonlinearTwoVelocity(s.b.value_or(0.2)),
                    std::make_shared<const DGSpace>(Mesh1D{0.0, 1.0, s.nx}, s.degree),
                    s.t_final.value_or(0.2)};
        case Example::Bgk:
            return {example,
                    Bgk1D1V(VelocitySet::uniform_grid(-s.vmax, s.vmax, s.nv), !s.analytic_maxwellian),
                    std::make_shared<const DGSpace>(Mesh1D{-1.0, 1.0, s.nx}, s.degree),
                    s.t_final.value_or(0.04)};
    }
    throw ConfigError("unknown example");
}

/// Macroscopic initial state of each example at position x.
inline MacroState initial_macro_state(Example example, double x) {
    switch (example) {
        case Example::Linear:
            return {{std::exp(std::sin(2.0 * std::numbers::pi * x)), 0.0, 0.0}, 1};
        case Example::Nonlinear:
            return {{0.5 * std::exp(std::sin(2.0 * std::numbers::pi * x)), 0.0, 0.0}, 1};
        case Example::Bgk: {
            const double a = 10.0 * x - 1.0, c = 10.0 * x + 3.0;
            const double u0 = 0.1 * (std::exp(-a * a) - 2.0 * std::exp(-c * c));
            return Bgk1D1V::conserved({1.0, u0, 1.0});
        }
    }
    return {};
}

/// Well-prepared initial data: the local equilibrium of the initial moments
/// at every node.
inline DGField initial_field(const Problem& problem) {
    return std::visit(
        [&](const auto& model) {
            const std::size_t nv = model.velocity_set().size();
            DGField f(problem.space, nv);
            const DGSpace& sp = *problem.space;
            const std::size_t n = sp.dofs();
            const int np = sp.nodes_per_element();
            std::vector<double> eq(nv);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = sp.node_x(static_cast<int>(i) / np, static_cast<int>(i) % np);
                model.equilibrium(initial_macro_state(problem.example, x), eq);
                for (std::size_t v = 0; v < nv; ++v) f.values()[v * n + i] = eq[v];
            }
            return f;
        },
        problem.model);
}

struct SimulationOutput {
    DGField final_field;
    DGField macro;
    double dt = 0.0;
    long steps = 0;
    std::vector<Diagnostic> diagnostics;
};

/// Run one example with a given tableau, epsilon and CFL.
inline SimulationOutput simulate(const Problem& problem, const ButcherTableau& tableau, double epsilon,
                                 double cfl, StageUpdate update = StageUpdate::Consistent,
                                 bool record = true, long distance_every = 0) {
    if (!(cfl > 0.0)) throw ConfigError("CFL must be positive");
    return std::visit(
        [&](const auto& model) {
            SlDirkSolver solver(model, tableau, epsilon, update);
            const double dt = cfl * problem.space->mesh().dx() / model.velocity_set().max_speed();
            RunOptions opts{problem.t_final, dt, record, distance_every};
            RunResult r = run(solver, initial_field(problem), opts);
            SimulationOutput out;
            out.macro = macro_field(model, r.final_field);
            out.final_field = std::move(r.final_field);
            out.dt = dt;
            out.steps = r.steps;
            out.diagnostics = std::move(r.diagnostics);
            return out;
        },
        problem.model);
}

/// Least-squares slope of log(error) against log(step), skipping entries
/// that are not finite and positive. NaN with fewer than `min_points`.
inline double fit_slope(std::span<const double> steps, std::span<const double> errors,
                        std::size_t min_points = 3) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < std::min(steps.size(), errors.size()); ++i) {
        if (!(std::isfinite(errors[i]) && errors[i] > 0.0 && steps[i] > 0.0)) continue;
        const double x = std::log(steps[i]), y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < min_points || n < 2) return std::nan("");
    const double nn = static_cast<double>(n);
    return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

enum class ErrorOn { Macro, Distribution };

struct ConvergenceStudy {
    Example example = Example::Linear;
    std::vector<double> epsilons;
    std::vector<double> cfls;
    std::vector<std::string> tableaus;
    double reference_cfl = 0.001;
    ProblemSettings settings;
    ErrorOn error_on = ErrorOn::Macro;
    StageUpdate update = StageUpdate::Consistent;
    unsigned threads = 0;

    void validate() const {
        if (epsilons.empty() || tableaus.empty()) throw ConfigError("study needs epsilons and tableaus");
        if (cfls.size() < 3) throw ConfigError("slope fit needs at least three CFL values");
        for (double c : cfls) {
            if (!(reference_cfl > 0.0 && reference_cfl < c)) {
                throw ConfigError("reference CFL must be positive and below every tested CFL");
            }
        }
        for (double e : epsilons) {
            if (!(e > 0.0)) throw ConfigError("epsilon must be positive");
        }
    }
};

/// Defaults per example: CFL sweeps below 1 for the two-velocity models,
/// larger for BGK; reference CFL 0.001 (two-velocity) or 0.01 (BGK).
inline ConvergenceStudy default_study(Example example, bool paper_scale = false) {
    ConvergenceStudy s;
    s.example = example;
    s.epsilons = {1e-2, 1e-6};
    s.tableaus = {"BE", "DIRK2", "DIRK3-B2", "DIRK3-B10"};
    if (example == Example::Bgk) {
        s.reference_cfl = 0.01;
        s.cfls = {0.5, 1.0, 2.0, 4.0, 8.0};
        if (paper_scale) {
            s.cfls.clear();
            for (int i = 1; i <= 81; ++i) s.cfls.push_back(0.2 * i);
        }
    } else {
        s.reference_cfl = 0.001;
        s.cfls = {0.1, 0.2, 0.4, 0.8};
        if (paper_scale) s.cfls = {0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8, 16.0};
    }
    if (paper_scale) s.settings.nx = 640;
    return s;
}

struct ConvergenceRow {
    std::string tableau;
    double epsilon = 0.0;
    double cfl = 0.0;
    double dt = 0.0;
    double error = 0.0;  // NaN for a failed run
    std::string status;  // "ok" or the failure message
};

struct SlopeSummary {
    std::string tableau;
    double epsilon = 0.0;
    double slope = 0.0;
    std::size_t points = 0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    std::vector<SlopeSummary> slopes;

    const SlopeSummary* find(const std::string& tableau, double epsilon) const {
        for (const auto& s : slopes) {
            if (s.tableau == tableau && s.epsilon == epsilon) return &s;
        }
        return nullptr;
    }
};

/// Run every job on a small pool of threads; job i writes only slot i.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    }
}

/// L1 error of one run against the reference: summed over the macroscopic
/// components, or velocity-weighted over the distribution.
inline double study_error(const Problem& problem, ErrorOn on, const SimulationOutput& run,
                          const SimulationOutput& reference) {
    if (on == ErrorOn::Distribution) {
        return l1_error(run.final_field, reference.final_field, problem.velocities().weights);
    }
    return l1_error(run.macro, reference.macro);
}

inline ConvergenceResult run_convergence(const ConvergenceStudy& study) {
    study.validate();
    const Problem problem = make_problem(study.example, study.settings);
    std::vector<ButcherTableau> tableaus;
    for (const auto& name : study.tableaus) tableaus.push_back(load_tableau(name));

    // Job layout per (tableau, eps): the reference run, then one run per CFL.
    const std::size_t per_pair = study.cfls.size() + 1;
    const std::size_t pairs = tableaus.size() * study.epsilons.size();
    std::vector<std::optional<SimulationOutput>> outputs(pairs * per_pair);
    std::vector<std::string> failures(outputs.size());
    parallel_for(outputs.size(), study.threads, [&](std::size_t job) {
        const std::size_t pair = job / per_pair, slot = job % per_pair;
        const auto& tab = tableaus[pair / study.epsilons.size()];
        const double eps = study.epsilons[pair % study.epsilons.size()];
        const double cfl = slot == 0 ? study.reference_cfl : study.cfls[slot - 1];
        try {
            outputs[job] = simulate(problem, tab, eps, cfl, study.update, false);
        } catch (const std::exception& err) {
            failures[job] = err.what();
        }
    });

    ConvergenceResult result;
    for (std::size_t pair = 0; pair < pairs; ++pair) {
        const auto& tab = tableaus[pair / study.epsilons.size()];
        const double eps = study.epsilons[pair % study.epsilons.size()];
        const auto& ref = outputs[pair * per_pair];
        std::vector<double> dts, errs;
        for (std::size_t i = 0; i < study.cfls.size(); ++i) {
            const std::size_t job = pair * per_pair + i + 1;
            ConvergenceRow row{tab.name, eps, study.cfls[i],
                               study.cfls[i] * problem.space->mesh().dx() / problem.velocities().max_speed(),
                               std::nan(""), "ok"};
            if (!ref) {
                row.status = "reference failed: " + failures[pair * per_pair];
            } else if (!outputs[job]) {
                row.status = failures[job];
            } else {
                row.error = study_error(problem, study.error_on, *outputs[job], *ref);
                if (!std::isfinite(row.error)) row.status = "non-finite error";
            }
            dts.push_back(row.dt);
            errs.push_back(row.error);
            result.rows.push_back(std::move(row));
        }
        std::size_t valid = 0;
        for (double e : errs) valid += (std::isfinite(e) && e > 0.0) ? 1 : 0;
        result.slopes.push_back({tab.name, eps, fit_slope(dts, errs), valid});
    }
    return result;
}

// ------------------------------------------------------------ grid parsing

/// A real with an optional "pi" factor: "2", "1.5pi", "pi", "inf".
inline double parse_scaled_real(std::string_view text) {
    std::string_view t = detail::trim(text);
    double factor = 1.0;
    if (t.size() >= 2 && t.substr(t.size() - 2) == "pi") {
        factor = std::numbers::pi;
        t = t.substr(0, t.size() - 2);
        if (t.empty()) return factor;
    }
    const auto values = parse_reals(t);
    if (values.size() != 1) throw ConfigError("expected one number, got '" + std::string(text) + "'");
    return values.front() * factor;
}

/// Grid specification: comma-separated items, each a value or an inclusive
/// "lo:hi:n" range of n evenly spaced points.
inline std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> grid;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        const std::string_view item = detail::trim(rest.substr(0, comma));
        if (item.empty()) throw ConfigError("empty grid item in '" + std::string(text) + "'");
        if (const auto c1 = item.find(':'); c1 != std::string_view::npos) {
            const auto c2 = item.find(':', c1 + 1);
            if (c2 == std::string_view::npos) throw ConfigError("range must be lo:hi:n");
            const double lo = parse_scaled_real(item.substr(0, c1));
            const double hi = parse_scaled_real(item.substr(c1 + 1, c2 - c1 - 1));
            const double count = parse_scaled_real(item.substr(c2 + 1));
            if (!(count >= 1.0) || count != std::floor(count) || !std::isfinite(lo) || !std::isfinite(hi)) {
                throw ConfigError("bad range '" + std::string(item) + "'");
            }
            const auto n = static_cast<std::size_t>(count);
            for (std::size_t i = 0; i < n; ++i) {
                grid.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
            }
        } else {
            grid.push_back(parse_scaled_real(item));
        }
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return grid;
}

// ---------------------------------------------------------------- CSV output

inline std::string format_real(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_convergence_csv(std::ostream& out, const ConvergenceResult& r) {
    out << "tableau,eps,cfl,dt,error,status\n";
    for (const auto& row : r.rows) {
        out << row.tableau << ',' << format_real(row.epsilon) << ',' << format_real(row.cfl) << ','
            << format_real(row.dt) << ',' << format_real(row.error) << ',' << row.status << '\n';
    }
}

inline void write_slopes_csv(std::ostream& out, const ConvergenceResult& r) {
    out << "tableau,eps,slope,points\n";
    for (const auto& s : r.slopes) {
        out << s.tableau << ',' << format_real(s.epsilon) << ',' << format_real(s.slope) << ','
            << s.points << '\n';
    }
}

inline void write_scan_csv(std::ostream& out, const ScanResult& scan) {
    out << "b,k_dt,xi,lambda1_abs,lambda2_abs,rho\n";
    for (const auto& s : scan.samples) {
        out << format_real(s.point.b) << ',' << format_real(s.point.k_dt) << ',' << format_real(s.point.xi)
            << ',' << format_real(s.lambda1_abs) << ',' << format_real(s.lambda2_abs) << ','
            << format_real(s.rho()) << '\n';
    }
}

/// x-node, v, value for every node and velocity.
inline void write_field_csv(std::ostream& out, const DGField& f, const VelocitySet& vs) {
    out << "x,v,value\n";
    const DGSpace& sp = f.space();
    const int np = sp.nodes_per_element();
    for (std::size_t v = 0; v < f.components(); ++v) {
        const auto vals = f.component(v);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            out << format_real(sp.node_x(static_cast<int>(i) / np, static_cast<int>(i) % np)) << ','
                << format_real(vs.velocities[v]) << ',' << format_real(vals[i]) << '\n';
        }
    }
}

/// x-node, U for two-velocity models; x-node, rho, u, T for BGK.
inline void write_macro_csv(std::ostream& out, const DGField& macro) {
    const DGSpace& sp = macro.space();
    const int np = sp.nodes_per_element();
    const bool bgk = macro.components() == 3;
    out << (bgk ? "x,rho,u,T\n" : "x,U\n");
    for (std::size_t i = 0; i < macro.dofs(); ++i) {
        out << format_real(sp.node_x(static_cast<int>(i) / np, static_cast<int>(i) % np));
        if (bgk) {
            MacroState u{{macro.component(0)[i], macro.component(1)[i], macro.component(2)[i]}, 3};
            const Primitive p = Bgk1D1V::primitive(u);
            out << ',' << format_real(p.rho) << ',' << format_real(p.u) << ',' << format_real(p.T);
        } else {
            out << ',' << format_real(macro.component(0)[i]);
        }
        out << '\n';
    }
}

/// step, t, mass, momentum, energy, equilibrium distance; missing invariants
/// are left empty.
inline void write_diagnostics_csv(std::ostream& out, std::span<const Diagnostic> diags) {
    out << "step,t,mass,momentum,energy,equilibrium_distance\n";
    for (const auto& d : diags) {
        out << d.step << ',' << format_real(d.t);
        for (std::size_t i = 0; i < 3; ++i) {
            out << ',';
            if (i < d.invariants.size()) out << format_real(d.invariants[i]);
        }
        out << ',';
        if (!std::isnan(d.equilibrium_distance)) out << format_real(d.equilibrium_distance);
        out << '\n';
    }
}

}  // namespace sldirk
