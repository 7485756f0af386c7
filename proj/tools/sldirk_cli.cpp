// Command-line front end: order checks, stability scans, single simulations
// and convergence studies.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "sldirk/sldirk.hpp"

namespace {

using namespace sldirk;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    return out;
}

// ------------------------------------------------------------ order-check

void print_order_table(std::ostream& out, const ButcherTableau& t, const OrderReport& rep) {
    const auto& k = rep.kinetic;
    const auto& l = rep.limit;
    out << "tableau " << t.name << " (" << t.stages << " stages)\n\n";
    out << std::setw(5) << "stage";
    for (const char* h : {"c", "d", "g", "h", "C", "D", "B", "G", "H", "B*", "B**", "B***"}) {
        out << std::setw(13) << h;
    }
    out << '\n' << std::setprecision(6);
    for (std::size_t s = 0; s < t.stages; ++s) {
        out << std::setw(5) << s + 1;
        for (double v : {k.c[s], k.d[s], k.g[s], k.h[s], l.C[s], l.D[s], l.B[s], l.G[s], l.H[s], l.Bstar[s],
                         l.Bstarstar[s], l.Bstarstarstar[s]}) {
            out << std::setw(13) << (std::abs(v) < 1e-14 ? 0.0 : v);
        }
        out << '\n';
    }
    out << "\nresiduals at the last stage:\n" << std::setprecision(3);
    for (const auto& [name, r] : rep.residuals) out << "  " << std::setw(9) << name << "  " << r << '\n';
    out << "\nkinetic_order = " << rep.kinetic_order << "\nfluid_order = " << rep.fluid_order << '\n';
    if (rep.kinetic_order == 3 || rep.fluid_order == 3) {
        out << "(order 3 means at least 3: fourth-order conditions are not checked)\n";
    }
}

void write_order_csv(std::ostream& out, const ButcherTableau& t, const OrderReport& rep) {
    const auto& k = rep.kinetic;
    const auto& l = rep.limit;
    out << "tableau,stage,c,d,g,h,C,D,B,G,H,Bstar,Bstarstar,Bstarstarstar,kinetic_order,fluid_order\n";
    for (std::size_t s = 0; s < t.stages; ++s) {
        out << t.name << ',' << s + 1;
        for (double v : {k.c[s], k.d[s], k.g[s], k.h[s], l.C[s], l.D[s], l.B[s], l.G[s], l.H[s], l.Bstar[s],
                         l.Bstarstar[s], l.Bstarstarstar[s]}) {
            out << ',' << format_real(v);
        }
        out << ',' << rep.kinetic_order << ',' << rep.fluid_order << '\n';
    }
}

// ------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string model = "linear";
    std::string tableau = "DIRK3-B10";
    std::string eps = "1e-2";
    double cfl = 0.5;
    int nx = 160;
    int p = 2;
    std::size_t nv = 100;
    double vmax = 15.0;
    double b = -1.0;
    double T = -1.0;
    std::string update = "consistent";
    std::string out = "sim";
    long distance_every = 0;
};

int run_simulate(const SimulateArgs& a) {
    ProblemSettings s;
    s.nx = a.nx;
    s.degree = a.p;
    s.nv = a.nv;
    s.vmax = a.vmax;
    if (a.b >= 0.0) s.b = a.b;
    if (a.T > 0.0) s.t_final = a.T;
    if (s.nx < 1) throw ConfigError("nx must be positive");
    if (s.degree < 0 || s.degree > 4) throw ConfigError("p must lie in 0..4");

    const Problem problem = make_problem(parse_example(a.model), s);
    const ButcherTableau tableau = load_tableau(a.tableau);
    const double eps = parse_scaled_real(a.eps);
    StageUpdate update = StageUpdate::Consistent;
    if (a.update == "as-printed") {
        update = StageUpdate::AsPrinted;
    } else if (a.update != "consistent") {
        throw ConfigError("update must be 'consistent' or 'as-printed'");
    }

    const SimulationOutput r = simulate(problem, tableau, eps, a.cfl, update, true, a.distance_every);
    auto field = open_output(a.out + "_field.csv");
    write_field_csv(field, r.final_field, problem.velocities());
    auto macro = open_output(a.out + "_macro.csv");
    write_macro_csv(macro, r.macro);
    auto diag = open_output(a.out + "_diagnostics.csv");
    write_diagnostics_csv(diag, r.diagnostics);

    const auto& first = r.diagnostics.front().invariants;
    const auto& last = r.diagnostics.back().invariants;
    std::cout << problem.velocities().size() << " velocities, " << problem.space->dofs() << " nodes, dt = "
              << r.dt << ", " << r.steps << " steps\n";
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::cout << "invariant " << i << ": " << std::setprecision(15) << first[i] << " -> " << last[i] << '\n';
    }
    std::cout << "wrote " << a.out << "_{field,macro,diagnostics}.csv\n";
    return 0;
}

// ----------------------------------------------------------- convergence

struct ConvergenceArgs {
    std::string example = "5.1";
    std::string eps;
    std::string tableaus;
    std::string cfls;
    double ref_cfl = 0.0;
    int nx = 0;
    int p = 2;
    std::size_t nv = 100;
    std::string error_on = "U";
    bool paper_scale = false;
    std::string out;
    unsigned threads = 0;
};

std::vector<std::string> split_names(const std::string& list) {
    std::vector<std::string> names;
    std::string item;
    std::istringstream in(list);
    while (std::getline(in, item, ',')) {
        if (const auto t = detail::trim(item); !t.empty()) names.emplace_back(t);
    }
    return names;
}

int run_convergence_cmd(const ConvergenceArgs& a) {
    const Example example = parse_example(a.example);
    ConvergenceStudy study = default_study(example, a.paper_scale);
    if (!a.eps.empty()) study.epsilons = parse_grid(a.eps);
    if (!a.tableaus.empty()) study.tableaus = split_names(a.tableaus);
    if (!a.cfls.empty()) study.cfls = parse_grid(a.cfls);
    if (a.ref_cfl > 0.0) study.reference_cfl = a.ref_cfl;
    if (a.nx > 0) study.settings.nx = a.nx;
    study.settings.degree = a.p;
    study.settings.nv = a.nv;
    study.threads = a.threads;
    if (a.error_on == "f") {
        study.error_on = ErrorOn::Distribution;
    } else if (a.error_on != "U") {
        throw ConfigError("--error-on must be U or f");
    }

    const auto t0 = std::chrono::steady_clock::now();
    const ConvergenceResult r = run_convergence(study);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_convergence_csv(std::cout, r);
    std::cout << '\n';
    write_slopes_csv(std::cout, r);
    std::cout << "# " << r.rows.size() << " runs in " << std::setprecision(3) << seconds << " s\n";
    if (!a.out.empty()) {
        auto rows = open_output(a.out);
        write_convergence_csv(rows, r);
        auto slopes = open_output(a.out + ".slopes.csv");
        write_slopes_csv(slopes, r);
    }
    return 0;
}

// Feed "key = value" lines to the matching --key options that were not
// given on the command line.
void apply_config_file(CLI::App& cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    for (const auto& [key, value] : parse_key_values(in)) {
        CLI::Option* opt = nullptr;
        try {
            opt = cmd.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw ConfigError("unknown config key '" + key + "' in " + path);
        }
        if (key == "config") throw ConfigError("config files cannot nest");
        if (opt->count() > 0) continue;
        opt->add_result(value);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-Lagrangian DIRK schemes for kinetic relaxation models"};
    app.require_subcommand(1);

    // order-check
    std::string order_tableau;
    bool order_csv = false;
    auto* order = app.add_subcommand("order-check", "Kinetic and limit order conditions of a tableau");
    order->add_option("tableau", order_tableau, "Catalog name (BE, DIRK2, DIRK3-B2 ... DIRK3-B10) or tableau file")
        ->required();
    order->add_flag("--csv", order_csv, "Print per-stage coefficients as CSV");

    // stability-scan
    std::string scan_tableau = "BE", scan_b = "0:1:11", scan_kdt = "0:2pi:101", scan_xi = "inf", scan_out;
    unsigned scan_threads = 0;
    auto* stab = app.add_subcommand("stability-scan", "Spectral radius of the linear two-velocity amplification matrix");
    stab->add_option("--tableau", scan_tableau, "Catalog name or tableau file")->capture_default_str();
    stab->add_option("--b", scan_b, "b values: v, lo:hi:n, comma lists")->capture_default_str();
    stab->add_option("--kdt", scan_kdt, "k*dt values; a trailing 'pi' scales by pi")->capture_default_str();
    stab->add_option("--xi", scan_xi, "dt/eps values; 'inf' for the relaxed limit")->capture_default_str();
    stab->add_option("--out", scan_out, "CSV output (b,k_dt,xi,lambda1_abs,lambda2_abs,rho)");
    stab->add_option("--threads", scan_threads, "Worker threads (0 = hardware)");

    // simulate
    SimulateArgs sim;
    auto* simc = app.add_subcommand("simulate", "Run one example and write field, moments and diagnostics");
    std::string sim_config;
    simc->add_option("--config", sim_config, "key = value file with any of the options below; flags win");
    simc->add_option("--model", sim.model, "linear | nonlinear | bgk (or 5.1 | 5.2 | 5.3)")->capture_default_str();
    simc->add_option("--tableau", sim.tableau, "Catalog name or tableau file")->capture_default_str();
    simc->add_option("--eps", sim.eps, "Relaxation time epsilon; 'inf' switches relaxation off")->capture_default_str();
    simc->add_option("--cfl", sim.cfl, "dt = CFL dx / max|v|")->capture_default_str();
    simc->add_option("--nx", sim.nx, "Elements")->capture_default_str();
    simc->add_option("--p", sim.p, "DG degree, 0..4")->capture_default_str();
    simc->add_option("--nv", sim.nv, "BGK velocity points")->capture_default_str();
    simc->add_option("--vmax", sim.vmax, "BGK velocity bound")->capture_default_str();
    simc->add_option("--b", sim.b, "Two-velocity parameter b (default 0.6 linear, 0.2 nonlinear)");
    simc->add_option("--T", sim.T, "Final time (default per example)");
    simc->add_option("--update", sim.update, "Stage closure: consistent | as-printed")->capture_default_str();
    simc->add_option("--distance-every", sim.distance_every, "Record distance to equilibrium every n steps");
    simc->add_option("--out", sim.out, "Output prefix")->capture_default_str();

    // convergence
    ConvergenceArgs conv;
    auto* convc = app.add_subcommand("convergence", "L1 error against a small-CFL reference, with fitted slopes");
    convc->add_option("--example", conv.example, "5.1 | 5.2 | 5.3")->capture_default_str();
    convc->add_option("--eps", conv.eps, "Epsilon list (default 1e-2,1e-6)");
    convc->add_option("--tableaus", conv.tableaus, "Comma-separated tableau names (default BE,DIRK2,DIRK3-B2,DIRK3-B10)");
    convc->add_option("--cfls", conv.cfls, "CFL list or lo:hi:n range");
    convc->add_option("--ref-cfl", conv.ref_cfl, "Reference CFL (default 0.001, or 0.01 for 5.3)");
    convc->add_option("--nx", conv.nx, "Elements (default 160, 640 with --paper-scale)");
    convc->add_option("--p", conv.p, "DG degree")->capture_default_str();
    convc->add_option("--nv", conv.nv, "BGK velocity points")->capture_default_str();
    convc->add_option("--error-on", conv.error_on, "U (moments) or f (distribution)")->capture_default_str();
    convc->add_flag("--paper-scale", conv.paper_scale, "N_x = 640 and the long CFL sweep");
    convc->add_option("--out", conv.out, "Rows CSV path; slopes go to <out>.slopes.csv");
    convc->add_option("--threads", conv.threads, "Worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simc && !sim_config.empty()) apply_config_file(*simc, sim_config);
        if (*order) {
            const ButcherTableau t = load_tableau(order_tableau);
            const OrderReport rep = order_report(t);
            if (order_csv) {
                write_order_csv(std::cout, t, rep);
            } else {
                print_order_table(std::cout, t, rep);
            }
            return 0;
        }
        if (*stab) {
            const ButcherTableau t = load_tableau(scan_tableau);
            const auto b = parse_grid(scan_b), kdt = parse_grid(scan_kdt), xi = parse_grid(scan_xi);
            for (double v : b) {
                if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("b must lie in [0, 1]");
            }
            for (double v : xi) {
                if (!(v >= 0.0)) throw ConfigError("xi must be nonnegative");
            }
            const ScanResult r = scan(t, b, kdt, xi, scan_threads);
            if (!scan_out.empty()) {
                auto out = open_output(scan_out);
                write_scan_csv(out, r);
            } else {
                write_scan_csv(std::cout, r);
            }
            const auto& worst = r.samples[r.argmax];
            std::cerr << r.samples.size() << " points, max rho = " << std::setprecision(15) << r.max_rho()
                      << " at b = " << worst.point.b << ", k_dt = " << worst.point.k_dt
                      << ", xi = " << worst.point.xi << '\n';
            return 0;
        }
        if (*simc) return run_simulate(sim);
        if (*convc) return run_convergence_cmd(conv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
