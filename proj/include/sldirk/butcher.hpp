#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sldirk/errors.hpp"
#include "sldirk/keyvalue.hpp"

namespace sldirk {

/// Coefficients (A, b, c) of an s-stage diagonally implicit Runge-Kutta method.
/// Indices are zero-based; A is stored row-major.
struct ButcherTableau {
    std::string name;
    std::size_t stages = 0;
    std::vector<double> A;
    std::vector<double> c;
    std::vector<double> b;
    bool stiffly_accurate = true;

    ButcherTableau() = default;
    ButcherTableau(std::string name_, std::size_t s) : name(std::move(name_)), stages(s),
        A(s * s, 0.0), c(s, 0.0), b(s, 0.0) {}

    double a(std::size_t k, std::size_t j) const { return A[k * stages + j]; }
    double& a(std::size_t k, std::size_t j) { return A[k * stages + j]; }

    /// Fill c with the row sums of A and b with the last row (SA closure).
    void close_stiffly_accurate() {
        for (std::size_t k = 0; k < stages; ++k) {
            double sum = 0.0;
            for (std::size_t j = 0; j <= k; ++j) sum += a(k, j);
            c[k] = sum;
        }
        for (std::size_t j = 0; j < stages; ++j) b[j] = a(stages - 1, j);
        stiffly_accurate = true;
    }
};

inline constexpr double kTableauTolerance = 1e-12;

/// Violated invariants of a tableau, one human-readable line each.
/// Empty means valid.
inline std::vector<std::string> validate_tableau(const ButcherTableau& t,
                                                 double tol = kTableauTolerance) {
    std::vector<std::string> report;
    const std::size_t s = t.stages;
    if (s == 0) {
        report.emplace_back("stage count must be at least 1");
        return report;
    }
    if (t.A.size() != s * s || t.c.size() != s || t.b.size() != s) {
        report.emplace_back("dimension mismatch between stages and A/b/c");
        return report;
    }
    for (double x : t.A) {
        if (!std::isfinite(x)) {
            report.emplace_back("non-finite entry in A");
            return report;
        }
    }
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t j = k + 1; j < s; ++j) {
            if (t.a(k, j) != 0.0) {
                report.push_back("not lower triangular: a(" + std::to_string(k + 1) + "," +
                                 std::to_string(j + 1) + ") != 0");
            }
        }
        if (!(t.a(k, k) > 0.0)) {
            report.push_back("nonpositive diagonal at stage " + std::to_string(k + 1));
        }
        double row = 0.0;
        for (std::size_t j = 0; j <= k; ++j) row += t.a(k, j);
        if (std::abs(row - t.c[k]) > tol) {
            report.push_back("row sum differs from c at stage " + std::to_string(k + 1));
        }
    }
    if (t.stiffly_accurate) {
        if (std::abs(t.c[s - 1] - 1.0) > tol) {
            report.emplace_back("stiffly accurate tableau requires c_s = 1");
        }
        for (std::size_t j = 0; j < s; ++j) {
            if (std::abs(t.a(s - 1, j) - t.b[j]) > tol) {
                report.push_back("stiffly accurate tableau requires b = last row of A (entry " +
                                 std::to_string(j + 1) + ")");
            }
        }
    }
    return report;
}

/// Shu-Osher form of a DIRK: each stage is a combination of f^n and earlier
/// stages plus one implicit increment a_kk * dt * Q(f^(k)).
struct ShuOsherForm {
    std::size_t stages = 0;
    std::vector<double> coeffs;  // b_kj, row-major, nonzero only for k > j
    std::vector<double> diag;    // a_kk
    std::vector<double> c;

    double b(std::size_t k, std::size_t j) const { return coeffs[k * stages + j]; }

    /// Sum over j < k of b_kj.
    double row_sum(std::size_t k) const {
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += b(k, j);
        return sum;
    }
};

/// b_kj = a_kj / a_jj - sum_{l=j+1}^{k-1} a_kl b_lj / a_ll, filled for j = k-1 down to 0.
inline ShuOsherForm to_shu_osher(const ButcherTableau& t) {
    const std::size_t s = t.stages;
    for (std::size_t k = 0; k < s; ++k) {
        if (!(t.a(k, k) > 0.0)) {
            throw ConfigError("Shu-Osher form requires a positive diagonal (stage " +
                              std::to_string(k + 1) + ")");
        }
    }
    ShuOsherForm so;
    so.stages = s;
    so.coeffs.assign(s * s, 0.0);
    so.diag.resize(s);
    so.c = t.c;
    for (std::size_t k = 0; k < s; ++k) {
        so.diag[k] = t.a(k, k);
        for (std::size_t jj = k; jj-- > 0;) {
            double value = t.a(k, jj) / t.a(jj, jj);
            for (std::size_t l = jj + 1; l < k; ++l) {
                value -= t.a(k, l) * so.coeffs[l * s + jj] / t.a(l, l);
            }
            so.coeffs[k * s + jj] = value;
        }
    }
    return so;
}

/// Real root near 0.4359 of 6g^3 - 18g^2 + 9g - 1, the diagonal of the
/// classical L-stable three-stage DIRK3.
inline double alexander_gamma() {
    double g = 0.4358665215;
    for (int it = 0; it < 50; ++it) {
        const double f = ((6.0 * g - 18.0) * g + 9.0) * g - 1.0;
        const double df = (18.0 * g - 36.0) * g + 9.0;
        const double step = f / df;
        g -= step;
        if (std::abs(step) < 1e-17) break;
    }
    return g;
}

namespace detail {

inline ButcherTableau make_tableau(std::string name, std::size_t s,
                                   std::initializer_list<double> lower_rows) {
    ButcherTableau t(std::move(name), s);
    auto it = lower_rows.begin();
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t j = 0; j <= k; ++j) t.a(k, j) = *it++;
    }
    t.close_stiffly_accurate();
    return t;
}

/// Same as make_tableau but keeps the printed abscissae instead of row sums.
inline ButcherTableau make_tableau(std::string name, std::size_t s,
                                   std::initializer_list<double> lower_rows,
                                   std::initializer_list<double> abscissae) {
    ButcherTableau t = make_tableau(std::move(name), s, lower_rows);
    std::copy(abscissae.begin(), abscissae.end(), t.c.begin());
    return t;
}

inline std::vector<ButcherTableau> build_catalog() {
    std::vector<ButcherTableau> cat;
    cat.push_back(make_tableau("BE", 1, {1.0}));

    const double nu = 1.0 - std::sqrt(2.0) / 2.0;
    cat.push_back(make_tableau("DIRK2", 2, {nu, 1.0 - nu, nu}));

    const double g = alexander_gamma();
    const double beta1 = -1.5 * g * g + 4.0 * g - 0.25;
    const double beta2 = 1.5 * g * g - 5.0 * g + 1.25;
    cat.push_back(make_tableau("DIRK3-B2", 3, {g, (1.0 - g) / 2.0, g, beta1, beta2, g}));

    // Four-stage DIRK3 methods that also satisfy G_s = 1/6.
    cat.push_back(make_tableau(
        "DIRK3-B3", 4,
        {1.482285978970554,
         -0.6416366731243188, 1.482285978970554,
         0.849139645385794, -1.961651886907531, 1.482285978970554,
         -0.1539440520308502, -1.343634476018696, 1.015292549078992, 1.482285978970554},
        {1.482285978970554, 0.840649305846235, 0.369773737448817, 1.0}));
    cat.push_back(make_tableau(
        "DIRK3-B4", 4,
        {0.1376586577601238,
         0.4224699960590905, 0.13765865776012381,
         0.3693098698936377, 0.1203368321096427, 0.1376586577601238,
         0.330756291090243, 0.2479472066914047, 0.2836378444582285, 0.1376586577601238},
        {0.1376586577601238, 0.5601286538192144, 0.6273053597634042, 1.0}));
    cat.push_back(make_tableau(
        "DIRK3-B5", 4,
        {4.025563222205342,
         -1.13430013749107, 4.025563222205342,
         0.8450375691764959, -2.998987699483981, 4.025563222205342,
         -1.33950660036402, 4.925563641076701, -6.611620262918024, 4.025563222205342},
        {4.025563222205342, 2.891263084714272, 1.871613091897857, 1.0}));
    cat.push_back(make_tableau(
        "DIRK3-B6", 4,
        {1.0 / 2.0,
         -1.0 / 4.0, 1.0 / 2.0,
         -1.0, 2.0, 1.0 / 2.0,
         -1.0 / 12.0, 2.0 / 3.0, -1.0 / 12.0, 1.0 / 2.0}));
    cat.push_back(make_tableau(
        "DIRK3-B7", 4,
        {0.153198102889014,
         0.448032922908699, 0.153198102889014,
         0.0, 0.021595742145288, 0.153198102889014,
         0.0, 0.466155735240408, 0.380646161870577, 0.153198102889014},
        {0.153198102889014, 0.601231025797714, 0.174793845034303, 1.0}));
    cat.push_back(make_tableau(
        "DIRK3-B8", 4,
        {0.193031472980198,
         -0.105824758791290, 0.193031472980198,
         0.0, 0.286826200347934, 0.193031472980198,
         0.0, 0.204409312996206, 0.602559214023597, 0.193031472980198},
        {0.193031472980198, 0.087206714188908, 0.479857673328132, 1.0}));
    cat.push_back(make_tableau(
        "DIRK3-B9", 4,
        {0.127224858518235,
         0.204378631032151, 0.127224858518235,
         0.0, 0.862399381468212, 0.127224858518235,
         0.0, 0.746092420734223, 0.126682720747542, 0.127224858518235},
        {0.127224858518235, 0.331603489550386, 0.989624239986447, 1.0}));
    cat.push_back(make_tableau(
        "DIRK3-B10", 4,
        {1.0 / 4.0,
         1.0 / 7.0, 1.0 / 4.0,
         61.0 / 144.0, -49.0 / 144.0, 1.0 / 4.0,
         0.0, 0.0, 3.0 / 4.0, 1.0 / 4.0}));
    return cat;
}

}  // namespace detail

/// All built-in tableaus, in catalog order.
inline const std::vector<ButcherTableau>& catalog() {
    static const std::vector<ButcherTableau> cat = detail::build_catalog();
    return cat;
}

inline const ButcherTableau& find_tableau(std::string_view name) {
    for (const auto& t : catalog()) {
        if (t.name == name) return t;
    }
    throw ConfigError("unknown tableau '" + std::string(name) + "'");
}

/// Plain-text key-value format:
///
///     name   = MY-DIRK
///     stages = 2
///     A      = a11 a12 a21 a22      (row-major, full s*s)
///     c      = c1 c2
///     b      = b1 b2
///
/// `c` and `b` may be omitted for stiffly accurate tableaus; they are then
/// derived from A.
inline ButcherTableau read_tableau(std::istream& in) {
    const auto kv = parse_key_values(in);
    const auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    const auto* stages = get("stages");
    const auto* a = get("A");
    if (!stages || !a) throw ConfigError("tableau file needs 'stages' and 'A'");
    const auto s_values = parse_reals(*stages);
    if (s_values.size() != 1 || s_values[0] < 1 || s_values[0] != std::floor(s_values[0])) {
        throw ConfigError("'stages' must be a positive integer");
    }
    const auto s = static_cast<std::size_t>(s_values[0]);
    ButcherTableau t(get("name") ? *get("name") : std::string("custom"), s);
    const auto entries = parse_reals(*a);
    if (entries.size() != s * s) {
        throw ConfigError("'A' must hold stages*stages entries");
    }
    t.A = entries;
    t.close_stiffly_accurate();
    if (const auto* c = get("c")) {
        t.c = parse_reals(*c);
        if (t.c.size() != s) throw ConfigError("'c' must hold 'stages' entries");
    }
    if (const auto* b = get("b")) {
        t.b = parse_reals(*b);
        if (t.b.size() != s) throw ConfigError("'b' must hold 'stages' entries");
    }
    return t;
}

inline void write_tableau(std::ostream& out, const ButcherTableau& t) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    const auto join = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
        out << '\n';
    };
    out << "name = " << t.name << '\n' << "stages = " << t.stages << '\n' << "A = ";
    join(t.A);
    out << "c = ";
    join(t.c);
    out << "b = ";
    join(t.b);
    out.precision(old_precision);
}

/// Catalog name, or a path to a tableau file. Validates the result.
inline ButcherTableau load_tableau(const std::string& name_or_path) {
    for (const auto& t : catalog()) {
        if (t.name == name_or_path) return t;
    }
    std::ifstream in(name_or_path);
    if (!in) {
        throw ConfigError("'" + name_or_path + "' is neither a catalog tableau nor a readable file");
    }
    ButcherTableau t = read_tableau(in);
    if (const auto report = validate_tableau(t); !report.empty()) {
        std::ostringstream msg;
        msg << "invalid tableau '" << name_or_path << "':";
        for (const auto& line : report) msg << "\n  " << line;
        throw ConfigError(msg.str());
    }
    return t;
}

}  // namespace sldirk
