#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "sldirk/butcher.hpp"

namespace sldirk {

/// Per-stage Taylor coefficients of a DIRK stage applied to df/dt = Q(f):
///
///   f^(k) = f + c_k dt Q + d_k dt^2 Q'Q + dt^3 (g_k Q''(Q,Q) + h_k Q'Q'Q) + O(dt^4)
struct KineticCoefficients {
    std::vector<double> c, d, g, h;
};

/// Per-stage Taylor coefficients of the moment scheme obtained in the
/// relaxation limit, expanded in the transport operator T and the
/// free-streaming remainders B, B~.
struct LimitCoefficients {
    std::vector<double> C, D, B, G, H, Bstar, Bstarstar, Bstarstarstar;
};

inline KineticCoefficients kinetic_coefficients(const ShuOsherForm& so) {
    const std::size_t s = so.stages;
    KineticCoefficients kc{std::vector<double>(s), std::vector<double>(s),
                           std::vector<double>(s), std::vector<double>(s)};
    for (std::size_t k = 0; k < s; ++k) {
        double c = 0.0, d = 0.0, g = 0.0, h = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double bkj = so.b(k, j);
            c += bkj * kc.c[j];
            d += bkj * kc.d[j];
            g += bkj * kc.g[j];
            h += bkj * kc.h[j];
        }
        const double akk = so.diag[k];
        kc.c[k] = c + akk;
        kc.d[k] = d + akk * kc.c[k];
        kc.g[k] = g + 0.5 * akk * kc.c[k] * kc.c[k];
        kc.h[k] = h + akk * kc.d[k];
    }
    return kc;
}

inline LimitCoefficients limit_coefficients(const ShuOsherForm& so, const KineticCoefficients& kc) {
    const std::size_t s = so.stages;
    LimitCoefficients lc;
    for (auto* v : {&lc.C, &lc.D, &lc.B, &lc.G, &lc.H, &lc.Bstar, &lc.Bstarstar, &lc.Bstarstarstar}) {
        v->assign(s, 0.0);
    }
    const auto& c = kc.c;
    for (std::size_t k = 0; k < s; ++k) {
        const double ck = c[k];
        const double rest = 1.0 - so.row_sum(k);
        double D = 0.0, B = 0.0, G = 0.0, H = 0.0, Bs = 0.0, Bss = 0.0, Bsss = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double bkj = so.b(k, j);
            const double dc = ck - c[j];
            D += bkj * (lc.D[j] + dc * c[j]);
            B += bkj * (lc.B[j] + dc * dc);
            G += bkj * (lc.G[j] + 0.5 * dc * c[j] * c[j]);
            H += bkj * (lc.H[j] + dc * lc.D[j]);
            Bs += bkj * (lc.Bstar[j] + dc * lc.B[j]);
            Bss += bkj * (lc.Bstarstar[j] + dc * dc * c[j]);
            Bsss += bkj * (lc.Bstarstarstar[j] + dc * dc * dc);
        }
        lc.C[k] = ck;
        lc.D[k] = D;
        lc.B[k] = rest * ck * ck + B;
        lc.G[k] = G;
        lc.H[k] = H;
        lc.Bstar[k] = Bs;
        lc.Bstarstar[k] = Bss;
        lc.Bstarstarstar[k] = rest * ck * ck * ck + Bsss;
    }
    return lc;
}

inline constexpr double kOrderTolerance = 1e-10;

struct OrderReport {
    int kinetic_order = 0;
    int fluid_order = 0;
    /// |residual| of every order condition, keyed by condition name
    /// ("c_s=1", "G_s=1/6", ...).
    std::map<std::string, double> residuals;
    KineticCoefficients kinetic;
    LimitCoefficients limit;
};

inline OrderReport order_report(const ButcherTableau& t, double tol = kOrderTolerance) {
    const ShuOsherForm so = to_shu_osher(t);
    OrderReport rep;
    rep.kinetic = kinetic_coefficients(so);
    rep.limit = limit_coefficients(so, rep.kinetic);
    const std::size_t last = t.stages - 1;
    auto& r = rep.residuals;
    const auto& kc = rep.kinetic;
    const auto& lc = rep.limit;

    r["c_s=1"] = std::abs(kc.c[last] - 1.0);
    r["d_s=1/2"] = std::abs(kc.d[last] - 0.5);
    r["g_s=1/6"] = std::abs(kc.g[last] - 1.0 / 6.0);
    r["h_s=1/6"] = std::abs(kc.h[last] - 1.0 / 6.0);
    r["C_s=1"] = std::abs(lc.C[last] - 1.0);
    r["D_s=1/2"] = std::abs(lc.D[last] - 0.5);
    r["B_s=0"] = std::abs(lc.B[last]);
    r["G_s=1/6"] = std::abs(lc.G[last] - 1.0 / 6.0);
    r["H_s=1/6"] = std::abs(lc.H[last] - 1.0 / 6.0);
    r["B*_s=0"] = std::abs(lc.Bstar[last]);
    r["B**_s=0"] = std::abs(lc.Bstarstar[last]);
    r["B***_s=0"] = std::abs(lc.Bstarstarstar[last]);

    const auto ok = [&](std::initializer_list<const char*> names) {
        return std::all_of(names.begin(), names.end(),
                           [&](const char* n) { return r.at(n) <= tol; });
    };
    if (ok({"c_s=1"})) {
        rep.kinetic_order = 1;
        if (ok({"d_s=1/2"})) {
            rep.kinetic_order = 2;
            if (ok({"g_s=1/6", "h_s=1/6"})) rep.kinetic_order = 3;
        }
    }
    if (ok({"C_s=1"})) {
        rep.fluid_order = 1;
        if (ok({"D_s=1/2", "B_s=0"})) {
            rep.fluid_order = 2;
            if (ok({"G_s=1/6", "H_s=1/6", "B*_s=0", "B**_s=0", "B***_s=0"})) rep.fluid_order = 3;
        }
    }
    return rep;
}

/// Residuals of the stagewise identities linking kinetic and limit
/// coefficients. Each vector has one entry per stage; all vanish for every
/// DIRK with positive diagonal.
struct IdentityResiduals {
    std::vector<double> d_plus_D;          // d_k + D_k - c_k^2
    std::vector<double> B_vs_dD;           // B_k - (d_k - D_k)
    std::vector<double> GH_vs_cd;          // 2G_k - H_k + 2g_k - c_k d_k
    std::vector<double> Bstar;             // B*_k - (2G_k - 2H_k)
    std::vector<double> Bstarstar;         // B**_k - (2g_k - 2H_k - c_k^3 + 2 c_k D_k)
    std::vector<double> Bstarstarstar;     // B***_k - (c_k^3 - 3B**_k - 6G_k)

    double max_abs() const {
        double m = 0.0;
        for (const auto* v : {&d_plus_D, &B_vs_dD, &GH_vs_cd, &Bstar, &Bstarstar, &Bstarstarstar}) {
            for (double x : *v) m = std::max(m, std::abs(x));
        }
        return m;
    }
};

inline IdentityResiduals verify_theorem_identities(const ShuOsherForm& so) {
    const auto kc = kinetic_coefficients(so);
    const auto lc = limit_coefficients(so, kc);
    IdentityResiduals res;
    for (std::size_t k = 0; k < so.stages; ++k) {
        const double c = kc.c[k], d = kc.d[k], g = kc.g[k];
        const double D = lc.D[k], G = lc.G[k], H = lc.H[k];
        res.d_plus_D.push_back(d + D - c * c);
        res.B_vs_dD.push_back(lc.B[k] - (d - D));
        res.GH_vs_cd.push_back(2.0 * G - H + 2.0 * g - c * d);
        res.Bstar.push_back(lc.Bstar[k] - (2.0 * G - 2.0 * H));
        res.Bstarstar.push_back(lc.Bstarstar[k] - (2.0 * g - 2.0 * H - c * c * c + 2.0 * c * D));
        res.Bstarstarstar.push_back(lc.Bstarstarstar[k] - (c * c * c - 3.0 * lc.Bstarstar[k] - 6.0 * G));
    }
    return res;
}

}  // namespace sldirk
