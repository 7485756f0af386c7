#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "sldirk/order_analysis.hpp"
#include "sldirk/stability.hpp"

using namespace sldirk;

namespace {

ButcherTableau random_tableau(std::mt19937_64& rng, std::size_t s) {
    std::uniform_real_distribution<double> diag(0.05, 2.0), off(-1.0, 1.0);
    ButcherTableau t("random", s);
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t j = 0; j < k; ++j) t.a(k, j) = off(rng);
        t.a(k, k) = diag(rng);
    }
    t.close_stiffly_accurate();
    return t;
}

// Stagewise Butcher sums: c_k = sum a_kj, d_k = sum a_kj c_j,
// g_k = 1/2 sum a_kj c_j^2, h_k = sum a_kj d_j.
KineticCoefficients butcher_sums(const ButcherTableau& t) {
    const std::size_t s = t.stages;
    KineticCoefficients kc{std::vector<double>(s), std::vector<double>(s), std::vector<double>(s),
                           std::vector<double>(s)};
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t j = 0; j <= k; ++j) kc.c[k] += t.a(k, j);
    }
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t j = 0; j <= k; ++j) {
            kc.d[k] += t.a(k, j) * kc.c[j];
            kc.g[k] += 0.5 * t.a(k, j) * kc.c[j] * kc.c[j];
        }
    }
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t j = 0; j <= k; ++j) kc.h[k] += t.a(k, j) * kc.d[j];
    }
    return kc;
}

// Observed local order of the relaxed-limit amplification factor against
// exact transport exp(-i b theta) for the linear two-velocity model.
double observed_limit_order(const ButcherTableau& t, double b) {
    const auto so = to_shu_osher(t);
    const auto err = [&](double theta) {
        const auto ev = eigenvalues(stage_amplifications(so, {b, theta, kInfiniteStiffness}).back());
        return std::abs(ev[0] - std::polar(1.0, -b * theta));
    };
    const double h = 0.02;
    return std::log2(err(h) / err(h / 2.0)) - 1.0;
}

}  // namespace

TEST(OrderCheck, G3ValueForAlexanderDirk3) {
    const auto rep = order_report(find_tableau("DIRK3-B2"));
    EXPECT_NEAR(rep.limit.G[2], 0.066745, 5e-7);
    EXPECT_EQ(rep.kinetic_order, 3);
    EXPECT_EQ(rep.fluid_order, 2);
}

TEST(OrderCheck, LowOrderMethods) {
    const auto be = order_report(find_tableau("BE"));
    EXPECT_EQ(be.kinetic_order, 1);
    EXPECT_EQ(be.fluid_order, 1);
    const auto dirk2 = order_report(find_tableau("DIRK2"));
    EXPECT_EQ(dirk2.kinetic_order, 2);
    EXPECT_EQ(dirk2.fluid_order, 2);
}

TEST(OrderCheck, FourStageTablesAreThirdOrderInBothRegimes) {
    for (const auto& t : catalog()) {
        if (t.stages != 4) continue;
        const auto rep = order_report(t);
        EXPECT_EQ(rep.kinetic_order, 3) << t.name;
        EXPECT_EQ(rep.fluid_order, 3) << t.name;
        for (const auto& [name, r] : rep.residuals) EXPECT_LT(r, 1e-8) << t.name << " " << name;
        EXPECT_NEAR(rep.limit.G.back(), 1.0 / 6.0, 1e-10) << t.name;
    }
}

TEST(OrderCheck, B10ExtraConditionExactly) {
    const auto rep = order_report(find_tableau("DIRK3-B10"));
    EXPECT_NEAR(rep.limit.G[3], 1.0 / 6.0, 1e-14);
}

TEST(OrderCheck, ToleranceControlsVerdict) {
    const auto strict = order_report(find_tableau("DIRK3-B5"), 1e-16);
    EXPECT_LT(strict.fluid_order, 3);  // printed decimals leave ~1e-14 residuals
    const auto loose = order_report(find_tableau("DIRK3-B2"), 0.7);
    EXPECT_EQ(loose.fluid_order, 3);
}

TEST(KineticCoefficients, MatchButcherSumsOnCatalog) {
    for (const auto& t : catalog()) {
        const auto kc = kinetic_coefficients(to_shu_osher(t));
        const auto oracle = butcher_sums(t);
        for (std::size_t k = 0; k < t.stages; ++k) {
            EXPECT_NEAR(kc.c[k], oracle.c[k], 1e-12) << t.name;
            EXPECT_NEAR(kc.d[k], oracle.d[k], 1e-12) << t.name;
            EXPECT_NEAR(kc.g[k], oracle.g[k], 1e-12) << t.name;
            EXPECT_NEAR(kc.h[k], oracle.h[k], 1e-12) << t.name;
        }
    }
}

TEST(KineticCoefficients, MatchButcherSumsOnRandomTableaus) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto t = random_tableau(rng, 1 + trial % 5);
        const auto kc = kinetic_coefficients(to_shu_osher(t));
        const auto oracle = butcher_sums(t);
        for (std::size_t k = 0; k < t.stages; ++k) {
            const double scale = 1.0 + std::abs(oracle.h[k]) + std::abs(oracle.g[k]);
            ASSERT_NEAR(kc.c[k], oracle.c[k], 1e-10 * scale);
            ASSERT_NEAR(kc.d[k], oracle.d[k], 1e-10 * scale);
            ASSERT_NEAR(kc.g[k], oracle.g[k], 1e-10 * scale);
            ASSERT_NEAR(kc.h[k], oracle.h[k], 1e-10 * scale);
        }
    }
}

TEST(LimitCoefficients, StageOneClosedForm) {
    // A single implicit stage: C = c = a, D = 0, B = c^2, B*** = c^3.
    for (const auto& t : catalog()) {
        const auto so = to_shu_osher(t);
        const auto lc = limit_coefficients(so, kinetic_coefficients(so));
        const double a = t.a(0, 0);
        EXPECT_DOUBLE_EQ(lc.C[0], a);
        EXPECT_EQ(lc.D[0], 0.0);
        EXPECT_DOUBLE_EQ(lc.B[0], a * a);
        EXPECT_DOUBLE_EQ(lc.Bstarstarstar[0], a * a * a);
    }
}

TEST(StageIdentities, HoldOnCatalog) {
    for (const auto& t : catalog()) {
        EXPECT_LT(verify_theorem_identities(to_shu_osher(t)).max_abs(), 1e-12) << t.name;
    }
}

TEST(StageIdentities, HoldOnRandomTableaus) {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t s = 1 + static_cast<std::size_t>(trial % 5);
        const auto res = verify_theorem_identities(to_shu_osher(random_tableau(rng, s)));
        ASSERT_EQ(res.d_plus_D.size(), s);
        ASSERT_LT(res.max_abs(), 1e-9) << "trial " << trial;
    }
}

// Independent check of the fluid order: local error of the relaxed-limit
// amplification factor is O(theta^{p+1}).
TEST(FluidOrder, AgreesWithLimitAmplificationFactor) {
    for (const char* name : {"BE", "DIRK2", "DIRK3-B2", "DIRK3-B6", "DIRK3-B10"}) {
        const auto& t = find_tableau(name);
        const int p = order_report(t).fluid_order;
        EXPECT_NEAR(observed_limit_order(t, 0.6), p, 0.15) << name;
    }
}
