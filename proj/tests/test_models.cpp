#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sldirk/models.hpp"

using namespace sldirk;

static_assert(KineticModel<LinearTwoVelocity>);
static_assert(KineticModel<NonlinearTwoVelocity>);
static_assert(KineticModel<Bgk1D1V>);

namespace {

Bgk1D1V standard_bgk(bool conservative = true) {
    return Bgk1D1V(VelocitySet::uniform_grid(-15.0, 15.0, 100), conservative);
}

}  // namespace

TEST(VelocitySet, MidpointGrid) {
    const auto vs = VelocitySet::uniform_grid(-15.0, 15.0, 100);
    ASSERT_EQ(vs.size(), 100u);
    EXPECT_NEAR(vs.velocities.front(), -14.85, 1e-12);
    EXPECT_NEAR(vs.velocities.back(), 14.85, 1e-12);
    EXPECT_NEAR(vs.max_speed(), 14.85, 1e-12);
    for (double w : vs.weights) EXPECT_NEAR(w, 0.3, 1e-15);
    EXPECT_THROW(VelocitySet::uniform_grid(1.0, 1.0, 4), ConfigError);
    EXPECT_EQ(VelocitySet::two_velocity().max_speed(), 1.0);
}

TEST(TwoVelocity, LinearEquilibriumCarriesFluxBU) {
    const LinearTwoVelocity m(0.6);
    const auto eq = equilibrium(m, MacroState{{2.5, 0, 0}, 1});
    EXPECT_DOUBLE_EQ(eq[0] + eq[1], 2.5);
    EXPECT_DOUBLE_EQ(eq[0] - eq[1], 0.6 * 2.5);  // v = b u
    EXPECT_THROW(LinearTwoVelocity(1.0), ConfigError);
}

TEST(TwoVelocity, NonlinearEquilibriumCarriesFluxBU2) {
    const NonlinearTwoVelocity m(0.2);
    const auto eq = equilibrium(m, MacroState{{1.5, 0, 0}, 1});
    EXPECT_DOUBLE_EQ(eq[0] + eq[1], 1.5);
    EXPECT_DOUBLE_EQ(eq[0] - eq[1], 0.2 * 1.5 * 1.5);
}

TEST(TwoVelocity, RelaxationAnnihilatesTheInvariant) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const LinearTwoVelocity lin(0.6);
    const NonlinearTwoVelocity non(0.2);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> f{u(rng), u(rng)};
        EXPECT_NEAR(invariant_moment(lin, relaxation(lin, f, 1e-3), 0), 0.0, 1e-10);
        EXPECT_NEAR(invariant_moment(non, relaxation(non, f, 1e-3), 0), 0.0, 1e-10);
    }
    EXPECT_THROW(relaxation(lin, std::vector<double>{1.0, 1.0}, 0.0), ConfigError);
}

TEST(Bgk, PrimitiveConservedRoundTrip) {
    const Primitive p{1.3, -0.4, 0.8};
    const Primitive back = Bgk1D1V::primitive(Bgk1D1V::conserved(p));
    EXPECT_NEAR(back.rho, p.rho, 1e-15);
    EXPECT_NEAR(back.u, p.u, 1e-15);
    EXPECT_NEAR(back.T, p.T, 1e-15);
}

TEST(Bgk, InvalidStatesThrowModelError) {
    EXPECT_THROW(Bgk1D1V::primitive({{-1.0, 0.0, 1.0}, 3}), ModelError);
    EXPECT_THROW(Bgk1D1V::primitive({{1.0, 2.0, 1.0}, 3}), ModelError);  // 2E/rho - u^2 < 0
    const auto bgk = standard_bgk();
    std::vector<double> f(100, 0.0);
    f[50] = -1.0;
    EXPECT_THROW(bgk.moments(f), ModelError);
}

TEST(Bgk, DiscreteConservativeEquilibriumMatchesMomentsExactly) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> rho(0.5, 2.0), vel(-1.0, 1.0), temp(0.5, 2.0);
    const auto bgk = standard_bgk();
    for (int i = 0; i < 200; ++i) {
        const MacroState u = Bgk1D1V::conserved({rho(rng), vel(rng), temp(rng)});
        const auto m = equilibrium(bgk, u);
        const MacroState back = bgk.moments(m);
        for (std::size_t k = 0; k < 3; ++k) ASSERT_NEAR(back[k], u[k], 1e-13 * (1.0 + std::abs(u[k])));
    }
}

TEST(Bgk, DiscreteEquilibriumIsCloseToSampledMaxwellian) {
    const auto bgk = standard_bgk();
    const Primitive p{1.0, 0.1, 1.0};
    const auto m = equilibrium(bgk, Bgk1D1V::conserved(p));
    for (std::size_t j = 0; j < m.size(); ++j) {
        EXPECT_NEAR(m[j], Bgk1D1V::maxwellian(p, bgk.velocity_set().velocities[j]), 1e-10);
    }
}

TEST(Bgk, CoarseGridShowsWhyTheFitIsNeeded) {
    const Bgk1D1V sampled(VelocitySet::uniform_grid(-3.0, 3.0, 8), false);
    const Bgk1D1V fitted(VelocitySet::uniform_grid(-3.0, 3.0, 8), true);
    const MacroState u = Bgk1D1V::conserved({1.0, 0.3, 1.0});
    const MacroState a = sampled.moments(equilibrium(sampled, u));
    const MacroState b = fitted.moments(equilibrium(fitted, u));
    double sampled_err = 0.0, fitted_err = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        sampled_err = std::max(sampled_err, std::abs(a[k] - u[k]));
        fitted_err = std::max(fitted_err, std::abs(b[k] - u[k]));
    }
    EXPECT_GT(sampled_err, 1e-6);
    EXPECT_LT(fitted_err, 1e-13);
}

TEST(Bgk, RelaxationHasZeroMomentsInEveryInvariant) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto bgk = standard_bgk();
    std::vector<double> f(100);
    for (int trial = 0; trial < 20; ++trial) {
        for (std::size_t j = 0; j < f.size(); ++j) {
            const double v = bgk.velocity_set().velocities[j];
            f[j] = std::exp(-0.5 * v * v) * (0.5 + u(rng));
        }
        const auto q = relaxation(bgk, f, 1.0);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_NEAR(invariant_moment(bgk, q, i), 0.0, 1e-12) << "invariant " << i;
        }
    }
}

TEST(Bgk, InvariantsAreOneVelocityHalfVelocitySquared) {
    const auto bgk = standard_bgk();
    EXPECT_EQ(bgk.invariant(0, 3.0), 1.0);
    EXPECT_EQ(bgk.invariant(1, 3.0), 3.0);
    EXPECT_EQ(bgk.invariant(2, 3.0), 4.5);
    EXPECT_EQ(bgk.invariant_count(), 3u);
}
