#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

#include "sldirk/butcher.hpp"

using namespace sldirk;

namespace {

// Independent route to the Shu-Osher coefficients: eliminate the stage
// derivatives with dt*L = A^{-1} (Y - f^n), so the weight of Y_j in stage k
// is sum_{l=j}^{k-1} a_kl (A^{-1})_lj.
Eigen::MatrixXd shu_osher_oracle(const ButcherTableau& t) {
    const auto s = static_cast<Eigen::Index>(t.stages);
    Eigen::MatrixXd A(s, s);
    for (Eigen::Index k = 0; k < s; ++k) {
        for (Eigen::Index j = 0; j < s; ++j) A(k, j) = t.a(k, j);
    }
    const Eigen::MatrixXd inv = A.inverse();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(s, s);
    for (Eigen::Index k = 0; k < s; ++k) {
        for (Eigen::Index j = 0; j < k; ++j) {
            for (Eigen::Index l = j; l < k; ++l) b(k, j) += A(k, l) * inv(l, j);
        }
    }
    return b;
}

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

}  // namespace

TEST(Catalog, ContainsAllTablesInOrder) {
    const std::vector<std::string> names{"BE",       "DIRK2",    "DIRK3-B2", "DIRK3-B3",
                                         "DIRK3-B4", "DIRK3-B5", "DIRK3-B6", "DIRK3-B7",
                                         "DIRK3-B8", "DIRK3-B9", "DIRK3-B10"};
    ASSERT_EQ(catalog().size(), names.size());
    for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(catalog()[i].name, names[i]);
}

TEST(Catalog, EveryEntryIsValidAndStifflyAccurate) {
    for (const auto& t : catalog()) {
        EXPECT_TRUE(validate_tableau(t).empty()) << t.name;
        EXPECT_TRUE(t.stiffly_accurate) << t.name;
        for (std::size_t j = 0; j < t.stages; ++j) EXPECT_EQ(t.b[j], t.a(t.stages - 1, j)) << t.name;
        EXPECT_NEAR(t.c.back(), 1.0, 1e-12) << t.name;
    }
}

TEST(Catalog, B10LastRow) {
    const auto& t = find_tableau("DIRK3-B10");
    EXPECT_EQ(t.a(3, 0), 0.0);
    EXPECT_EQ(t.a(3, 1), 0.0);
    EXPECT_EQ(t.a(3, 2), 0.75);
    EXPECT_EQ(t.a(3, 3), 0.25);
    EXPECT_DOUBLE_EQ(t.a(2, 0), 61.0 / 144.0);
    EXPECT_DOUBLE_EQ(t.a(2, 1), -49.0 / 144.0);
}

TEST(Catalog, AlexanderGammaAndCoefficients) {
    const auto& t = find_tableau("DIRK3-B2");
    EXPECT_NEAR(t.a(0, 0), 0.435866521508459, 1e-15);
    const double g = t.a(0, 0);
    EXPECT_NEAR(((6.0 * g - 18.0) * g + 9.0) * g - 1.0, 0.0, 1e-15);
    EXPECT_NEAR(t.a(2, 0), -1.5 * g * g + 4.0 * g - 0.25, 1e-15);
    EXPECT_NEAR(t.a(2, 1), 1.5 * g * g - 5.0 * g + 1.25, 1e-15);
    EXPECT_NEAR(t.a(1, 0), (1.0 - g) / 2.0, 1e-15);
}

TEST(Catalog, B3Diagonal) {
    const auto& t = find_tableau("DIRK3-B3");
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(t.a(k, k), 1.482285978970554);
    EXPECT_EQ(t.c[1], 0.840649305846235);
}

TEST(Catalog, PrintedAbscissaeMatchRowSums) {
    for (const auto& t : catalog()) {
        for (std::size_t k = 0; k < t.stages; ++k) {
            double sum = 0.0;
            for (std::size_t j = 0; j <= k; ++j) sum += t.a(k, j);
            EXPECT_NEAR(t.c[k], sum, 1e-14) << t.name << " stage " << k;
        }
    }
}

TEST(Catalog, UnknownNameThrows) { EXPECT_THROW(find_tableau("RK4"), ConfigError); }

TEST(Validate, ReportsEachProblem) {
    ButcherTableau t("bad", 2);
    t.a(0, 0) = 0.5;
    t.a(0, 1) = 0.1;  // above the diagonal
    t.a(1, 0) = 0.5;
    t.a(1, 1) = -0.2;
    t.close_stiffly_accurate();
    const auto report = validate_tableau(t);
    EXPECT_GE(report.size(), 2u);
    bool diag = false;
    for (const auto& line : report) diag = diag || line.find("nonpositive diagonal at stage 2") != std::string::npos;
    EXPECT_TRUE(diag);
}

TEST(Validate, RejectsInconsistentAbscissa) {
    ButcherTableau t = find_tableau("DIRK2");
    t.c[0] += 1e-6;
    EXPECT_FALSE(validate_tableau(t).empty());
}

TEST(ShuOsher, Dirk2KnownCoefficient) {
    const auto so = to_shu_osher(find_tableau("DIRK2"));
    EXPECT_NEAR(so.b(1, 0), 2.41421356, 1e-8);
    EXPECT_NEAR(so.b(1, 0), 1.0 + std::sqrt(2.0), 1e-14);
}

TEST(ShuOsher, BackwardEulerHasNoCoefficients) {
    const auto so = to_shu_osher(find_tableau("BE"));
    EXPECT_EQ(so.stages, 1u);
    EXPECT_EQ(so.row_sum(0), 0.0);
    EXPECT_EQ(so.diag[0], 1.0);
}

TEST(ShuOsher, MatchesMatrixInverseOracleOnCatalog) {
    for (const auto& t : catalog()) {
        const auto so = to_shu_osher(t);
        const auto oracle = shu_osher_oracle(t);
        for (std::size_t k = 0; k < t.stages; ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                EXPECT_NEAR(so.b(k, j), oracle(k, j), 1e-11 * (1.0 + std::abs(oracle(k, j))))
                    << t.name << " b_" << k + 1 << j + 1;
            }
        }
    }
}

TEST(ShuOsher, MatchesOracleOnRandomTableaus) {
    std::mt19937_64 rng(20241016);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = random_tableau(rng, 1 + trial % 5);
        const auto so = to_shu_osher(t);
        const auto oracle = shu_osher_oracle(t);
        for (std::size_t k = 0; k < t.stages; ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                ASSERT_NEAR(so.b(k, j), oracle(k, j), 1e-10 * (1.0 + std::abs(oracle(k, j))));
            }
        }
    }
}

// The Shu-Osher form must reproduce the Butcher stages on a linear ODE
// y' = lambda y: Y_k = (1 - sum_j b_kj) y0 + sum_j b_kj Y_j + a_kk h lambda Y_k.
TEST(ShuOsher, ReproducesStagesOnLinearOde) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = random_tableau(rng, 1 + trial % 5);
        const auto so = to_shu_osher(t);
        const double z = -0.7;  // h * lambda
        const auto s = static_cast<Eigen::Index>(t.stages);
        Eigen::MatrixXd A(s, s);
        for (Eigen::Index k = 0; k < s; ++k) {
            for (Eigen::Index j = 0; j < s; ++j) A(k, j) = t.a(k, j);
        }
        const Eigen::VectorXd butcher =
            (Eigen::MatrixXd::Identity(s, s) - z * A).lu().solve(Eigen::VectorXd::Ones(s));
        std::vector<double> y(t.stages);
        for (std::size_t k = 0; k < t.stages; ++k) {
            double rhs = 1.0 - so.row_sum(k);
            for (std::size_t j = 0; j < k; ++j) rhs += so.b(k, j) * y[j];
            y[k] = rhs / (1.0 - so.diag[k] * z);
            EXPECT_NEAR(y[k], butcher(static_cast<Eigen::Index>(k)), 1e-10);
        }
    }
}

TEST(ShuOsher, NonpositiveDiagonalThrows) {
    ButcherTableau t("zero", 2);
    t.a(0, 0) = 0.0;
    t.a(1, 0) = 0.5;
    t.a(1, 1) = 0.5;
    t.close_stiffly_accurate();
    EXPECT_THROW(to_shu_osher(t), ConfigError);
}

TEST(TableauFile, RoundTripsEveryCatalogEntry) {
    for (const auto& t : catalog()) {
        std::stringstream buf;
        write_tableau(buf, t);
        const auto back = read_tableau(buf);
        EXPECT_EQ(back.name, t.name);
        EXPECT_EQ(back.A, t.A);
        EXPECT_EQ(back.c, t.c);
        EXPECT_EQ(back.b, t.b);
    }
}

TEST(TableauFile, DerivesAbscissaeAndWeightsWhenOmitted) {
    std::istringstream in("# comment\nname = two\nstages = 2\nA = 0.5 0  0.5 0.5\n");
    const auto t = read_tableau(in);
    EXPECT_EQ(t.name, "two");
    EXPECT_EQ(t.c, (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(t.b, (std::vector<double>{0.5, 0.5}));
    EXPECT_TRUE(validate_tableau(t).empty());
}

TEST(TableauFile, MalformedInputThrows) {
    std::istringstream missing("stages = 2\n");
    EXPECT_THROW(read_tableau(missing), ConfigError);
    std::istringstream short_a("stages = 2\nA = 1 0 1\n");
    EXPECT_THROW(read_tableau(short_a), ConfigError);
    std::istringstream junk("stages = 1\nA = one\n");
    EXPECT_THROW(read_tableau(junk), ConfigError);
    std::istringstream no_eq("stages 1\n");
    EXPECT_THROW(read_tableau(no_eq), ConfigError);
}

TEST(TableauFile, LoadRejectsInvalidFileAndUnknownName) {
    EXPECT_THROW(load_tableau("/nonexistent/tableau"), ConfigError);
    EXPECT_EQ(load_tableau("DIRK2").name, "DIRK2");
}
