#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vra/errors.hpp"
#include "vra/pooling.hpp"

namespace vra {
namespace {

Matrix<double> rows_of(std::vector<std::vector<double>> rows) {
    Matrix<double> m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

TEST(PoolMean, ConstantRows) {
    const auto m = rows_of({{1.5, -2, 7}, {1.5, -2, 7}, {1.5, -2, 7}});
    EXPECT_EQ(pool_mean(m), (std::vector<double>{1.5, -2, 7}));
}

TEST(PoolMean, TwoRows) {
    EXPECT_EQ(pool_mean(rows_of({{0}, {2}})), std::vector<double>{1.0});
}

TEST(PoolMean, EmptyInput) {
    EXPECT_THROW(pool_mean(Matrix<double>()), DataError);
}

TEST(PoolStd, ConstantRowsGiveZero) {
    const auto s = pool_std(rows_of({{3, 4}, {3, 4}, {3, 4}, {3, 4}, {3, 4}}));
    EXPECT_EQ(s, (std::vector<double>{0.0, 0.0}));
}

TEST(PoolStd, BesselCorrectedTwoRows) {
    const auto s = pool_std(rows_of({{0}, {2}}));
    EXPECT_NEAR(s[0], std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[0], 1.41421356, 1e-8);
}

TEST(PoolStd, SingleFrameIsUndefined) {
    EXPECT_THROW(pool_std(rows_of({{1, 2}})), UndefinedStd);
    EXPECT_THROW(pool_concat(rows_of({{1, 2}})), UndefinedStd);
}

TEST(PoolStd, RejectsNonFinite) {
    EXPECT_THROW(pool_std(rows_of({{1}, {NAN}})), NonFiniteError);
}

TEST(PoolConcat, Layout) {
    const auto p = pool_concat(rows_of({{0}, {2}}));
    ASSERT_EQ(p.concat.size(), 2u);
    EXPECT_EQ(p.concat[0], 1.0);
    EXPECT_NEAR(p.concat[1], 1.41421356, 1e-8);
    EXPECT_EQ(p.n, 2u);

    const auto c = pool_concat(rows_of({{5, 6, 7}, {5, 6, 7}}));
    EXPECT_EQ(c.concat, (std::vector<double>{5, 6, 7, 0, 0, 0}));
}

TEST(Pooling, MatchesDefinitionalOracle) {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = test::random_matrix(gen, 5, 16, -3, 3);
        const auto rows = test::to_rows(m);
        const auto om = test::oracle_mean(rows);
        const auto os = test::oracle_std(rows);
        const auto p = pool_concat(m);
        for (std::size_t j = 0; j < 16; ++j) {
            ASSERT_NEAR(p.mean[j], om[j], 1e-12);
            ASSERT_NEAR(p.std[j], os[j], 1e-12);
            ASSERT_EQ(p.concat[j], p.mean[j]);
            ASSERT_EQ(p.concat[16 + j], p.std[j]);
        }
    }
}

TEST(Pooling, PermutationInvariance) {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = test::random_matrix(gen, 7, 5);
        auto rows = test::to_rows(m);
        std::shuffle(rows.begin(), rows.end(), gen);
        const auto shuffled = rows_of(rows);
        const auto a = pool_concat(m);
        const auto b = pool_concat(shuffled);
        for (std::size_t j = 0; j < a.concat.size(); ++j) ASSERT_NEAR(a.concat[j], b.concat[j], 1e-12);
    }
}

TEST(Pooling, ShiftAndScale) {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = test::random_matrix(gen, 5, 6);
        const auto shift = test::random_vector(gen, 6, -10, 10);
        const double a = std::uniform_real_distribution<double>(-4, 4)(gen);
        Matrix<double> shifted = m, scaled = m;
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) {
                shifted(i, j) += shift[j];
                scaled(i, j) *= a;
            }
        const auto base = pool_concat(m);
        const auto sh = pool_concat(shifted);
        const auto sc = pool_concat(scaled);
        for (std::size_t j = 0; j < 6; ++j) {
            ASSERT_NEAR(sh.mean[j], base.mean[j] + shift[j], 1e-12);
            ASSERT_NEAR(sh.std[j], base.std[j], 1e-12);
            ASSERT_NEAR(sc.mean[j], a * base.mean[j], 1e-12);
            ASSERT_NEAR(sc.std[j], std::abs(a) * base.std[j], 1e-12);
        }
    }
}

TEST(Pooling, TwoPassAgreesWithNaiveSinglePass) {
    std::mt19937_64 gen(24);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = test::random_matrix(gen, 5, 8, -100, 100);
        const auto naive = test::naive_single_pass_std(test::to_rows(m));
        const auto s = pool_std(m);
        for (std::size_t j = 0; j < 8; ++j) ASSERT_NEAR(s[j], naive[j], 1e-8);
    }
}

} // namespace
} // namespace vra
