#include <algorithm>
#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vra/errors.hpp"
#include "vra/metrics.hpp"

namespace vra {
namespace {

SetMetrics pair(double p, double s) {
    SetMetrics m;
    m.plcc = p;
    m.srcc = s;
    return m;
}

TEST(Plcc, Examples) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y, neg;
    for (double v : x) {
        y.push_back(2 * v + 1);
        neg.push_back(-v);
    }
    EXPECT_EQ(plcc(x, y), 1.0);
    EXPECT_EQ(plcc(x, neg), -1.0);
    EXPECT_THROW(plcc(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), DegenerateInput);
    EXPECT_THROW(plcc(std::vector<double>{1}, std::vector<double>{1}), DataError);
    EXPECT_THROW(plcc(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), DimensionMismatch);
}

TEST(Srcc, Examples) {
    const std::vector<double> x{-2, -1, 0.5, 1, 3};
    std::vector<double> cubed;
    for (double v : x) cubed.push_back(v * v * v);
    EXPECT_EQ(srcc(x, cubed), 1.0);
    EXPECT_EQ(srcc(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
    EXPECT_THROW(srcc(std::vector<double>{4, 4, 4}, std::vector<double>{1, 2, 3}), DegenerateInput);
}

TEST(Srcc, TiesUseAverageRanks) {
    const std::vector<double> x{1, 2, 2, 3};
    const std::vector<double> y{1, 2, 3, 4};
    EXPECT_EQ(fractional_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
    EXPECT_EQ(test::oracle_average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
    EXPECT_NEAR(srcc(x, y), test::oracle_spearman(x, y), 1e-15);
    EXPECT_NEAR(srcc(x, y), 0.9486832980505139, 1e-15);
}

TEST(Rmse, Examples) {
    const std::vector<double> a{1, 2, 3};
    EXPECT_EQ(rmse_metric(a, a), 0.0);
    EXPECT_NEAR(rmse_metric(std::vector<double>{0, 0}, std::vector<double>{3, 4}), 3.53553391, 1e-8);
    EXPECT_THROW(rmse_metric(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionMismatch);
}

TEST(Metrics, MatchOraclesOnRandomData) {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + gen() % 60;
        auto x = test::random_vector(gen, n, 1, 5);
        auto y = test::random_vector(gen, n, 1, 5);
        // Quantize some trials so ties occur.
        if (trial % 2 == 0) {
            for (auto& v : x) v = std::round(v * 2) / 2;
            for (auto& v : y) v = std::round(v * 2) / 2;
        }
        const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
                              std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
        if (constant) {
            EXPECT_THROW(srcc(x, y), DegenerateInput);
        } else {
            ASSERT_NEAR(plcc(x, y), test::oracle_pearson(x, y), 1e-12);
            ASSERT_NEAR(srcc(x, y), test::oracle_spearman(x, y), 1e-12);
        }
        ASSERT_NEAR(rmse_metric(x, y), test::oracle_rmse(x, y), 1e-12);
    }
}

TEST(Metrics, Invariances) {
    std::mt19937_64 gen(32);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = test::random_vector(gen, 30, -5, 5);
        const auto y = test::random_vector(gen, 30, -5, 5);
        const double a = std::uniform_real_distribution<double>(0.1, 10)(gen);
        const double b = std::uniform_real_distribution<double>(-10, 10)(gen);
        std::vector<double> affine, negated, monotone;
        for (double v : x) {
            affine.push_back(a * v + b);
            negated.push_back(-a * v + b);
            monotone.push_back(std::exp(v) + v * v * v);
        }
        const double base = plcc(x, y);
        ASSERT_NEAR(plcc(affine, y), base, 1e-12);
        ASSERT_NEAR(plcc(negated, y), -base, 1e-12);
        ASSERT_EQ(plcc(x, y), plcc(y, x));
        ASSERT_EQ(srcc(monotone, y), srcc(x, y));
        ASSERT_EQ(srcc(x, y), srcc(y, x));
        ASSERT_EQ(rmse_metric(x, y), rmse_metric(y, x));
        ASSERT_LE(std::abs(base), 1.0);
    }
}

TEST(FinalScore, PublishedModelScores) {
    const std::array<SetMetrics, 3> eva{pair(0.8305, 0.7919), pair(0.9158, 0.9119), pair(0.8726, 0.8285)};
    const std::array<SetMetrics, 3> convnext{pair(0.7899, 0.7387), pair(0.9279, 0.9171), pair(0.8647, 0.8211)};
    const std::array<SetMetrics, 3> ensemble{pair(0.8091, 0.7633), pair(0.9287, 0.9197), pair(0.8746, 0.8318)};
    EXPECT_NEAR(final_score(eva), 0.8585, 5e-4);
    EXPECT_NEAR(final_score(convnext), 0.8432, 5e-4);
    EXPECT_NEAR(final_score(ensemble), 0.8545, 5e-4);
}

TEST(FinalScore, Degenerate) {
    const std::array<SetMetrics, 1> perfect{pair(1.0, 1.0)};
    EXPECT_EQ(final_score(perfect), 1.0);
    EXPECT_THROW(final_score(std::span<const SetMetrics>{}), DataError);
}

TEST(MetricsReport, SelfConsistentAndSerialized) {
    const auto report = MetricsReport::build({"a", "b"}, {pair(0.9, 0.8), pair(0.7, 0.6)});
    EXPECT_DOUBLE_EQ(report.final_score, (0.85 + 0.65) / 2);
    const auto json = report.to_json();
    for (const char* field : {"\"plcc\"", "\"srcc\"", "\"rmse\"", "\"final_score\""})
        EXPECT_NE(json.find(field), std::string::npos) << field;
    EXPECT_NE(report.to_text().find("final_score"), std::string::npos);
}

} // namespace
} // namespace vra
