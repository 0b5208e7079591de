#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vra/errors.hpp"
#include "vra/inference.hpp"
#include "vra/pooling.hpp"

namespace vra {
namespace {

PredictionSet from_rows(const test::Rows& rows) {
    PredictionSet p;
    p.repeats = rows.size();
    p.values = Matrix<double>(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t v = 0; v < rows[r].size(); ++v) p.values(r, v) = rows[r][v];
    }
    for (std::size_t v = 0; v < rows.front().size(); ++v) p.video_ids.push_back("v" + std::to_string(v));
    return p;
}

std::vector<FrameFeatureMatrix> random_videos(std::mt19937_64& gen, std::size_t count, std::size_t dim) {
    std::vector<FrameFeatureMatrix> out;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = 5 + gen() % 26;
        out.push_back({"vid" + std::to_string(i), test::random_float_matrix(gen, n, dim)});
    }
    return out;
}

class Predict : public ::testing::Test {
protected:
    std::mt19937_64 gen{41};
    RegressorParams params = init_params(16, std::vector<std::size_t>{24, 8}, 0.1, 5);
    std::vector<FrameFeatureMatrix> videos = random_videos(gen, 12, 8);
};

TEST_F(Predict, SingleRepeatMatchesPredictVideo) {
    const auto p = predict_repeated(params, videos, 5, 1, 99);
    ASSERT_EQ(p.values.rows(), 1u);
    for (std::size_t v = 0; v < videos.size(); ++v) {
        auto rng = make_rng(99, 0, videos[v].video_id);
        EXPECT_EQ(p.values(0, v), predict_video(params, videos[v], 5, rng));
    }
}

TEST_F(Predict, PredictVideoIsPooledForward) {
    auto rng = make_rng(3, 2, videos[0].video_id);
    auto replay = make_rng(3, 2, videos[0].video_id);
    const double got = predict_video(params, videos[0], 5, rng);
    const auto window = sample_sequence(videos[0], 5, replay);
    RngStream unused(0);
    EXPECT_EQ(got, forward(params, pool_concat(window.features), Mode::eval, unused));
}

TEST_F(Predict, ForcedStartGivesConstantColumn) {
    auto exact = videos;
    exact[3].values = test::random_float_matrix(gen, 5, 8);
    const auto p = predict_repeated(params, exact, 5, 10, 7);
    for (std::size_t r = 1; r < 10; ++r) EXPECT_EQ(p.values(r, 3), p.values(0, 3));
}

TEST_F(Predict, ConstantFeatureVideoIsDeterministic) {
    auto flat = videos;
    for (std::size_t i = 0; i < flat[0].values.rows(); ++i)
        for (std::size_t j = 0; j < 8; ++j) flat[0].values(i, j) = 0.25f * static_cast<float>(j);
    const auto p = predict_repeated(params, flat, 5, 10, 8);
    for (std::size_t r = 1; r < 10; ++r) EXPECT_EQ(p.values(r, 0), p.values(0, 0));
}

TEST_F(Predict, ParallelEqualsSequentialBitForBit) {
    const auto seq = predict_repeated(params, videos, 5, 10, 123, Execution::sequential);
    for (unsigned threads : {0u, 1u, 2u, 3u, 7u, 64u}) {
        const auto par = predict_repeated(params, videos, 5, 10, 123, Execution::parallel, threads);
        EXPECT_EQ(par.values, seq.values) << threads << " threads";
        EXPECT_EQ(par.video_ids, seq.video_ids);
    }
}

TEST_F(Predict, ErrorsNameTheVideo) {
    auto bad = videos;
    bad[7].values = test::random_float_matrix(gen, 3, 8);
    try {
        predict_repeated(params, bad, 5, 4, 1);
        FAIL();
    } catch (const TooFewFrames& e) {
        EXPECT_EQ(e.video_id(), bad[7].video_id);
    }
    EXPECT_THROW(predict_repeated(params, videos, 5, 0, 1), ConfigError);
}

TEST_F(Predict, AveragingReducesSpreadAcrossSeeds) {
    const std::size_t seeds = 50;
    std::vector<std::vector<double>> single(videos.size()), averaged10(videos.size());
    for (std::uint64_t s = 0; s < seeds; ++s) {
        const auto one = average_predictions(predict_repeated(params, videos, 5, 1, 1000 + s));
        const auto ten = average_predictions(predict_repeated(params, videos, 5, 10, 1000 + s));
        for (std::size_t v = 0; v < videos.size(); ++v) {
            single[v].push_back(one[v]);
            averaged10[v].push_back(ten[v]);
        }
    }
    for (std::size_t v = 0; v < videos.size(); ++v) {
        EXPECT_LE(test::oracle_spread(averaged10[v]), test::oracle_spread(single[v])) << videos[v].video_id;
    }
}

TEST(Average, Examples) {
    const test::Rows equal(4, std::vector<double>{1.5, 2.5, 4.0});
    EXPECT_EQ(average_predictions(from_rows(equal)), (std::vector<double>{1.5, 2.5, 4.0}));
    test::Rows ramp;
    for (int r = 1; r <= 10; ++r) ramp.push_back({static_cast<double>(r)});
    EXPECT_EQ(average_predictions(from_rows(ramp)), std::vector<double>{5.5});
}

TEST(Average, MatchesOracle) {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rows = test::to_rows(test::random_matrix(gen, 10, 50, 1, 5));
        const auto got = average_predictions(from_rows(rows));
        const auto want = test::oracle_column_means(rows);
        for (std::size_t v = 0; v < 50; ++v) ASSERT_NEAR(got[v], want[v], 1e-12);
    }
}

TEST(PairwiseConsistency, Examples) {
    EXPECT_EQ(pairwise_consistency_rmse(from_rows(test::Rows(5, std::vector<double>{1, 2, 3}))), 0.0);
    const test::Rows two{{1, 2, 3, 4}, {2, 2, 5, 1}};
    EXPECT_NEAR(pairwise_consistency_rmse(from_rows(two)), test::oracle_rmse(two[0], two[1]), 1e-15);
    EXPECT_THROW(pairwise_consistency_rmse(from_rows({{1, 2}})), DataError);
}

TEST(PairwiseConsistency, MatchesOracleAndIgnoresRowOrder) {
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 100; ++trial) {
        auto rows = test::to_rows(test::random_matrix(gen, 4, 20, 1, 5));
        const double got = pairwise_consistency_rmse(from_rows(rows));
        ASSERT_NEAR(got, test::oracle_pairwise_rmse(rows), 1e-12);
        std::shuffle(rows.begin(), rows.end(), gen);
        ASSERT_NEAR(pairwise_consistency_rmse(from_rows(rows)), got, 1e-12);
    }
}

TEST(Ensemble, Examples) {
    const std::vector<double> a{4.0, 1.25, 3.0};
    EXPECT_EQ(ensemble_weighted(a, a), a);
    EXPECT_EQ(ensemble_weighted(std::vector<double>{4.0}, std::vector<double>{2.0}), std::vector<double>{3.5});
    EXPECT_EQ(ensemble_weighted(a, std::vector<double>{9, 9, 9}, {1.0, 0.0}), a);
    EXPECT_THROW(ensemble_weighted(a, std::vector<double>{1.0}), DimensionMismatch);
}

TEST(Ensemble, IdOrderMustMatch) {
    const VideoPredictions a{{"x", "y"}, {1, 2}};
    const VideoPredictions b{{"y", "x"}, {2, 1}};
    EXPECT_THROW(ensemble_weighted(a, b), DataError);
    const auto same = ensemble_weighted(a, VideoPredictions{{"x", "y"}, {3, 4}});
    EXPECT_EQ(same.video_ids, a.video_ids);
    EXPECT_EQ(same.mos, (std::vector<double>{1.5, 2.5}));
}

TEST(Ensemble, CommutesWithAveraging) {
    std::mt19937_64 gen(44);
    const auto ra = test::to_rows(test::random_matrix(gen, 10, 30, 1, 5));
    const auto rb = test::to_rows(test::random_matrix(gen, 10, 30, 1, 5));
    const auto avg_then_mix = ensemble_weighted(average_predictions(from_rows(ra)), average_predictions(from_rows(rb)));
    test::Rows mixed;
    for (std::size_t r = 0; r < 10; ++r) mixed.push_back(ensemble_weighted(ra[r], rb[r]));
    const auto mix_then_avg = average_predictions(from_rows(mixed));
    for (std::size_t v = 0; v < 30; ++v) EXPECT_NEAR(avg_then_mix[v], mix_then_avg[v], 1e-12);
}

TEST(PredictionFiles, RoundTripIsExact) {
    test::TempDir dir("preds");
    std::mt19937_64 gen(45);
    VideoPredictions p;
    for (int i = 0; i < 40; ++i) {
        p.video_ids.push_back("clip_" + std::to_string(i));
        p.mos.push_back(std::uniform_real_distribution<double>(1, 5)(gen));
    }
    write_predictions(dir / "p.csv", p);
    EXPECT_EQ(read_predictions(dir / "p.csv"), p);
    EXPECT_THROW(read_predictions(dir / "absent.csv"), NotFoundError);
}

} // namespace
} // namespace vra
