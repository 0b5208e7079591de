#include <array>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vra/errors.hpp"
#include "vra/sequence_sampler.hpp"

namespace vra {
namespace {

// Independent transcription of the stream derivation.
std::uint64_t ref_fmix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

std::uint64_t ref_fnv(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t ref_first_draw(std::uint64_t seed, std::uint32_t repeat, const std::string& id) {
    std::uint64_t state = ref_fmix(seed);
    state = ref_fmix(state ^ (repeat + 0x9E3779B97F4A7C15ULL));
    state = ref_fmix(state ^ ref_fnv(id));
    return ref_fmix(state + 0x9E3779B97F4A7C15ULL);
}

FrameFeatureMatrix ramp_video(std::size_t n_frames, std::size_t dim, std::string id = "ramp") {
    Matrix<float> m(n_frames, dim);
    for (std::size_t i = 0; i < n_frames; ++i)
        for (std::size_t j = 0; j < dim; ++j) m(i, j) = static_cast<float>(100 * i + j);
    return FrameFeatureMatrix{std::move(id), std::move(m)};
}

TEST(MakeRng, KnownHashes) {
    EXPECT_EQ(fnv1a64(""), 0xCBF29CE484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xAF63DC4C8601EC8CULL);
}

TEST(MakeRng, DeterministicFirstTenDraws) {
    auto a = make_rng(123, 4, "video_7");
    auto b = make_rng(123, 4, "video_7");
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(a.next(), b.next());
    }
    EXPECT_EQ(a.provenance()->video_id, "video_7");
    EXPECT_EQ(a.provenance()->repeat_index, 4u);
}

TEST(MakeRng, MatchesDirectEvaluationOfTheMixing) {
    for (std::uint64_t seed : {0ULL, 1ULL, 0xDEADBEEFULL}) {
        for (std::uint32_t r : {0u, 1u, 9u}) {
            for (const std::string id : {"a", "b", "clip-001"}) {
                EXPECT_EQ(make_rng(seed, r, id).next(), ref_first_draw(seed, r, id));
            }
        }
    }
    const std::uint64_t s = 2023;
    EXPECT_NE(ref_first_draw(s, 0, "a"), ref_first_draw(s, 1, "a"));
    EXPECT_NE(make_rng(s, 0, "a").next(), make_rng(s, 1, "a").next());
    EXPECT_NE(ref_first_draw(s, 0, "a"), ref_first_draw(s, 0, "b"));
    EXPECT_NE(make_rng(s, 0, "a").next(), make_rng(s, 0, "b").next());
}

TEST(RngStream, UniformBelowStaysInRange) {
    RngStream rng(7);
    for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 6ULL, 1000ULL, (1ULL << 63) + 5}) {
        for (int i = 0; i < 1000; ++i) {
            ASSERT_LT(rng.uniform_below(bound), bound);
        }
    }
    EXPECT_THROW(rng.uniform_below(0), ConfigError);
}

TEST(SampleSequence, ForcedStartWhenLengthEqualsFrames) {
    const auto video = ramp_video(5, 3);
    for (std::uint32_t r = 0; r < 50; ++r) {
        auto rng = make_rng(1, r, video.video_id);
        EXPECT_EQ(sample_sequence(video, 5, rng).start, 0u);
    }
}

TEST(SampleSequence, TooFewFramesNamesVideo) {
    const auto video = ramp_video(3, 2, "short_clip");
    auto rng = make_rng(0, 0, video.video_id);
    try {
        sample_sequence(video, 5, rng);
        FAIL();
    } catch (const TooFewFrames& e) {
        EXPECT_EQ(e.video_id(), "short_clip");
    }
}

TEST(SampleSequence, BoundsAndSliceFidelity) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + gen() % 40;
        const std::size_t length = 1 + gen() % n;
        const auto video = ramp_video(n, 4);
        auto rng = make_rng(trial, 0, "x");
        const auto s = sample_sequence(video, length, rng);
        ASSERT_LE(s.start + s.length, n);
        ASSERT_EQ(s.features.rows(), length);
        for (std::size_t i = 0; i < length; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                ASSERT_EQ(s.features(i, j), static_cast<double>(video.values(s.start + i, j)));
    }
}

TEST(SampleSequence, ReproducibleFromProvenance) {
    const auto video = ramp_video(30, 2);
    auto a = make_rng(5, 3, "ramp");
    auto b = make_rng(5, 3, "ramp");
    const auto sa = sample_sequence(video, 5, a);
    const auto sb = sample_sequence(video, 5, b);
    EXPECT_EQ(sa.start, sb.start);
    EXPECT_EQ(sa.features, sb.features);
}

TEST(SampleSequence, UniformStartChiSquare) {
    const auto video = ramp_video(10, 1);
    std::array<double, 6> counts{};
    auto rng = make_rng(77, 0, video.video_id);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        counts[sample_sequence(video, 5, rng).start] += 1.0;
    }
    const double expected = draws / 6.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(5);
    const double p = boost::math::cdf(boost::math::complement(dist, chi2));
    EXPECT_GT(p, 0.001) << "chi2=" << chi2;
}

} // namespace
} // namespace vra
