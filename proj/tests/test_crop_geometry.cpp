#include <random>

#include <gtest/gtest.h>

#include "vra/crop_geometry.hpp"
#include "vra/errors.hpp"

namespace vra {
namespace {

TEST(ScaleBbox, Examples) {
    EXPECT_EQ(scale_bbox({10, 10, 30, 30}, 1.3, 100, 100), (BBox{7, 7, 33, 33}));
    EXPECT_EQ(scale_bbox({0, 0, 50, 50}, 1.3, 60, 60), (BBox{0, 0, 57.5, 57.5}));
    const BBox box{12.5, 3.25, 40, 90};
    EXPECT_EQ(scale_bbox(box, 1.0, 1000, 1000), box);
}

TEST(ScaleBbox, Errors) {
    EXPECT_THROW(scale_bbox({10, 10, 10, 30}, 1.3, 100, 100), DataError);
    EXPECT_THROW(scale_bbox({10, 10, 30, 30}, 0.0, 100, 100), ConfigError);
    EXPECT_THROW(scale_bbox({10, 10, 30, 30}, 1.3, 0, 100), ConfigError);
    EXPECT_THROW(scale_bbox({200, 200, 230, 230}, 1.3, 100, 100), DataError);
}

TEST(ScaleBbox, CenterAndContainment) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> pos(300, 600), size(1, 100), factor(1, 2);
    for (int i = 0; i < 500; ++i) {
        const double x = pos(gen), y = pos(gen);
        const BBox b{x, y, x + size(gen), y + size(gen)};
        const double f = factor(gen);
        const auto s = scale_bbox(b, f, 1000, 1000);
        ASSERT_NEAR((s.x1 + s.x2) / 2, (b.x1 + b.x2) / 2, 1e-9);
        ASSERT_NEAR((s.y1 + s.y2) / 2, (b.y1 + b.y2) / 2, 1e-9);
        ASSERT_NEAR(s.width(), f * b.width(), 1e-9);
        ASSERT_LE(s.x1, b.x1);
        ASSERT_LE(s.y1, b.y1);
        ASSERT_GE(s.x2, b.x2);
        ASSERT_GE(s.y2, b.y2);
        ASSERT_TRUE(s.valid());
    }
}

TEST(ScaleBbox, FullImageIsFixed) {
    const BBox full{0, 0, 640, 480};
    for (double f : {1.0, 1.3, 2.0, 10.0}) EXPECT_EQ(scale_bbox(full, f, 640, 480), full);
}

TEST(RoundOutward, FloorsMinsCeilsMaxes) {
    EXPECT_EQ(round_outward({7.2, 6.9, 32.1, 33.0}), (BBox{7, 6, 33, 33}));
    EXPECT_EQ(round_outward({-0.5, 0, 1, 1.5}), (BBox{-1, 0, 1, 2}));
}

} // namespace
} // namespace vra
