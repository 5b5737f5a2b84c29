#include <bzlab/kpoint.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace bzlab;

TEST(KPoint, WrapsToHalfOpenInterval)
{
    EXPECT_EQ(wrap_coordinate(0.5), -0.5);
    EXPECT_EQ(wrap_coordinate(-0.5), -0.5);
    EXPECT_EQ(wrap_coordinate(0.25), 0.25);
    EXPECT_EQ(wrap_coordinate(1.0), 0.0);
    EXPECT_DOUBLE_EQ(wrap_coordinate(2.75), -0.25);
    EXPECT_DOUBLE_EQ(wrap_coordinate(-3.3), -0.3);
}

TEST(KPoint, WrapIsIdempotent)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_coordinate(u(rng));
        EXPECT_GE(w, -0.5);
        EXPECT_LT(w, 0.5);
        EXPECT_EQ(wrap_coordinate(w), w);
    }
}

TEST(KPoint, IntegerShiftGivesSamePoint)
{
    const FracKPoint k{0.125, -0.375};
    const int shift[] = {3, -2};
    EXPECT_EQ(k.shifted(shift), k);
    EXPECT_EQ((FracKPoint{1.125, 4.625}), k);
}

TEST(KPoint, RejectsBadDimension)
{
    EXPECT_THROW((FracKPoint{0.1, 0.2, 0.3, 0.4}), InvalidArgument);
    EXPECT_THROW(FracKPoint(std::span<const double>{}), InvalidArgument);
}
