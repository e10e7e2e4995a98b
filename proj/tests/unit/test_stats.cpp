#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lineage/stats.hpp"

using namespace lineage::analytics;

TEST(Ranks, TiesShareAverage) {
    const std::vector<double> v{10, 20, 20, 5, 20};
    const std::vector<double> expected{2, 4, 4, 1, 4};
    EXPECT_EQ(average_ranks(v), expected);
}

TEST(Spearman, MonotoneIsExactlyOne) {
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(i * 0.37);
        y.push_back(std::exp(i * 0.05) - 3.0);
    }
    EXPECT_EQ(*spearman(x, y), 1.0);
    std::vector<double> neg(y.rbegin(), y.rend());
    EXPECT_EQ(*spearman(x, neg), -1.0);
}

TEST(Spearman, MatchesHandComputedWithTies) {
    // Ranks x: 1, 2.5, 2.5, 4; y: 2, 1, 3, 4.
    const std::vector<double> x{1, 2, 2, 3};
    const std::vector<double> y{5, 4, 6, 7};
    // Pearson of ranks: means 2.5; dx = -1.5, 0, 0, 1.5; dy = -0.5, -1.5, 0.5, 1.5
    const double sxy = 0.75 + 2.25;
    const double sxx = 4.5;
    const double syy = 0.25 + 2.25 + 0.25 + 2.25;
    EXPECT_NEAR(*spearman(x, y), sxy / std::sqrt(sxx * syy), 1e-15);
}

TEST(Spearman, Degenerate) {
    const std::vector<double> c{1, 1, 1, 1};
    const std::vector<double> v{1, 2, 3, 4};
    EXPECT_FALSE(spearman(c, v));
    EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
    EXPECT_THROW(spearman(v, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(Lowess, ReproducesLinearData) {
    std::vector<double> x, y;
    std::mt19937_64 rng{7};
    std::uniform_real_distribution<double> u{0.0, 500.0};
    for (int i = 0; i < 300; ++i) {
        x.push_back(std::floor(u(rng)));
        y.push_back(-0.8 + 0.004 * x.back());
    }
    for (const auto iters : {0, 2, 4}) {
        for (const auto frac : {0.05, 0.3, 1.0}) {
            const auto fit = lowess(x, y, {frac, iters});
            for (std::size_t i = 0; i < x.size(); ++i) {
                ASSERT_NEAR(fit[i], y[i], 1e-9) << "frac " << frac << " iters " << iters;
            }
        }
    }
}

TEST(Lowess, RobustnessDownweightsOutlier) {
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(i);
        y.push_back(i % 2 == 0 ? 0.1 : -0.1);
    }
    y[25] = 50.0;
    const auto plain = lowess(x, y, {0.3, 0});
    const auto robust = lowess(x, y, {0.3, 3});
    EXPECT_GT(plain[25], 1.0);
    EXPECT_LT(std::abs(robust[25]), 0.5);
}

TEST(Lowess, RejectsBadInput) {
    const std::vector<double> four{1, 2, 3, 4};
    EXPECT_THROW(lowess(four, four), std::invalid_argument);
    const std::vector<double> five{1, 2, 3, 4, 5};
    EXPECT_THROW(lowess(five, five, {0.0, 1}), std::invalid_argument);
    EXPECT_THROW(lowess(five, five, {0.5, -1}), std::invalid_argument);
    EXPECT_THROW(lowess(five, four), std::invalid_argument);
}

TEST(Lowess, SharedXSharesValue) {
    const std::vector<double> x{1, 1, 2, 3, 3, 4, 5, 6};
    const std::vector<double> y{0.2, -0.4, 0.1, 0.9, -0.3, 0.0, 0.5, -0.6};
    const auto fit = lowess(x, y, {0.5, 1});
    EXPECT_EQ(fit[0], fit[1]);
    EXPECT_EQ(fit[3], fit[4]);
}
