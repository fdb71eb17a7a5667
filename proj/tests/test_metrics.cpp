#include <random>

#include <gtest/gtest.h>

#include "eqcorr/metrics.hpp"

using namespace eqcorr;

namespace
{
    RejectionSet rejecting(std::vector<std::size_t> idx)
    {
        RejectionSet r;
        r.rejected = std::move(idx);
        return r;
    }
} // namespace

TEST(ScoreReplication, AllNullRejections)
{
    const auto o = score_replication(rejecting({1, 3}), TruthMask::all_null(3));
    EXPECT_EQ(o.false_rejections, 2u);
    EXPECT_EQ(o.rejections, 2u);
    EXPECT_EQ(o.fdp, 1.0);
    EXPECT_TRUE(o.any_false_rejection);
}

TEST(ScoreReplication, NoRejectionsGiveZeroFdp)
{
    const auto o = score_replication(rejecting({}), TruthMask::all_null(4));
    EXPECT_EQ(o.false_rejections, 0u);
    EXPECT_EQ(o.rejections, 0u);
    EXPECT_EQ(o.fdp, 0.0);
    EXPECT_FALSE(o.any_false_rejection);
}

TEST(ScoreReplication, MixedTruth)
{
    const TruthMask truth({true, false}, 2.0);
    const auto o = score_replication(rejecting({1, 2}), truth);
    EXPECT_EQ(o.false_rejections, 1u);
    EXPECT_EQ(o.rejections, 2u);
    EXPECT_EQ(o.fdp, 0.5);
    EXPECT_EQ(o.power, 1.0);
}

TEST(ScoreReplication, OutOfRangeIndex)
{
    EXPECT_THROW(score_replication(rejecting({4}), TruthMask::all_null(3)), domain_error);
    EXPECT_THROW(score_replication(rejecting({0}), TruthMask::all_null(3)), domain_error);
}

TEST(TruthMask, SignalsOnLeadingCoordinates)
{
    const auto t = TruthMask::with_signals(5, 2, 3.0);
    EXPECT_EQ(t.false_nulls(), 2u);
    EXPECT_FALSE(t.is_null(0));
    EXPECT_FALSE(t.is_null(1));
    EXPECT_TRUE(t.is_null(2));
    std::vector<double> x(5, 0.0);
    t.apply_signal(x);
    EXPECT_EQ(x, (std::vector<double>{3, 3, 0, 0, 0}));
    EXPECT_THROW(TruthMask::with_signals(2, 3, 1.0), domain_error);
    EXPECT_THROW(TruthMask::with_signals(2, 1, -1.0), domain_error);
}

TEST(ScoreReplication, GlobalNullFdpEqualsFwerIndicator)
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 5000; ++t)
    {
        const std::size_t n = 1 + t % 20;
        std::vector<std::size_t> idx;
        for (std::size_t i = 1; i <= n; ++i)
            if (rng() % 4 == 0)
                idx.push_back(i);
        const auto o = score_replication(rejecting(idx), TruthMask::all_null(n));
        ASSERT_EQ(o.fdp, o.any_false_rejection ? 1.0 : 0.0);
        ASSERT_LE(o.false_rejections, o.rejections);
    }
}
