#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "eqcorr/monte_carlo.hpp"
#include "eqcorr/random_stream.hpp"
#include "eqcorr/sampler.hpp"

using namespace eqcorr;

namespace
{
    StreamKey key(std::uint64_t seed, std::uint64_t rep, double rho = 0.5)
    {
        return {seed, CellId{10, rho, 0.05}.hash(), rep};
    }

    double correlation(const std::vector<double>& a, const std::vector<double>& b)
    {
        const double n = static_cast<double>(a.size());
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            ma += a[i];
            mb += b[i];
        }
        ma /= n;
        mb /= n;
        double sab = 0, saa = 0, sbb = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        return sab / std::sqrt(saa * sbb);
    }
} // namespace

TEST(Philox, KnownAnswerVectors)
{
    // Random123 kat_vectors, philox4x32_10.
    using C = Philox4x32::counter_type;
    using K = Philox4x32::key_type;
    EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(DeriveStream, IdenticalKeysGiveIdenticalDraws)
{
    auto a = derive_stream(key(42, 7));
    auto b = derive_stream(key(42, 7));
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(a.next_u64(), b.next_u64());
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(a.next_normal(), b.next_normal());
}

TEST(DeriveStream, ReplicationStreamsLookStandardNormal)
{
    // Each replication index gets its own stream; pool one draw from each.
    constexpr int m = 10000;
    double sum = 0, sum_sq = 0;
    for (int r = 0; r < m; ++r)
    {
        auto s = derive_stream(key(1, static_cast<std::uint64_t>(r)));
        const double z = s.next_normal();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / m;
    const double var = sum_sq / m - mean * mean;
    EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(m));
    // Var of the sample variance is 2/m for normals.
    EXPECT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / m));
}

TEST(DeriveStream, SeedsDoNotCollide)
{
    std::set<std::uint64_t> first;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        first.insert(derive_stream(key(seed, 0)).next_u64());
    EXPECT_EQ(first.size(), 100u);
}

TEST(DeriveStream, UniformsAreInOpenUnitInterval)
{
    auto s = derive_stream(key(3, 3));
    for (int i = 0; i < 100000; ++i)
    {
        const double u = s.next_uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(CellId, CanonicalEncodingIsExact)
{
    EXPECT_EQ((CellId{10, 0.5, 0.05}.canonical()), "n=10;rho=0x1p-1;alpha=0x1.999999999999ap-5");
    EXPECT_NE((CellId{10, 0.5, 0.05}.hash()), (CellId{10, std::nextafter(0.5, 1.0), 0.05}.hash()));
}

TEST(SampleEquicorr, DegenerateRhoGivesConstantVector)
{
    auto s = derive_stream(key(5, 0, 1.0));
    const auto x = sample_equicorr(17, Rho(1.0), s);
    ASSERT_EQ(x.size(), 17u);
    for (double v : x.values)
        EXPECT_EQ(v, x.values[0]);
    // Only the factor was drawn: a fresh stream's first normal equals it.
    auto t = derive_stream(key(5, 0, 1.0));
    EXPECT_EQ(t.next_normal(), x.values[0]);
}

TEST(SampleEquicorr, DeterministicForEqualKeys)
{
    auto a = derive_stream(key(9, 11));
    auto b = derive_stream(key(9, 11));
    EXPECT_EQ(sample_equicorr(50, Rho(0.3), a).values, sample_equicorr(50, Rho(0.3), b).values);
}

TEST(SampleEquicorr, RejectsEmptyAndBadRho)
{
    auto s = derive_stream(key(1, 1));
    EXPECT_THROW(sample_equicorr(0, Rho(0.2), s), domain_error);
    EXPECT_THROW(Rho(-0.01), domain_error);
    EXPECT_THROW(Rho(1.5), domain_error);
}

class PairCorrelation : public ::testing::TestWithParam<double>
{
};

TEST_P(PairCorrelation, SampleCorrelationMatchesRho)
{
    const double rho = GetParam();
    constexpr std::size_t m = 100000;
    std::vector<double> a(m), b(m);
    const auto cell = CellId{2, rho, 0.05}.hash();
    for (std::size_t r = 0; r < m; ++r)
    {
        RandomStream s({2024, cell, r});
        const auto x = sample_equicorr(2, Rho(rho), s);
        a[r] = x.values[0];
        b[r] = x.values[1];
    }
    // Asymptotic SD of a sample correlation is (1 - rho^2) / sqrt(m).
    EXPECT_NEAR(correlation(a, b), rho, 4.0 * (1.0 - rho * rho) / std::sqrt(static_cast<double>(m)));
}

INSTANTIATE_TEST_SUITE_P(Rhos, PairCorrelation, ::testing::Values(0.0, 0.5));

TEST(SampleEquicorr, CoordinatesAreExchangeable)
{
    constexpr std::size_t m = 100000, n = 5;
    std::vector<double> mean(n, 0.0), sq(n, 0.0);
    const auto cell = CellId{n, 0.4, 0.05}.hash();
    std::vector<double> x(n);
    for (std::size_t r = 0; r < m; ++r)
    {
        RandomStream s({77, cell, r});
        sample_equicorr_into(x, Rho(0.4), s);
        for (std::size_t i = 0; i < n; ++i)
        {
            mean[i] += x[i];
            sq[i] += x[i] * x[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        EXPECT_LT(std::abs(mean[i] / m), 4.0 / std::sqrt(static_cast<double>(m))) << i;
        EXPECT_NEAR(sq[i] / m, 1.0, 4.0 * std::sqrt(2.0 / m)) << i;
    }
}

TEST(EstimateRho, ClampsAtBothEnds)
{
    EXPECT_DOUBLE_EQ(estimate_rho_raw(std::vector<double>{1.0, -1.0}), -1.0);
    EXPECT_EQ(estimate_rho(std::vector<double>{1.0, -1.0}).value(), 0.0);
    EXPECT_DOUBLE_EQ(estimate_rho_raw(std::vector<double>{1.0, 1.0}), 1.0);
    EXPECT_EQ(estimate_rho(std::vector<double>{1.0, 1.0}).value(), 1.0 - 1e-6);
    EXPECT_THROW(estimate_rho(std::vector<double>{0.3}), domain_error);
}

TEST(EstimateRho, SingleVectorTracksTheRealizedFactor)
{
    // Within one vector the common factor Z never averages out: the
    // estimate converges to rho * Z^2, not rho. Z is the first normal of the
    // replication's stream, so it can be recovered exactly.
    constexpr std::size_t n = 10000;
    const double rho = 0.5;
    const auto cell = CellId{n, rho, 0.05}.hash();
    std::vector<double> x(n);
    int tracks_factor = 0, near_rho = 0;
    for (std::uint64_t t = 0; t < 100; ++t)
    {
        RandomStream s({31337, cell, t});
        sample_equicorr_into(x, Rho(rho), s);
        RandomStream replay({31337, cell, t});
        const double z = replay.next_normal();
        const double est = estimate_rho_raw(x);
        tracks_factor += std::abs(est - rho * z * z) < 0.05 ? 1 : 0;
        near_rho += std::abs(est - rho) < 0.05 ? 1 : 0;
    }
    EXPECT_GE(tracks_factor, 99);
    // Spread around rho itself is about rho * sqrt 2; most trials miss 0.05.
    EXPECT_LT(near_rho, 50);
}

TEST(EstimateRho, MeanOverReplicationsIsConsistent)
{
    constexpr std::size_t n = 100, m = 10000;
    const double rho = 0.3;
    const auto cell = CellId{n, rho, 0.05}.hash();
    std::vector<double> x(n), est(m);
    for (std::size_t r = 0; r < m; ++r)
    {
        RandomStream s({8, cell, r});
        sample_equicorr_into(x, Rho(rho), s);
        est[r] = estimate_rho_raw(x);
    }
    const double mean = pairwise_sum(est) / m;
    const double se = sample_standard_error(est);
    EXPECT_LT(std::abs(mean - rho), 3.0 * se);
}
