#ifndef EQCORR_RANDOM_STREAM_HPP
#define EQCORR_RANDOM_STREAM_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>

namespace eqcorr
{
    /// 64-bit FNV-1a over bytes; used to turn canonical text keys into words.
    constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : bytes)
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Identifies the family of cells that share random numbers. Procedures
    /// are deliberately not part of it, so every procedure evaluated on the
    /// same (n, rho, alpha) sees the same samples.
    struct CellId
    {
        std::uint64_t n = 0;
        double rho = 0.0;
        double alpha = 0.0;

        /// Canonical text form. Hex floats make the encoding exact and
        /// independent of locale and byte order.
        std::string canonical() const
        {
            char buf[128];
            std::snprintf(buf, sizeof buf, "n=%llu;rho=%a;alpha=%a", static_cast<unsigned long long>(n), rho,
                          alpha);
            return buf;
        }

        std::uint64_t hash() const { return fnv1a64(canonical()); }

        friend bool operator==(const CellId&, const CellId&) = default;
    };

    struct StreamKey
    {
        std::uint64_t master_seed = 0;
        std::uint64_t cell_hash = 0;
        std::uint64_t replication_index = 0;

        friend bool operator==(const StreamKey&, const StreamKey&) = default;
    };

    /// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
    /// as easy as 1, 2, 3", SC'11). Pure: counter and key in, four words out.
    class Philox4x32
    {
    public:
        using counter_type = std::array<std::uint32_t, 4>;
        using key_type = std::array<std::uint32_t, 2>;

        static constexpr counter_type block(counter_type ctr, key_type key) noexcept
        {
            for (int round = 0; round < 10; ++round)
            {
                ctr = single_round(ctr, key);
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            return ctr;
        }

    private:
        static constexpr counter_type single_round(const counter_type& c, const key_type& k) noexcept
        {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        }
    };

    /// Reproducible stream of uniforms and normals for one replication.
    ///
    /// The Philox key comes from (master seed, cell); the replication index
    /// occupies the upper counter words and a block index the lower ones, so
    /// draw j of replication r is a pure function of the key. Values are
    /// assembled from 32-bit words in a fixed order, independent of host
    /// endianness.
    class RandomStream
    {
    public:
        explicit RandomStream(const StreamKey& key) noexcept
        {
            const std::uint64_t k = splitmix64(key.master_seed ^ splitmix64(key.cell_hash));
            m_key = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
            m_rep_lo = static_cast<std::uint32_t>(key.replication_index);
            m_rep_hi = static_cast<std::uint32_t>(key.replication_index >> 32);
        }

        std::uint64_t next_u64() noexcept
        {
            if (m_word == 4)
                refill();
            const std::uint64_t lo = m_buf[m_word];
            const std::uint64_t hi = m_buf[m_word + 1];
            m_word += 2;
            return (hi << 32) | lo;
        }

        /// Uniform on the open interval (0, 1), 53-bit resolution.
        double next_uniform() noexcept
        {
            return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        }

        /// Standard normal by the Box-Muller transform; the second variate of
        /// each pair is cached.
        double next_normal() noexcept
        {
            if (m_has_spare)
            {
                m_has_spare = false;
                return m_spare;
            }
            const double u1 = next_uniform();
            const double u2 = next_uniform();
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * std::numbers::pi * u2;
            m_spare = radius * std::sin(angle);
            m_has_spare = true;
            return radius * std::cos(angle);
        }

    private:
        void refill() noexcept
        {
            const Philox4x32::counter_type ctr = {static_cast<std::uint32_t>(m_block),
                                                  static_cast<std::uint32_t>(m_block >> 32), m_rep_lo, m_rep_hi};
            m_buf = Philox4x32::block(ctr, m_key);
            ++m_block;
            m_word = 0;
        }

        Philox4x32::key_type m_key{};
        std::uint32_t m_rep_lo = 0;
        std::uint32_t m_rep_hi = 0;
        std::uint64_t m_block = 0;
        Philox4x32::counter_type m_buf{};
        int m_word = 4;
        bool m_has_spare = false;
        double m_spare = 0.0;
    };

    inline RandomStream derive_stream(const StreamKey& key) noexcept { return RandomStream(key); }
} // namespace eqcorr

#endif // EQCORR_RANDOM_STREAM_HPP
