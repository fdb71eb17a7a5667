#ifndef EQCORR_SAMPLER_HPP
#define EQCORR_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"
#include "random_stream.hpp"
#include "types.hpp"

namespace eqcorr
{
    /// One replication's z-scores with their provenance.
    struct SampleVector
    {
        std::vector<double> values;
        CellId cell_id;
        std::uint64_t replication_index = 0;

        std::size_t size() const noexcept { return values.size(); }
    };

    /// Fills `out` with X_i = sqrt(rho) Z + sqrt(1 - rho) e_i. The common
    /// factor Z is drawn first, then e_1..e_n in index order. At rho = 1 only
    /// Z is drawn and every coordinate equals it.
    inline void sample_equicorr_into(std::span<double> out, Rho rho, RandomStream& stream)
    {
        if (out.empty())
            throw domain_error("sample_equicorr: n must be at least 1");
        const double z = stream.next_normal();
        if (rho.degenerate())
        {
            for (double& x : out)
                x = z;
            return;
        }
        const double common = std::sqrt(rho.value()) * z;
        const double idio = std::sqrt(1.0 - rho.value());
        for (double& x : out)
            x = common + idio * stream.next_normal();
    }

    inline SampleVector sample_equicorr(std::size_t n, Rho rho, RandomStream& stream)
    {
        SampleVector s;
        s.values.resize(n);
        sample_equicorr_into(s.values, rho, stream);
        return s;
    }

    inline constexpr double rho_hat_upper_margin = 1e-6;

    /// Unclamped method-of-moments estimate ((sum x)^2 - sum x^2) / (n(n-1)),
    /// the average off-diagonal product, which has mean rho when marginals
    /// are standard normal.
    inline double estimate_rho_raw(std::span<const double> x)
    {
        if (x.size() < 2)
            throw domain_error("estimate_rho: need at least two coordinates");
        double sum = 0.0;
        double sum_sq = 0.0;
        for (double v : x)
        {
            sum += v;
            sum_sq += v * v;
        }
        const double n = static_cast<double>(x.size());
        return (sum * sum - sum_sq) / (n * (n - 1.0));
    }

    /// Estimate clamped into [0, 1 - 1e-6] so a correction alpha / (1 - rho)
    /// stays finite and never anti-corrects.
    inline Rho estimate_rho(std::span<const double> x)
    {
        const double raw = estimate_rho_raw(x);
        return Rho(std::clamp(raw, 0.0, 1.0 - rho_hat_upper_margin));
    }

    inline Rho estimate_rho(const SampleVector& x) { return estimate_rho(std::span<const double>(x.values)); }
} // namespace eqcorr

#endif // EQCORR_SAMPLER_HPP
