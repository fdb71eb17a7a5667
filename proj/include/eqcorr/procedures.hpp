#ifndef EQCORR_PROCEDURES_HPP
#define EQCORR_PROCEDURES_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "normal.hpp"
#include "sampler.hpp"
#include "types.hpp"

/// Bonferroni, Holm and Benjamini-Hochberg as pure functions from one
/// observation (or p-value) vector to a rejection set. Tests are one-sided:
/// hypothesis i is evidence against the null when X_i is large, with
/// p-value P_i = Phi(-X_i).
namespace eqcorr
{
    struct PValueVector
    {
        std::vector<double> values;
        bool derived = false; ///< computed as Phi(-X_i) from observations

        std::size_t size() const noexcept { return values.size(); }
    };

    struct RejectionSet
    {
        /// 1-based hypothesis indices, ascending.
        std::vector<std::size_t> rejected;
        /// Thresholds that decided the outcome: the z cutoff for Bonferroni
        /// (plus the corrected level for the corrected variant), the p-value
        /// threshold of the last accepted step for Holm and BH.
        std::vector<double> cutoff_trace;
        Procedure procedure = Procedure::bonferroni;
        /// Corrected Bonferroni only: the corrected level hit its ceiling.
        bool alpha_clamped = false;

        std::size_t count() const noexcept { return rejected.size(); }
        bool any() const noexcept { return !rejected.empty(); }
    };

    namespace detail
    {
        inline void require_length(std::size_t got, std::size_t n, const char* what)
        {
            if (n == 0)
                throw domain_error(std::string(what) + ": n must be at least 1");
            if (got != n)
                throw domain_error(std::string(what) + ": input length " + std::to_string(got) +
                                   " does not match n = " + std::to_string(n));
        }

        inline void require_pvalues(std::span<const double> p, const char* what)
        {
            for (double v : p)
                if (!(v >= 0.0 && v <= 1.0))
                    throw domain_error(std::string(what) + ": p-values must lie in [0, 1]");
        }

        /// 0-based indices of p-values <= alpha, ordered by (p, index). No
        /// Holm or BH threshold exceeds alpha, so only these can be rejected
        /// and their ranks here are their global ranks.
        inline std::vector<std::size_t> ordered_candidates(std::span<const double> p, double alpha)
        {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < p.size(); ++i)
                if (p[i] <= alpha)
                    idx.push_back(i);
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
            return idx;
        }

        inline std::vector<std::size_t> first_k_one_based(const std::vector<std::size_t>& ordered, std::size_t k)
        {
            std::vector<std::size_t> out(ordered.begin(), ordered.begin() + static_cast<std::ptrdiff_t>(k));
            std::sort(out.begin(), out.end());
            for (auto& i : out)
                ++i;
            return out;
        }
    } // namespace detail

    /// z_{1 - alpha/n}, computed from the upper tail so alpha/n = 1e-7 keeps
    /// full precision.
    inline double bonferroni_cutoff(Alpha alpha, std::size_t n)
    {
        if (n == 0)
            throw domain_error("bonferroni_cutoff: n must be at least 1");
        return normal_upper_quantile(alpha.value() / static_cast<double>(n));
    }

    inline RejectionSet reject_above(std::span<const double> x, double cutoff, Procedure tag)
    {
        RejectionSet out;
        out.procedure = tag;
        out.cutoff_trace = {cutoff};
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] > cutoff)
                out.rejected.push_back(i + 1);
        return out;
    }

    inline RejectionSet bonferroni_reject(std::span<const double> x, Alpha alpha, std::size_t n)
    {
        detail::require_length(x.size(), n, "bonferroni_reject");
        return reject_above(x, bonferroni_cutoff(alpha, n), Procedure::bonferroni);
    }

    inline RejectionSet bonferroni_reject(const SampleVector& x, Alpha alpha, std::size_t n)
    {
        return bonferroni_reject(std::span<const double>(x.values), alpha, n);
    }

    inline constexpr double default_corrected_alpha_ceiling = 0.5;

    /// Corrected level alpha / (1 - rho_hat). When that reaches 1 the level is
    /// replaced by the ceiling (never below alpha itself) and the result is
    /// flagged.
    inline double corrected_alpha(Alpha alpha, Rho rho_hat, double ceiling, bool* clamped = nullptr)
    {
        if (rho_hat.value() > 1.0 - rho_hat_upper_margin)
            throw domain_error("corrected_bonferroni: rho_hat must lie in [0, 1 - 1e-6]");
        if (!(ceiling > 0.0 && ceiling < 1.0))
            throw domain_error("corrected_bonferroni: alpha ceiling must lie in (0, 1)");
        const double level = alpha.value() / (1.0 - rho_hat.value());
        const bool hit = !(level < 1.0);
        if (clamped)
            *clamped = hit;
        return hit ? std::max(ceiling, alpha.value()) : level;
    }

    inline RejectionSet corrected_bonferroni_reject(std::span<const double> x, Alpha alpha, std::size_t n, Rho rho_hat,
                                                    double ceiling = default_corrected_alpha_ceiling)
    {
        detail::require_length(x.size(), n, "corrected_bonferroni_reject");
        bool clamped = false;
        const double level = corrected_alpha(alpha, rho_hat, ceiling, &clamped);
        auto out = reject_above(x, bonferroni_cutoff(Alpha(level), n), Procedure::corrected_bonferroni);
        out.cutoff_trace.push_back(level);
        out.alpha_clamped = clamped;
        return out;
    }

    inline RejectionSet corrected_bonferroni_reject(const SampleVector& x, Alpha alpha, std::size_t n, Rho rho_hat,
                                                    double ceiling = default_corrected_alpha_ceiling)
    {
        return corrected_bonferroni_reject(std::span<const double>(x.values), alpha, n, rho_hat, ceiling);
    }

    /// Holm step-down: walk the ordered p-values while p_(j) <= alpha/(n-j+1).
    inline RejectionSet holm_reject(std::span<const double> p, Alpha alpha, std::size_t n)
    {
        detail::require_length(p.size(), n, "holm_reject");
        detail::require_pvalues(p, "holm_reject");
        const auto ordered = detail::ordered_candidates(p, alpha.value());

        RejectionSet out;
        out.procedure = Procedure::holm;
        std::size_t k = 0;
        for (; k < ordered.size(); ++k)
        {
            const double threshold = alpha.value() / static_cast<double>(n - k);
            if (p[ordered[k]] > threshold)
                break;
            out.cutoff_trace = {threshold};
        }
        out.rejected = detail::first_k_one_based(ordered, k);
        return out;
    }

    inline RejectionSet holm_reject(const PValueVector& p, Alpha alpha, std::size_t n)
    {
        return holm_reject(std::span<const double>(p.values), alpha, n);
    }

    /// BH threshold j*alpha/n. j = n is exactly alpha, and j = 1 is computed
    /// as alpha/n so it coincides with the Holm and Bonferroni level.
    inline double bh_threshold(double alpha, std::size_t j, std::size_t n) noexcept
    {
        if (j == n)
            return alpha;
        return alpha * static_cast<double>(j) / static_cast<double>(n);
    }

    /// BH step-up: k = max{ j : p_(j) <= j alpha / n }, reject the k smallest.
    inline RejectionSet bh_reject(std::span<const double> p, Alpha alpha, std::size_t n)
    {
        detail::require_length(p.size(), n, "bh_reject");
        detail::require_pvalues(p, "bh_reject");
        const auto ordered = detail::ordered_candidates(p, alpha.value());

        RejectionSet out;
        out.procedure = Procedure::bh;
        std::size_t k = 0;
        for (std::size_t j = ordered.size(); j >= 1; --j)
        {
            const double threshold = bh_threshold(alpha.value(), j, n);
            if (p[ordered[j - 1]] <= threshold)
            {
                k = j;
                out.cutoff_trace = {threshold};
                break;
            }
        }
        out.rejected = detail::first_k_one_based(ordered, k);
        return out;
    }

    inline RejectionSet bh_reject(const PValueVector& p, Alpha alpha, std::size_t n)
    {
        return bh_reject(std::span<const double>(p.values), alpha, n);
    }

    inline void pvalues_from_observations_into(std::span<const double> x, std::vector<double>& out)
    {
        out.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = normal_cdf(-x[i]);
    }

    inline PValueVector pvalues_from_observations(std::span<const double> x)
    {
        PValueVector p;
        p.derived = true;
        pvalues_from_observations_into(x, p.values);
        return p;
    }

    inline PValueVector pvalues_from_observations(const SampleVector& x)
    {
        return pvalues_from_observations(std::span<const double>(x.values));
    }
} // namespace eqcorr

#endif // EQCORR_PROCEDURES_HPP
