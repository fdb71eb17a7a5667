#ifndef EQCORR_METRICS_HPP
#define EQCORR_METRICS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "procedures.hpp"

namespace eqcorr
{
    /// Which hypotheses are true nulls. Non-null coordinates are shifted by
    /// signal_mean at sampling time.
    class TruthMask
    {
    public:
        TruthMask() = default;

        TruthMask(std::vector<bool> is_null, double signal_mean)
            : m_is_null(std::move(is_null)), m_signal_mean(signal_mean)
        {
            if (!(signal_mean >= 0.0))
                throw domain_error("TruthMask: signal mean must be non-negative");
            for (bool b : m_is_null)
                m_false_nulls += b ? 0 : 1;
        }

        static TruthMask all_null(std::size_t n) { return {std::vector<bool>(n, true), 0.0}; }

        /// The first `false_nulls` coordinates carry the signal.
        static TruthMask with_signals(std::size_t n, std::size_t false_nulls, double mean)
        {
            if (false_nulls > n)
                throw domain_error("TruthMask: more false nulls than hypotheses");
            std::vector<bool> mask(n, true);
            for (std::size_t i = 0; i < false_nulls; ++i)
                mask[i] = false;
            return {std::move(mask), mean};
        }

        std::size_t size() const noexcept { return m_is_null.size(); }
        bool is_null(std::size_t i) const { return m_is_null.at(i); }
        double signal_mean() const noexcept { return m_signal_mean; }
        std::size_t false_nulls() const noexcept { return m_false_nulls; }
        bool global_null() const noexcept { return m_false_nulls == 0; }

        /// Adds the signal mean to the non-null coordinates of x.
        void apply_signal(std::span<double> x) const
        {
            if (m_false_nulls == 0 || m_signal_mean == 0.0)
                return;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (!m_is_null[i])
                    x[i] += m_signal_mean;
        }

    private:
        std::vector<bool> m_is_null;
        double m_signal_mean = 0.0;
        std::size_t m_false_nulls = 0;
    };

    struct ReplicationOutcome
    {
        std::size_t false_rejections = 0; ///< V
        std::size_t rejections = 0;       ///< R
        bool any_false_rejection = false;
        double fdp = 0.0;
        /// Rejected false nulls over all false nulls; 0 when there are none.
        double power = 0.0;
    };

    inline ReplicationOutcome score_replication(const RejectionSet& rej, const TruthMask& truth)
    {
        const std::size_t n = truth.size();
        ReplicationOutcome out;
        std::size_t true_discoveries = 0;
        for (std::size_t idx : rej.rejected)
        {
            if (idx < 1 || idx > n)
                throw domain_error("score_replication: rejected index " + std::to_string(idx) +
                                   " outside 1.." + std::to_string(n));
            if (truth.is_null(idx - 1))
                ++out.false_rejections;
            else
                ++true_discoveries;
        }
        out.rejections = rej.rejected.size();
        out.any_false_rejection = out.false_rejections > 0;
        if (out.rejections > 0)
            out.fdp = static_cast<double>(out.false_rejections) / static_cast<double>(out.rejections);
        if (truth.false_nulls() > 0)
            out.power = static_cast<double>(true_discoveries) / static_cast<double>(truth.false_nulls());
        return out;
    }
} // namespace eqcorr

#endif // EQCORR_METRICS_HPP
