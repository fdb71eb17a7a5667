#ifndef EQCORR_TYPES_HPP
#define EQCORR_TYPES_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace eqcorr
{
    /// Common pairwise correlation of an equicorrelated vector, in [0, 1].
    class Rho
    {
    public:
        explicit Rho(double value)
            : m_value(value)
        {
            if (!(value >= 0.0 && value <= 1.0))
                throw domain_error("correlation rho must lie in [0, 1]");
        }

        double value() const noexcept { return m_value; }
        bool degenerate() const noexcept { return m_value == 1.0; }

        friend bool operator==(Rho, Rho) = default;

    private:
        double m_value;
    };

    /// Significance level in the open interval (0, 1).
    class Alpha
    {
    public:
        explicit Alpha(double value)
            : m_value(value)
        {
            if (!(value > 0.0 && value < 1.0))
                throw domain_error("significance level alpha must lie in (0, 1)");
        }

        double value() const noexcept { return m_value; }

        friend bool operator==(Alpha, Alpha) = default;

    private:
        double m_value;
    };

    enum class Procedure
    {
        bonferroni,
        holm,
        bh,
        corrected_bonferroni,
    };

    inline constexpr std::array all_procedures = {Procedure::bonferroni, Procedure::holm, Procedure::bh,
                                                  Procedure::corrected_bonferroni};

    constexpr std::string_view to_string(Procedure p) noexcept
    {
        switch (p)
        {
        case Procedure::bonferroni: return "bonferroni";
        case Procedure::holm: return "holm";
        case Procedure::bh: return "bh";
        case Procedure::corrected_bonferroni: return "corrected_bonferroni";
        }
        return "?";
    }

    inline std::optional<Procedure> parse_procedure(std::string_view s) noexcept
    {
        for (auto p : all_procedures)
            if (to_string(p) == s)
                return p;
        return std::nullopt;
    }

    enum class Metric
    {
        fwer,
        fdr,
        power,
    };

    constexpr std::string_view to_string(Metric m) noexcept
    {
        switch (m)
        {
        case Metric::fwer: return "fwer";
        case Metric::fdr: return "fdr";
        case Metric::power: return "power";
        }
        return "?";
    }

    inline std::optional<Metric> parse_metric(std::string_view s) noexcept
    {
        for (auto m : {Metric::fwer, Metric::fdr, Metric::power})
            if (to_string(m) == s)
                return m;
        return std::nullopt;
    }
} // namespace eqcorr

#endif // EQCORR_TYPES_HPP
