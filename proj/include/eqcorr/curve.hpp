#ifndef EQCORR_CURVE_HPP
#define EQCORR_CURVE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace eqcorr
{
    enum class Curvature
    {
        concave,
        convex,
        mixed,
    };

    constexpr std::string_view to_string(Curvature c) noexcept
    {
        switch (c)
        {
        case Curvature::concave: return "concave";
        case Curvature::convex: return "convex";
        case Curvature::mixed: return "mixed";
        }
        return "?";
    }

    /// L(rho) = alpha (1 - rho).
    constexpr double reference_line(double alpha, double rho) noexcept { return alpha * (1.0 - rho); }

    inline std::vector<double> second_differences(std::span<const double> values)
    {
        std::vector<double> d;
        if (values.size() < 3)
            return d;
        d.reserve(values.size() - 2);
        for (std::size_t i = 1; i + 1 < values.size(); ++i)
            d.push_back(values[i + 1] - 2.0 * values[i] + values[i - 1]);
        return d;
    }

    inline bool is_uniform_grid(std::span<const double> grid, double tol = 1e-9)
    {
        if (grid.size() < 2)
            return true;
        const double step = grid[1] - grid[0];
        if (!(step > 0.0))
            return false;
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (std::abs((grid[i] - grid[i - 1]) - step) > tol)
                return false;
        return true;
    }

    /// Concave when every second difference is below -4 * noise_scale, convex
    /// when every one is above +4 * noise_scale, mixed otherwise.
    inline Curvature classify_curvature(std::span<const double> grid, std::span<const double> values,
                                        double noise_scale)
    {
        if (values.size() < 3)
            throw domain_error("classify_curvature: need at least 3 points");
        if (grid.size() != values.size())
            throw domain_error("classify_curvature: grid and values differ in length");
        if (!is_uniform_grid(grid))
            throw domain_error("classify_curvature: grid must be uniform and increasing");
        if (!(noise_scale >= 0.0))
            throw domain_error("classify_curvature: noise scale must be non-negative");

        const auto d = second_differences(values);
        const double band = 4.0 * noise_scale;
        bool all_concave = true;
        bool all_convex = true;
        for (double v : d)
        {
            all_concave = all_concave && v < -band;
            all_convex = all_convex && v > band;
        }
        if (all_concave)
            return Curvature::concave;
        if (all_convex)
            return Curvature::convex;
        return Curvature::mixed;
    }

    /// Estimates along a rho grid for one (procedure, n, alpha, metric, source).
    struct CurveSummary
    {
        Procedure procedure = Procedure::bonferroni;
        std::size_t n = 0;
        double alpha = 0.0;
        Metric metric = Metric::fwer;
        bool oracle = false;

        std::vector<double> rho_grid;
        std::vector<double> values;
        std::vector<double> std_errors; ///< zeros for oracle curves
        std::vector<double> second_differences;
        /// Classified over the interior points 0 < rho < 1 when they form a
        /// uniform grid of at least 3 points; empty otherwise.
        std::optional<Curvature> curvature;
        std::vector<double> reference_gap; ///< values - L(rho)
    };

    /// Fills the derived fields of a curve from its grid and values. The noise
    /// scale is the oracle tolerance for oracle curves and max SE * sqrt 6 for
    /// Monte Carlo curves.
    inline void summarize_curve(CurveSummary& c, double oracle_noise)
    {
        c.second_differences = eqcorr::second_differences(c.values);
        c.reference_gap.resize(c.values.size());
        for (std::size_t i = 0; i < c.values.size(); ++i)
            c.reference_gap[i] = c.values[i] - reference_line(c.alpha, c.rho_grid[i]);

        std::vector<double> grid, vals;
        double max_se = 0.0;
        for (std::size_t i = 0; i < c.values.size(); ++i)
        {
            if (c.rho_grid[i] > 0.0 && c.rho_grid[i] < 1.0)
            {
                grid.push_back(c.rho_grid[i]);
                vals.push_back(c.values[i]);
                if (i < c.std_errors.size())
                    max_se = std::max(max_se, c.std_errors[i]);
            }
        }
        c.curvature.reset();
        if (grid.size() >= 3 && is_uniform_grid(grid))
            c.curvature = classify_curvature(grid, vals, c.oracle ? oracle_noise : max_se * std::sqrt(6.0));
    }
} // namespace eqcorr

#endif // EQCORR_CURVE_HPP
