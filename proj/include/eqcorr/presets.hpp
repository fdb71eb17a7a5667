#ifndef EQCORR_PRESETS_HPP
#define EQCORR_PRESETS_HPP

#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace eqcorr
{
    /// n values simulated and checked against the oracle in figure presets.
    inline const std::vector<std::size_t> figure_n_ladder = {2, 10, 100, 1000};
    /// Larger n evaluated by the oracle only, for the convexity picture.
    inline const std::vector<std::size_t> figure_oracle_only_n = {10000, 100000};

    struct Preset
    {
        std::string name;
        std::string description;
        std::vector<ExperimentConfig> configs;
    };

    namespace detail
    {
        inline std::string short_alpha(double alpha)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", alpha);
            return buf;
        }

        inline Preset figure_fwer(std::string name, double alpha)
        {
            ExperimentConfig main;
            main.procedures = {Procedure::bonferroni};
            main.n_list = figure_n_ladder;
            main.alpha_list = {alpha};
            main.mode = RunMode::both;

            ExperimentConfig tail = main;
            tail.n_list = figure_oracle_only_n;
            tail.mode = RunMode::oracle;
            return {std::move(name), "Bonferroni FWER against rho at alpha = " + short_alpha(alpha), {main, tail}};
        }

        inline Preset figure_fdr(std::string name, double alpha)
        {
            ExperimentConfig main;
            main.procedures = {Procedure::bh};
            main.n_list = figure_n_ladder;
            main.alpha_list = {alpha};
            main.mode = RunMode::both;
            return {std::move(name), "BH FDR against rho at alpha = " + short_alpha(alpha), {main}};
        }

        inline Preset correction_power()
        {
            ExperimentConfig c;
            c.procedures = {Procedure::bonferroni, Procedure::corrected_bonferroni};
            c.n_list = {100};
            c.rho_grid = {0.0, 0.25, 0.5, 0.75};
            c.alpha_list = {0.05};
            c.reps = 10000;
            c.mode = RunMode::mc;
            c.signal = SignalSpec{5, 3.0};
            return {"correction-power", "power of Bonferroni at alpha versus alpha / (1 - rho_hat)", {c}};
        }
    } // namespace detail

    inline std::vector<Preset> all_presets()
    {
        return {
            detail::figure_fwer("figure-fwer-alpha01", 0.01),
            detail::figure_fwer("figure-fwer-alpha05", 0.05),
            detail::figure_fwer("figure-fwer-alpha10", 0.1),
            detail::figure_fdr("figure-fdr-alpha01", 0.01),
            detail::figure_fdr("figure-fdr-alpha05", 0.05),
            detail::figure_fdr("figure-fdr-alpha10", 0.1),
            detail::correction_power(),
        };
    }

    /// The six figure families (three levels, FWER and FDR).
    inline std::vector<std::string> figure_preset_names()
    {
        return {"figure-fwer-alpha01", "figure-fwer-alpha05", "figure-fwer-alpha10",
                "figure-fdr-alpha01",  "figure-fdr-alpha05",  "figure-fdr-alpha10"};
    }

    struct PresetOverrides
    {
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> reps;
        std::optional<std::string> output_dir;
    };

    inline std::optional<Preset> find_preset(std::string_view name, const PresetOverrides& o = {})
    {
        for (auto p : all_presets())
        {
            if (p.name != name)
                continue;
            for (auto& c : p.configs)
            {
                if (o.seed)
                    c.master_seed = *o.seed;
                if (o.reps)
                    c.reps = *o.reps;
                c.output_dir = o.output_dir ? *o.output_dir : "results/" + p.name;
                validate(c);
            }
            return p;
        }
        return std::nullopt;
    }
} // namespace eqcorr

#endif // EQCORR_PRESETS_HPP
