#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "eqcorr/eqcorr.hpp"

namespace
{
    using namespace eqcorr;

    bool wants_correction(const ExperimentConfig& c)
    {
        const auto has = [&](Procedure p) { return std::find(c.procedures.begin(), c.procedures.end(), p) != c.procedures.end(); };
        return c.signal && has(Procedure::bonferroni) && has(Procedure::corrected_bonferroni);
    }

    int finish(const RunResult& result, const std::filesystem::path& out,
               const std::vector<CorrectionComparison>& corrections, double seconds)
    {
        const auto paths = write_outputs(result, out, corrections);
        std::size_t failures = 0;
        for (const auto& e : result.audit)
            if (!e.pass)
            {
                ++failures;
                std::cerr << describe(e) << '\n';
            }
        std::cout << "rows: " << result.rows.size() << '\n'
                  << "csv: " << paths.csv.string() << '\n'
                  << "log: " << paths.log.string() << '\n'
                  << "svg files: " << paths.svgs.size() << '\n'
                  << "audit: " << result.audit.size() << " pairs, " << failures << " outside 4 SE\n";
        for (const auto& c : corrections)
            std::cout << describe(c) << '\n';
        std::printf("wall time: %.1f s\n", seconds);
        return 0;
    }

    int cmd_run(const std::string& config_path, std::size_t threads)
    {
        std::ifstream is(config_path);
        if (!is)
            throw io_error("cannot open config file " + config_path);
        std::ostringstream ss;
        ss << is.rdbuf();
        const auto config = parse_config(ss.str());

        const auto t0 = std::chrono::steady_clock::now();
        auto result = run(config, threads);
        std::vector<CorrectionComparison> corrections;
        if (wants_correction(config))
            corrections = compare_correction(config, threads);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return finish(result, config.output_dir, corrections, seconds);
    }

    int cmd_preset(const std::string& name, const PresetOverrides& overrides, std::size_t threads)
    {
        const auto preset = find_preset(name, overrides);
        if (!preset)
        {
            std::cerr << "unknown preset '" << name << "'; available:";
            for (const auto& p : all_presets())
                std::cerr << ' ' << p.name;
            std::cerr << '\n';
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        RunResult merged;
        std::vector<CorrectionComparison> corrections;
        for (const auto& config : preset->configs)
        {
            merge_into(merged, run(config, threads));
            if (wants_correction(config))
            {
                auto c = compare_correction(config, threads);
                corrections.insert(corrections.end(), c.begin(), c.end());
            }
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return finish(merged, preset->configs.front().output_dir, corrections, seconds);
    }

    int cmd_audit(const std::string& csv_path)
    {
        const auto entries = audit_rows(read_csv(csv_path));
        std::size_t failures = 0;
        for (const auto& e : entries)
        {
            failures += e.pass ? 0 : 1;
            std::cout << describe(e) << '\n';
        }
        std::cout << "audit_summary pairs=" << entries.size() << " failures=" << failures << '\n';
        return failures == 0 ? 0 : 1;
    }
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Error rates of Bonferroni, Holm and BH under equicorrelated normal nulls"};
    app.require_subcommand(1);

    std::size_t threads = 1;
    app.add_option("--threads", threads, "worker threads (0 = hardware concurrency); never changes results")
        ->check(CLI::NonNegativeNumber);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
    run_cmd->add_option("config", config_path, "config file")->required();

    std::string preset_name;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::string out_dir;
    bool list = false;
    auto* preset_cmd = app.add_subcommand("preset", "run a built-in figure-reproduction preset");
    preset_cmd->add_option("name", preset_name, "preset name");
    preset_cmd->add_flag("--list", list, "list presets and exit");
    auto* seed_opt = preset_cmd->add_option("--seed", seed, "master seed");
    auto* reps_opt = preset_cmd->add_option("--reps", reps, "replications per cell")->check(CLI::PositiveNumber);
    auto* out_opt = preset_cmd->add_option("--out", out_dir, "output directory");

    std::string csv_path;
    auto* audit_cmd = app.add_subcommand("audit", "re-check Monte Carlo rows against oracle rows in a results CSV");
    audit_cmd->add_option("csv", csv_path, "results CSV")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        if (*run_cmd)
            return cmd_run(config_path, threads);
        if (*preset_cmd)
        {
            if (list || preset_name.empty())
            {
                for (const auto& p : all_presets())
                    std::cout << p.name << "  " << p.description << '\n';
                return preset_name.empty() && !list ? 2 : 0;
            }
            PresetOverrides o;
            if (*seed_opt)
                o.seed = seed;
            if (*reps_opt)
                o.reps = reps;
            if (*out_opt)
                o.output_dir = out_dir;
            return cmd_preset(preset_name, o, threads);
        }
        if (*audit_cmd)
            return cmd_audit(csv_path);
    }
    catch (const config_error& e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const io_error& e)
    {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    }
    catch (const convergence_error& e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
