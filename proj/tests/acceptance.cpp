// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: eqcorr_acceptance [--out DIR] [--skip-sweep]

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eqcorr/eqcorr.hpp"

#ifndef EQCORR_CLI_PATH
#error "EQCORR_CLI_PATH must name the eqcorr executable"
#endif

using namespace eqcorr;
namespace fs = std::filesystem;

namespace
{
    struct Outcome
    {
        bool pass = true;
        std::string summary;
    };

    void info(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
    void info(const char* fmt, ...)
    {
        std::va_list args;
        va_start(args, fmt);
        std::fputs("    ", stdout);
        std::vprintf(fmt, args);
        std::fputc('\n', stdout);
        va_end(args);
        std::fflush(stdout);
    }

    std::string format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
    std::string format(const char* fmt, ...)
    {
        char buf[512];
        std::va_list args;
        va_start(args, fmt);
        std::vsnprintf(buf, sizeof buf, fmt, args);
        va_end(args);
        return buf;
    }

    double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    CellSpec null_cell(Procedure p, std::size_t n, double rho, double alpha, std::size_t reps)
    {
        CellSpec s;
        s.procedure = p;
        s.n = n;
        s.rho = Rho(rho);
        s.alpha = Alpha(alpha);
        s.reps = reps;
        s.master_seed = default_master_seed;
        s.truth = TruthMask::all_null(n);
        return s;
    }

    double z_score(const ErrorEstimate& e, double target)
    {
        return e.std_error > 0 ? std::abs(e.estimate - target) / e.std_error
                               : (e.estimate == target ? 0.0 : INFINITY);
    }

    constexpr std::size_t m = 100000;

    // 1. Closed-form anchors.
    Outcome closed_form_anchors()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const double indep_target = 1.0 - std::pow(1.0 - 0.005, 10);
        const double c = bonferroni_cutoff(Alpha(0.05), 10);
        const auto indep = run_cell(null_cell(Procedure::bonferroni, 10, 0.0, 0.05, m)).fwer;
        const auto full = run_cell(null_cell(Procedure::bonferroni, 10, 1.0, 0.05, m)).fwer;
        const double oracle_indep = fwer_exact(10, Rho(0.0), c);
        const double oracle_full = fwer_exact(10, Rho(1.0), c);
        const double z0 = z_score(indep, indep_target), z1 = z_score(full, 0.005);
        const double elapsed = seconds_since(t0);
        info("rho=0: mc %.6f (SE %.2e, z %.2f) target %.7f oracle error %.1e", indep.estimate, indep.std_error, z0,
             indep_target, std::abs(oracle_indep - indep_target));
        info("rho=1: mc %.6f (SE %.2e, z %.2f) target 0.005 oracle error %.1e", full.estimate, full.std_error, z1,
             std::abs(oracle_full - 0.005));
        const bool pass = z0 < 3 && z1 < 3 && std::abs(oracle_indep - indep_target) <= 1e-9 &&
                          std::abs(oracle_full - 0.005) <= 1e-9 && elapsed < 60;
        return {pass, format("closed-form anchors within 3 SE, oracle within 1e-9 (%.1f s, limit 60 s)", elapsed)};
    }

    // 2. Oracle / Monte Carlo agreement over 45 Bonferroni cells.
    Outcome oracle_mc_agreement()
    {
        const auto t0 = std::chrono::steady_clock::now();
        std::size_t cells = 0, beyond4 = 0, band34 = 0;
        double worst = 0.0;
        for (std::size_t n : {2u, 10u, 100u})
            for (double rho : {0.0, 0.2, 0.5, 0.8, 1.0})
                for (double alpha : {0.01, 0.05, 0.1})
                {
                    const auto e = run_cell(null_cell(Procedure::bonferroni, n, rho, alpha, m)).fwer;
                    const double exact = fwer_exact(n, Rho(rho), bonferroni_cutoff(Alpha(alpha), n));
                    const double z = z_score(e, exact);
                    ++cells;
                    worst = std::max(worst, z);
                    beyond4 += z > 4 ? 1 : 0;
                    band34 += z > 3 && z <= 4 ? 1 : 0;
                    if (z > 3)
                        info("n=%zu rho=%.1f alpha=%.2f: mc %.6f oracle %.6f z %.2f", n, rho, alpha, e.estimate, exact,
                             z);
                }
        const double elapsed = seconds_since(t0);
        info("%zu cells, worst z %.2f, %zu in (3,4] SE, %zu beyond 4 SE", cells, worst, band34, beyond4);
        return {cells == 45 && beyond4 == 0 && band34 <= 2 && elapsed < 600,
                format("45 cells within 4 SE, %zu of at most 2 in (3,4] SE (%.1f s, limit 600 s)", band34, elapsed)};
    }

    // 3. BH global-null identities.
    Outcome bh_identities()
    {
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = true;
        double worst_oracle = 0.0, worst_z = 0.0;
        std::size_t fdr_ne_fwer = 0, cells = 0;
        for (std::size_t n : {2u, 5u, 10u})
            for (double rho : {0.0, 1.0})
                for (double alpha : {0.01, 0.05, 0.1})
                {
                    worst_oracle = std::max(worst_oracle, std::abs(bh_any_rejection_exact(n, Rho(rho), Alpha(alpha)) - alpha));
                    const auto r = run_cell(null_cell(Procedure::bh, n, rho, alpha, m));
                    const double z = z_score(r.fdr, alpha);
                    worst_z = std::max(worst_z, z);
                    fdr_ne_fwer += r.fdr.estimate == r.fwer.estimate ? 0 : 1;
                    ++cells;
                    if (z >= 3)
                    {
                        pass = false;
                        info("n=%zu rho=%.0f alpha=%.2f: mc fdr %.6f z %.2f", n, rho, alpha, r.fdr.estimate, z);
                    }
                }
        const double elapsed = seconds_since(t0);
        info("oracle max |P(R>0) - alpha| = %.2e; mc worst z %.2f over %zu cells; fdr != fwer in %zu cells",
             worst_oracle, worst_z, cells, fdr_ne_fwer);
        pass = pass && worst_oracle <= 1e-9 && fdr_ne_fwer == 0 && elapsed < 600;
        return {pass, format("BH oracle = alpha within 1e-9, MC FDR within 3 SE, FDR == FWER bit-exact (%.1f s, "
                             "limit 600 s)",
                             elapsed)};
    }

    // 4. The FDR dip at intermediate correlation.
    Outcome fdr_dip()
    {
        const auto at = [](double rho) { return run_cell(null_cell(Procedure::bh, 100, rho, 0.05, m)).fdr; };
        const auto f0 = at(0.0), fh = at(0.5), f1 = at(1.0);
        const double se0 = std::hypot(f0.std_error, fh.std_error), se1 = std::hypot(f1.std_error, fh.std_error);
        const double oracle = bh_any_rejection_exact(100, Rho(0.5), Alpha(0.05));
        info("FDR(0) %.5f  FDR(0.5) %.5f  FDR(1) %.5f  (oracle at 0.5: %.5f)", f0.estimate, fh.estimate, f1.estimate,
             oracle);
        info("dip depth below rho=0: %.5f (%.1f SE); below rho=1: %.5f (%.1f SE)", f0.estimate - fh.estimate,
             (f0.estimate - fh.estimate) / se0, f1.estimate - fh.estimate, (f1.estimate - fh.estimate) / se1);
        const bool pass = f0.estimate - fh.estimate > 3 * se0 && f1.estimate - fh.estimate > 3 * se1;
        return {pass, "BH FDR at rho=0.5 below both endpoints by more than 3 SE (n=100, alpha=0.05)"};
    }

    // 5. Curvature transition of the exact FWER curve.
    Outcome curvature_transition()
    {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<double> grid;
        for (int i = 1; i <= 19; ++i)
            grid.push_back(i * 0.05);
        const auto classify = [&](std::size_t n, double alpha) {
            const double c = bonferroni_cutoff(Alpha(alpha), n);
            std::vector<double> v;
            for (double r : grid)
                v.push_back(fwer_exact(n, Rho(r), c));
            return classify_curvature(grid, v, oracle_tolerance);
        };
        const auto small = classify(2, 0.05);
        const auto large = classify(100000, 0.1);
        info("n=2 alpha=0.05: %s; n=1e5 alpha=0.1: %s", std::string(to_string(small)).c_str(),
             std::string(to_string(large)).c_str());

        const std::vector<std::size_t> ladder = {2,    3,    5,    10,    20,    50,    100,    200,
                                                 500,  1000, 2000, 5000, 10000, 20000, 50000, 100000};
        for (double alpha : {0.01, 0.05, 0.1})
        {
            std::string row;
            std::size_t crossover = 0;
            for (std::size_t n : ladder)
            {
                const auto k = classify(n, alpha);
                row += format(" %zu:%c", n, to_string(k)[0] == 'm' ? 'm' : (k == Curvature::concave ? 'v' : 'x'));
                if (k == Curvature::convex && crossover == 0)
                    crossover = n;
            }
            info("alpha=%.2f (v concave, m mixed, x convex):%s", alpha, row.c_str());
            if (crossover)
                info("alpha=%.2f: first convex n on the ladder = %zu", alpha, crossover);
            else
                info("alpha=%.2f: no convex n on the ladder", alpha);
        }
        const double elapsed = seconds_since(t0);
        return {small == Curvature::concave && large == Curvature::convex && elapsed < 300,
                format("concave at (n=2, alpha=0.05), convex at (n=1e5, alpha=0.1) (%.1f s, limit 300 s)", elapsed)};
    }

    // 6. Reference line at n = 1e5.
    Outcome reference_bound()
    {
        double worst = -INFINITY;
        std::string where;
        for (double alpha : {0.01, 0.05, 0.1})
        {
            const double c = bonferroni_cutoff(Alpha(alpha), 100000);
            for (int i = 1; i <= 19; ++i)
            {
                const double rho = i * 0.05;
                const double gap = fwer_exact(100000, Rho(rho), c) - reference_line(alpha, rho);
                if (gap > worst)
                {
                    worst = gap;
                    where = format("alpha=%.2f rho=%.2f", alpha, rho);
                }
            }
        }
        info("max FWER - alpha(1 - rho) = %.3e at %s", worst, where.c_str());
        return {worst <= 1e-3, "FWER(n=1e5) <= alpha(1 - rho) + 1e-3 on rho in [0.05, 0.95], all alpha"};
    }

    // 7. Holm and Bonferroni give the same any-rejection indicator.
    Outcome holm_equivalence()
    {
        const auto b = simulate_outcomes(null_cell(Procedure::bonferroni, 100, 0.3, 0.05, m));
        const auto h = simulate_outcomes(null_cell(Procedure::holm, 100, 0.3, 0.05, m));
        std::size_t differ = 0, rejections = 0;
        for (std::size_t r = 0; r < m; ++r)
        {
            differ += b.any_false_rejection[r] != h.any_false_rejection[r] ? 1 : 0;
            rejections += b.any_false_rejection[r] != 0 ? 1 : 0;
        }
        info("%zu replications, %zu with a rejection, %zu disagreements", m, rejections, differ);
        return {differ == 0, "Holm and Bonferroni any-rejection identical in all 1e5 replications"};
    }

    // 8. Corrected significance level.
    Outcome corrected_level()
    {
        const auto c = compare_correction_cell(100, Rho(0.5), Alpha(0.05), {5, 3.0}, 10000, default_master_seed);
        const double gain = c.corrected_power.estimate - c.standard_power.estimate;
        const double se = std::hypot(c.corrected_power.std_error, c.standard_power.std_error);
        info("%s", describe(c).c_str());
        info("power gain %.4f = %.1f combined SE (paired SE %.2e); corrected FWER %.4f vs 1.5 alpha = 0.075", gain,
             gain / se, c.power_gain.std_error, c.corrected_fwer.estimate);
        const bool pass = c.superset_violations == 0 && gain > 3 * se && c.corrected_fwer.estimate < 0.075;
        return {pass, "corrected sets are supersets, power gain > 3 SE, corrected FWER < 1.5 alpha"};
    }

    // 9. CLI determinism across thread counts.
    Outcome cli_determinism(const fs::path& out)
    {
        const auto dir = out / "determinism";
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto config = dir / "config.txt";
        {
            std::ofstream os(config);
            os << "procedures = bonferroni, holm, bh\n"
               << "n_list = 10, 100\n"
               << "rho_grid = 0:1:0.25\n"
               << "alpha_list = 0.05, 0.1\n"
               << "reps = 20000\n"
               << "output_dir = " << (dir / "run").string() << "\n";
        }
        const auto run_with = [&](int threads, const fs::path& keep) {
            const std::string cmd = std::string("\"") + EQCORR_CLI_PATH + "\" --threads " + std::to_string(threads) +
                                    " run \"" + config.string() + "\" > \"" + (dir / "stdout.txt").string() + "\"";
            const int rc = std::system(cmd.c_str());
            std::error_code ec;
            fs::rename(dir / "run" / "results.csv", keep, ec);
            return rc == 0 && !ec;
        };
        const bool ok1 = run_with(1, dir / "threads1.csv");
        const bool ok8 = run_with(8, dir / "threads8.csv");
        const auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const auto a = slurp(dir / "threads1.csv"), b = slurp(dir / "threads8.csv");
        info("runs ok: %d %d; csv sizes %zu and %zu bytes", ok1, ok8, a.size(), b.size());
        return {ok1 && ok8 && !a.empty() && a == b, "`run` with --threads 1 and --threads 8 gives byte-identical CSVs"};
    }

    // 10. Performance envelope.
    Outcome performance(const fs::path& out, bool skip_sweep)
    {
        bool pass = true;
        for (auto p : {Procedure::bonferroni, Procedure::holm, Procedure::bh})
        {
            const auto spec = null_cell(p, 10000, 0.5, 0.05, 5000);
            const auto t0 = std::chrono::steady_clock::now();
            run_cell(spec, 1);
            const double rate = 5000 / seconds_since(t0);
            info("n=1e4 %s: %.0f replications/s on one thread", std::string(to_string(p)).c_str(), rate);
            pass = pass && rate >= 1000;
        }
        if (skip_sweep)
        {
            info("figure-preset sweep skipped on request");
            return {false, "performance envelope not fully checked (--skip-sweep)"};
        }

        const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
        const auto t0 = std::chrono::steady_clock::now();
        std::size_t audit_pairs = 0, audit_failures = 0;
        for (const auto& name : figure_preset_names())
        {
            const auto t1 = std::chrono::steady_clock::now();
            PresetOverrides o;
            o.output_dir = (out / "presets" / name).string();
            const auto preset = find_preset(name, o);
            RunResult merged;
            for (const auto& config : preset->configs)
                merge_into(merged, run(config, 0));
            write_outputs(merged, preset->configs.front().output_dir, {});
            for (const auto& e : merged.audit)
                audit_failures += e.pass ? 0 : 1;
            audit_pairs += merged.audit.size();
            info("%s: %zu rows in %.1f s", name.c_str(), merged.rows.size(), seconds_since(t1));
        }
        const double elapsed = seconds_since(t0);
        info("six figure presets (m=1e5, default ladder) on %u hardware thread(s): %.1f s; audit %zu pairs, %zu "
             "outside 4 SE",
             cores, elapsed, audit_pairs, audit_failures);
        pass = pass && elapsed < 1800;
        return {pass, format("six figure presets in %.0f s (limit 1800 s); n=1e4 cells >= 1e3 replications/s", elapsed)};
    }
} // namespace

int main(int argc, char** argv)
{
    fs::path out = "acceptance_output";
    bool skip_sweep = false;
    for (int i = 1; i < argc; ++i)
    {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc)
            out = argv[++i];
        else if (a == "--skip-sweep")
            skip_sweep = true;
        else
        {
            std::fprintf(stderr, "usage: %s [--out DIR] [--skip-sweep]\n", argv[0]);
            return 2;
        }
    }
    fs::create_directories(out);

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, closed_form_anchors},
        {2, oracle_mc_agreement},
        {3, bh_identities},
        {4, fdr_dip},
        {5, curvature_transition},
        {6, reference_bound},
        {7, holm_equivalence},
        {8, corrected_level},
        {9, [&] { return cli_determinism(out); }},
        {10, [&] { return performance(out, skip_sweep); }},
    };

    int failed = 0;
    for (const auto& [id, check] : criteria)
    {
        Outcome o;
        try
        {
            o = check();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.summary.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
