#ifndef EQCORR_REPORT_HPP
#define EQCORR_REPORT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "experiment.hpp"
#include "svg.hpp"

namespace eqcorr
{
    inline std::string describe(const AuditEntry& e)
    {
        char buf[320];
        std::snprintf(buf, sizeof buf, "audit %s procedure=%s n=%zu rho=%.17g alpha=%.17g metric=%s mc=%.10g oracle=%.10g se=%.3g z=%.2f",
                      e.pass ? "PASS" : "FAIL", std::string(to_string(e.mc.procedure)).c_str(), e.mc.n, e.mc.rho,
                      e.mc.alpha, std::string(to_string(e.mc.metric)).c_str(), e.mc.estimate, e.oracle,
                      e.tolerance_se, e.z);
        return buf;
    }

    inline std::string describe(const CurveSummary& c)
    {
        double max_gap = -INFINITY;
        for (std::size_t i = 0; i < c.reference_gap.size(); ++i)
            if (c.rho_grid[i] > 0.0)
                max_gap = std::max(max_gap, c.reference_gap[i]);
        char buf[320];
        std::snprintf(buf, sizeof buf, "curve source=%s procedure=%s n=%zu alpha=%g metric=%s curvature=%s max_gap_above_reference=%.6g",
                      c.oracle ? "oracle" : "mc", std::string(to_string(c.procedure)).c_str(), c.n, c.alpha,
                      std::string(to_string(c.metric)).c_str(),
                      c.curvature ? std::string(to_string(*c.curvature)).c_str() : "n/a", max_gap);
        return buf;
    }

    inline std::string describe(const CorrectionComparison& c)
    {
        char buf[400];
        std::snprintf(buf, sizeof buf,
                      "correction n=%zu rho=%g alpha=%g mean_rho_hat=%.4f power_standard=%.6f power_corrected=%.6f "
                      "gain=%.6f gain_se=%.3g fwer_standard=%.6f fwer_corrected=%.6f superset_violations=%zu clamped=%zu",
                      c.n, c.rho, c.alpha, c.mean_rho_hat, c.standard_power.estimate, c.corrected_power.estimate,
                      c.power_gain.estimate, c.power_gain.std_error, c.standard_fwer.estimate, c.corrected_fwer.estimate,
                      c.superset_violations, c.clamped_replications);
        return buf;
    }

    struct OutputPaths
    {
        std::filesystem::path csv;
        std::filesystem::path log;
        std::vector<std::filesystem::path> svgs;
    };

    /// results.csv, svg/<group>.svg and run.log under `dir`.
    inline OutputPaths write_outputs(const RunResult& result, const std::filesystem::path& dir,
                                     const std::vector<CorrectionComparison>& corrections = {})
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw io_error("cannot create output directory " + dir.string() + ": " + ec.message());

        OutputPaths paths;
        paths.csv = dir / "results.csv";
        paths.log = dir / "run.log";
        emit_csv(result.rows, paths.csv);
        const auto svg = emit_svg(result.rows, dir / "svg");
        paths.svgs = svg.written;

        std::ofstream log(paths.log, std::ios::trunc);
        if (!log)
            throw io_error("cannot open " + paths.log.string());
        for (const auto& line : result.log_lines)
            log << line << '\n';
        for (const auto& cell : result.cells)
        {
            char buf[256];
            std::snprintf(buf, sizeof buf, "cell %s seconds=%.3f", cell.spec.describe().c_str(), cell.wall_seconds);
            log << buf << '\n';
        }
        std::size_t failures = 0;
        for (const auto& e : result.audit)
        {
            failures += e.pass ? 0 : 1;
            log << describe(e) << '\n';
        }
        log << "audit_summary pairs=" << result.audit.size() << " failures=" << failures << '\n';
        for (const auto& c : result.curves)
            log << describe(c) << '\n';
        for (const auto& c : corrections)
            log << describe(c) << '\n';
        for (const auto& w : svg.warnings)
            log << "warning " << w << '\n';
        return paths;
    }
} // namespace eqcorr

#endif // EQCORR_REPORT_HPP
