#ifndef EQCORR_EXPERIMENT_HPP
#define EQCORR_EXPERIMENT_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "config.hpp"
#include "curve.hpp"
#include "monte_carlo.hpp"
#include "oracle.hpp"
#include "procedures.hpp"
#include "sampler.hpp"

namespace eqcorr
{
    enum class Source
    {
        mc,
        oracle,
    };

    constexpr std::string_view to_string(Source s) noexcept { return s == Source::mc ? "mc" : "oracle"; }

    /// One line of the results CSV.
    struct ResultRow
    {
        Procedure procedure = Procedure::bonferroni;
        std::size_t n = 0;
        double rho = 0.0;
        double alpha = 0.0;
        Metric metric = Metric::fwer;
        Source source = Source::mc;
        double estimate = 0.0;
        double std_error = 0.0; ///< 0 for oracle rows
        std::size_t reps = 0;   ///< 0 for oracle rows
        std::uint64_t master_seed = 0;
        double reference_value = 0.0;
        std::string flags; ///< ';'-separated, empty when none

        friend bool operator==(const ResultRow&, const ResultRow&) = default;
    };

    /// CSV order: (procedure, n, alpha, rho, metric, source), with the text
    /// fields compared by name.
    inline bool row_less(const ResultRow& a, const ResultRow& b)
    {
        const auto key = [](const ResultRow& r) {
            return std::make_tuple(to_string(r.procedure), r.n, r.alpha, r.rho, to_string(r.metric), to_string(r.source));
        };
        return key(a) < key(b);
    }

    inline void sort_rows(std::vector<ResultRow>& rows) { std::stable_sort(rows.begin(), rows.end(), row_less); }

    inline void append_flag(std::string& flags, std::string_view flag)
    {
        if (!flags.empty())
            flags += ';';
        flags += flag;
    }

    /// Whether the quadrature oracle covers this procedure and truth: it
    /// handles the global null for Bonferroni, Holm (same any-rejection
    /// event) and BH, where FWER and FDR coincide.
    inline bool oracle_supports(Procedure p, const std::optional<SignalSpec>& signal)
    {
        return !signal && p != Procedure::corrected_bonferroni;
    }

    struct OracleValue
    {
        double value = 0.0;
        std::size_t order = 0; ///< 0 for closed forms
    };

    inline OracleValue oracle_value(Procedure p, std::size_t n, double rho, double alpha)
    {
        const Rho r(rho);
        const Alpha a(alpha);
        ConvergedValue v;
        if (p == Procedure::bh)
            v = bh_any_rejection_converged(n, r, a);
        else
            v = fwer_exact_converged(n, r, bonferroni_cutoff(a, n));
        return {v.value, v.order};
    }

    struct AuditEntry
    {
        ResultRow mc;
        double oracle = 0.0;
        double tolerance_se = 0.0; ///< SE the comparison used
        double z = 0.0;            ///< |mc - oracle| / SE
        bool pass = false;
    };

    inline constexpr double audit_sigmas = 4.0;

    /// MC rows paired with oracle rows by (procedure, n, rho, alpha, metric)
    /// must agree within 4 SE. A zero MC SE (no events) falls back to the
    /// binomial SE implied by the oracle value.
    inline std::vector<AuditEntry> audit_rows(const std::vector<ResultRow>& rows)
    {
        using Key = std::tuple<std::string_view, std::size_t, double, double, std::string_view>;
        std::map<Key, const ResultRow*> oracle;
        for (const auto& r : rows)
            if (r.source == Source::oracle)
                oracle[{to_string(r.procedure), r.n, r.rho, r.alpha, to_string(r.metric)}] = &r;

        std::vector<AuditEntry> out;
        for (const auto& r : rows)
        {
            if (r.source != Source::mc)
                continue;
            const auto it = oracle.find({to_string(r.procedure), r.n, r.rho, r.alpha, to_string(r.metric)});
            if (it == oracle.end())
                continue;
            AuditEntry e;
            e.mc = r;
            e.oracle = it->second->estimate;
            double se = r.std_error;
            if (se == 0.0 && r.reps > 0)
                se = std::sqrt(std::max(0.0, e.oracle * (1.0 - e.oracle)) / static_cast<double>(r.reps));
            e.tolerance_se = se;
            const double diff = std::abs(r.estimate - e.oracle);
            e.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
            e.pass = diff <= audit_sigmas * se;
            out.push_back(e);
        }
        return out;
    }

    struct RunResult
    {
        std::vector<ExperimentConfig> configs;
        std::vector<ResultRow> rows; ///< sorted
        std::vector<CellRecord> cells;
        std::vector<CurveSummary> curves;
        std::vector<AuditEntry> audit;
        std::vector<std::string> log_lines;
    };

    namespace detail
    {
        inline ResultRow mc_row(const CellSpec& s, const ErrorEstimate& e, std::size_t clamped)
        {
            ResultRow r;
            r.procedure = s.procedure;
            r.n = s.n;
            r.rho = s.rho.value();
            r.alpha = s.alpha.value();
            r.metric = e.metric;
            r.source = Source::mc;
            r.estimate = e.estimate;
            r.std_error = e.std_error;
            r.reps = e.reps;
            r.master_seed = s.master_seed;
            r.reference_value = reference_line(r.alpha, r.rho);
            if (e.degenerate)
                append_flag(r.flags, "degenerate_se");
            if (clamped > 0)
                append_flag(r.flags, "alpha_clamped=" + std::to_string(clamped));
            return r;
        }
    } // namespace detail

    /// Executes the Monte Carlo sweep and/or the oracle for one config and
    /// returns rows in CSV order.
    inline RunResult run(const ExperimentConfig& config, std::size_t workers = 1)
    {
        validate(config);
        RunResult result;
        result.configs.push_back(config);
        result.log_lines.push_back("config_hash=" + std::to_string(config_hash(config)));

        if (includes_mc(config.mode))
        {
            auto sweep = run_sweep(config, workers);
            for (const auto& rec : sweep.cells)
            {
                result.rows.push_back(detail::mc_row(rec.spec, rec.result.fwer, rec.result.clamped_replications));
                result.rows.push_back(detail::mc_row(rec.spec, rec.result.fdr, rec.result.clamped_replications));
                if (rec.result.power)
                    result.rows.push_back(
                        detail::mc_row(rec.spec, *rec.result.power, rec.result.clamped_replications));
            }
            result.cells = std::move(sweep.cells);
            result.curves = std::move(sweep.curves);
        }

        if (includes_oracle(config.mode))
        {
            // Bonferroni and Holm share one value; evaluate each distinct
            // (kind, n, alpha, rho) once, in parallel over grid points.
            struct Task
            {
                Procedure kind;
                std::size_t n;
                double alpha;
                double rho;
                OracleValue value;
                double seconds = 0.0;
            };
            std::vector<Task> tasks;
            std::map<std::tuple<int, std::size_t, double, double>, std::size_t> index;
            for (auto p : config.procedures)
            {
                if (!oracle_supports(p, config.signal))
                    continue;
                const Procedure kind = p == Procedure::bh ? Procedure::bh : Procedure::bonferroni;
                for (auto n : config.n_list)
                    for (double a : config.alpha_list)
                        for (double rho : config.rho_grid)
                        {
                            const auto key = std::make_tuple(static_cast<int>(kind), n, a, rho);
                            if (index.emplace(key, tasks.size()).second)
                                tasks.push_back({kind, n, a, rho, {}, 0.0});
                        }
            }
            parallel_chunks(tasks.size(), workers, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i)
                {
                    auto& t = tasks[i];
                    const auto t0 = std::chrono::steady_clock::now();
                    try
                    {
                        t.value = oracle_value(t.kind, t.n, t.rho, t.alpha);
                    }
                    catch (const std::exception& e)
                    {
                        throw std::runtime_error("oracle failed (procedure=" + std::string(to_string(t.kind)) +
                                                 " n=" + std::to_string(t.n) + " rho=" + detail::fmt_double(t.rho) +
                                                 " alpha=" + detail::fmt_double(t.alpha) + "): " + e.what());
                    }
                    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                }
            });

            for (auto p : config.procedures)
            {
                if (!oracle_supports(p, config.signal))
                    continue;
                const Procedure kind = p == Procedure::bh ? Procedure::bh : Procedure::bonferroni;
                for (auto n : config.n_list)
                    for (double a : config.alpha_list)
                    {
                        CurveSummary curve;
                        curve.procedure = p;
                        curve.n = n;
                        curve.alpha = a;
                        curve.metric = p == Procedure::bh ? Metric::fdr : Metric::fwer;
                        curve.oracle = true;
                        for (double rho : config.rho_grid)
                        {
                            const auto& t = tasks[index.at(std::make_tuple(static_cast<int>(kind), n, a, rho))];
                            for (auto metric : {Metric::fwer, Metric::fdr})
                            {
                                ResultRow r;
                                r.procedure = p;
                                r.n = n;
                                r.rho = rho;
                                r.alpha = a;
                                r.metric = metric;
                                r.source = Source::oracle;
                                r.estimate = t.value.value;
                                r.master_seed = config.master_seed;
                                r.reference_value = reference_line(a, rho);
                                if (t.value.order == 0)
                                    append_flag(r.flags, "closed_form");
                                else
                                    append_flag(r.flags, "quadrature_order=" + std::to_string(t.value.order));
                                result.rows.push_back(std::move(r));
                            }
                            curve.rho_grid.push_back(rho);
                            curve.values.push_back(t.value.value);
                            curve.std_errors.push_back(0.0);
                        }
                        summarize_curve(curve, oracle_tolerance);
                        result.curves.push_back(std::move(curve));
                    }
            }
            for (const auto& t : tasks)
                result.log_lines.push_back("oracle procedure=" + std::string(to_string(t.kind)) +
                                           " n=" + std::to_string(t.n) + " alpha=" + detail::fmt_double(t.alpha) +
                                           " rho=" + detail::fmt_double(t.rho) +
                                           " seconds=" + detail::fmt_double(t.seconds));
        }

        sort_rows(result.rows);
        result.audit = audit_rows(result.rows);
        return result;
    }

    /// Concatenates runs (a preset may consist of several configs).
    inline void merge_into(RunResult& into, RunResult&& from)
    {
        into.configs.insert(into.configs.end(), from.configs.begin(), from.configs.end());
        into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
        into.cells.insert(into.cells.end(), from.cells.begin(), from.cells.end());
        into.curves.insert(into.curves.end(), from.curves.begin(), from.curves.end());
        into.log_lines.insert(into.log_lines.end(), from.log_lines.begin(), from.log_lines.end());
        sort_rows(into.rows);
        into.audit = audit_rows(into.rows);
    }

    /// Standard versus correlation-corrected Bonferroni on common random
    /// numbers for one (n, rho, alpha) cell with signals.
    struct CorrectionComparison
    {
        std::size_t n = 0;
        double rho = 0.0;
        double alpha = 0.0;
        ErrorEstimate standard_power;
        ErrorEstimate corrected_power;
        ErrorEstimate standard_fwer;
        ErrorEstimate corrected_fwer;
        ErrorEstimate power_gain; ///< paired per-replication difference
        double mean_rho_hat = 0.0;
        std::size_t superset_violations = 0;
        std::size_t power_order_violations = 0; ///< reps with corrected power < standard
        std::size_t clamped_replications = 0;
    };

    inline CorrectionComparison compare_correction_cell(std::size_t n, Rho rho, Alpha alpha, const SignalSpec& signal,
                                                        std::size_t reps, std::uint64_t seed, std::size_t workers = 1)
    {
        const TruthMask truth = TruthMask::with_signals(n, signal.false_nulls, signal.mean);
        const CellId cell{n, rho.value(), alpha.value()};
        const std::uint64_t cell_hash = cell.hash();
        const double cutoff = bonferroni_cutoff(alpha, n);

        std::vector<double> sp(reps), cp(reps), sf(reps), cf(reps), gain(reps), rh(reps);
        std::vector<std::uint8_t> superset_bad(reps), order_bad(reps), clamped(reps);
        parallel_chunks(reps, workers, [&](std::size_t begin, std::size_t end) {
            std::vector<double> x(n);
            for (std::size_t r = begin; r < end; ++r)
            {
                RandomStream stream(StreamKey{seed, cell_hash, r});
                sample_equicorr_into(x, rho, stream);
                truth.apply_signal(x);
                const Rho rho_hat = estimate_rho(std::span<const double>(x));
                const auto standard = reject_above(x, cutoff, Procedure::bonferroni);
                const auto corrected = corrected_bonferroni_reject(x, alpha, n, rho_hat);
                const auto so = score_replication(standard, truth);
                const auto co = score_replication(corrected, truth);
                sp[r] = so.power;
                cp[r] = co.power;
                sf[r] = so.any_false_rejection ? 1.0 : 0.0;
                cf[r] = co.any_false_rejection ? 1.0 : 0.0;
                gain[r] = co.power - so.power;
                rh[r] = rho_hat.value();
                superset_bad[r] = std::includes(corrected.rejected.begin(), corrected.rejected.end(),
                                                standard.rejected.begin(), standard.rejected.end())
                                      ? 0
                                      : 1;
                order_bad[r] = co.power < so.power ? 1 : 0;
                clamped[r] = corrected.alpha_clamped ? 1 : 0;
            }
        });

        CorrectionComparison c;
        c.n = n;
        c.rho = rho.value();
        c.alpha = alpha.value();
        c.standard_power = estimate_from(Metric::power, sp);
        c.corrected_power = estimate_from(Metric::power, cp);
        c.standard_fwer = estimate_from(Metric::fwer, sf);
        c.corrected_fwer = estimate_from(Metric::fwer, cf);
        c.power_gain = estimate_from(Metric::power, gain);
        c.mean_rho_hat = pairwise_sum(rh) / static_cast<double>(reps);
        for (std::size_t r = 0; r < reps; ++r)
        {
            c.superset_violations += superset_bad[r];
            c.power_order_violations += order_bad[r];
            c.clamped_replications += clamped[r];
        }
        return c;
    }

    /// Power comparison for every (n, alpha, rho) of a config that carries a
    /// signal and lists both bonferroni and corrected_bonferroni.
    inline std::vector<CorrectionComparison> compare_correction(const ExperimentConfig& config, std::size_t workers = 1)
    {
        validate(config);
        if (!config.signal)
            throw config_error("signal", "power comparison needs a signal (false-null count and mean)");
        const auto has = [&](Procedure p) {
            return std::find(config.procedures.begin(), config.procedures.end(), p) != config.procedures.end();
        };
        if (!has(Procedure::bonferroni) || !has(Procedure::corrected_bonferroni))
            throw config_error("procedures", "power comparison needs bonferroni and corrected_bonferroni");

        std::vector<CorrectionComparison> out;
        for (auto n : config.n_list)
            for (double a : config.alpha_list)
                for (double rho : config.rho_grid)
                    out.push_back(compare_correction_cell(n, Rho(rho), Alpha(a), *config.signal, config.reps,
                                                          config.master_seed, workers));
        return out;
    }
} // namespace eqcorr

#endif // EQCORR_EXPERIMENT_HPP
