#ifndef EQCORR_MONTE_CARLO_HPP
#define EQCORR_MONTE_CARLO_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "curve.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "procedures.hpp"
#include "random_stream.hpp"
#include "sampler.hpp"
#include "types.hpp"

namespace eqcorr
{
    /// One (procedure, n, rho, alpha) Monte Carlo cell.
    struct CellSpec
    {
        Procedure procedure = Procedure::bonferroni;
        std::size_t n = 1;
        Rho rho{0.0};
        Alpha alpha{0.05};
        std::size_t reps = default_reps;
        std::uint64_t master_seed = default_master_seed;
        TruthMask truth = TruthMask::all_null(1);
        double alpha_ceiling = default_corrected_alpha_ceiling;

        CellId cell_id() const { return {n, rho.value(), alpha.value()}; }

        std::string describe() const
        {
            std::ostringstream os;
            os << "procedure=" << to_string(procedure) << " n=" << n << " rho=" << rho.value()
               << " alpha=" << alpha.value() << " reps=" << reps;
            return os.str();
        }
    };

    inline void validate(const CellSpec& s)
    {
        const auto fail = [&](const std::string& field, const std::string& what) {
            return config_error(field, what + " (" + s.describe() + ")");
        };
        if (s.n < 1)
            throw fail("n", "must be at least 1");
        if (s.reps < 1)
            throw fail("reps", "must be at least 1");
        if (s.truth.size() != s.n)
            throw fail("truth", "mask length differs from n");
        if (s.procedure == Procedure::corrected_bonferroni && s.n < 2)
            throw fail("n", "corrected_bonferroni needs n >= 2 to estimate rho");
        if (!(s.alpha_ceiling > 0.0 && s.alpha_ceiling < 1.0))
            throw fail("alpha_ceiling", "must lie in (0, 1)");
    }

    /// Deterministic pairwise (tree) sum: the split points depend only on the
    /// length, never on how the values were produced.
    inline double pairwise_sum(std::span<const double> v)
    {
        if (v.size() <= 8)
        {
            double s = 0.0;
            for (double x : v)
                s += x;
            return s;
        }
        const std::size_t half = v.size() / 2;
        return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
    }

    inline double binomial_standard_error(double p_hat, std::size_t m)
    {
        if (m < 1)
            throw domain_error("standard_error: need at least one replication");
        return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(m));
    }

    /// Sample standard deviation (m - 1 denominator) over sqrt(m).
    inline double sample_standard_error(std::span<const double> samples)
    {
        const std::size_t m = samples.size();
        if (m < 2)
            throw domain_error("standard_error: need at least two samples for a sample standard deviation");
        const double mean = pairwise_sum(samples) / static_cast<double>(m);
        std::vector<double> sq(m);
        for (std::size_t i = 0; i < m; ++i)
            sq[i] = (samples[i] - mean) * (samples[i] - mean);
        const double var = pairwise_sum(sq) / static_cast<double>(m - 1);
        return std::sqrt(var / static_cast<double>(m));
    }

    /// Binomial SE for the 0/1 FWER indicator, sample SD / sqrt(m) for the
    /// FDP and power samples.
    inline double standard_error(Metric metric, std::span<const double> samples)
    {
        if (metric == Metric::fwer)
            return binomial_standard_error(pairwise_sum(samples) / static_cast<double>(samples.size()),
                                           samples.size());
        return sample_standard_error(samples);
    }

    struct ErrorEstimate
    {
        Metric metric = Metric::fwer;
        double estimate = 0.0;
        double std_error = 0.0;
        std::size_t reps = 0;
        /// SE is exactly zero (all samples equal), so it carries no noise
        /// information.
        bool degenerate = false;
    };

    inline ErrorEstimate estimate_from(Metric metric, std::span<const double> samples)
    {
        ErrorEstimate e;
        e.metric = metric;
        e.reps = samples.size();
        e.estimate = pairwise_sum(samples) / static_cast<double>(samples.size());
        e.std_error = samples.size() >= 2 || metric == Metric::fwer ? standard_error(metric, samples) : 0.0;
        e.degenerate = e.std_error == 0.0;
        return e;
    }

    /// Per-replication outcomes of a cell, indexed by replication.
    struct CellOutcomes
    {
        std::vector<double> any_false_rejection; ///< 0/1
        std::vector<double> fdp;
        std::vector<double> power;
        std::vector<std::uint8_t> alpha_clamped;
    };

    inline std::size_t effective_workers(std::size_t requested, std::size_t work)
    {
        if (requested == 0)
            requested = std::max(1u, std::thread::hardware_concurrency());
        return std::max<std::size_t>(1, std::min(requested, work));
    }

    /// Runs body(begin, end) over contiguous chunks of [0, count) on up to
    /// `workers` threads. Results must be written by index so the schedule
    /// cannot influence them.
    template <typename Body>
    void parallel_chunks(std::size_t count, std::size_t workers, Body&& body)
    {
        workers = effective_workers(workers, count);
        if (workers == 1)
        {
            body(std::size_t{0}, count);
            return;
        }
        const std::size_t chunk = (count + workers - 1) / workers;
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> threads;
            threads.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w)
            {
                const std::size_t begin = std::min(count, w * chunk);
                const std::size_t end = std::min(count, begin + chunk);
                threads.emplace_back([&, w, begin, end] {
                    try
                    {
                        body(begin, end);
                    }
                    catch (...)
                    {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    /// Draws, shifts, tests and scores every replication of a cell.
    /// Replication r always uses the stream (master_seed, cell, r).
    inline CellOutcomes simulate_outcomes(const CellSpec& spec, std::size_t workers = 1)
    {
        validate(spec);
        const std::size_t m = spec.reps;
        CellOutcomes out;
        out.any_false_rejection.assign(m, 0.0);
        out.fdp.assign(m, 0.0);
        out.power.assign(m, 0.0);
        out.alpha_clamped.assign(m, 0);

        const std::uint64_t cell_hash = spec.cell_id().hash();
        const double cutoff = bonferroni_cutoff(spec.alpha, spec.n);

        parallel_chunks(m, workers, [&](std::size_t begin, std::size_t end) {
            std::vector<double> x(spec.n);
            std::vector<double> p;
            for (std::size_t r = begin; r < end; ++r)
            {
                RandomStream stream(StreamKey{spec.master_seed, cell_hash, r});
                sample_equicorr_into(x, spec.rho, stream);
                spec.truth.apply_signal(x);

                RejectionSet rej;
                switch (spec.procedure)
                {
                case Procedure::bonferroni:
                    rej = reject_above(x, cutoff, Procedure::bonferroni);
                    break;
                case Procedure::corrected_bonferroni:
                    rej = corrected_bonferroni_reject(x, spec.alpha, spec.n, estimate_rho(std::span<const double>(x)),
                                                      spec.alpha_ceiling);
                    break;
                case Procedure::holm:
                    pvalues_from_observations_into(x, p);
                    rej = holm_reject(p, spec.alpha, spec.n);
                    break;
                case Procedure::bh:
                    pvalues_from_observations_into(x, p);
                    rej = bh_reject(p, spec.alpha, spec.n);
                    break;
                }

                const auto o = score_replication(rej, spec.truth);
                out.any_false_rejection[r] = o.any_false_rejection ? 1.0 : 0.0;
                out.fdp[r] = o.fdp;
                out.power[r] = o.power;
                out.alpha_clamped[r] = rej.alpha_clamped ? 1 : 0;
            }
        });
        return out;
    }

    struct CellResult
    {
        ErrorEstimate fwer;
        ErrorEstimate fdr;
        std::optional<ErrorEstimate> power; ///< only when false nulls exist
        std::size_t clamped_replications = 0;
    };

    inline CellResult summarize(const CellSpec& spec, const CellOutcomes& o)
    {
        CellResult r;
        r.fwer = estimate_from(Metric::fwer, o.any_false_rejection);
        r.fdr = estimate_from(Metric::fdr, o.fdp);
        if (!spec.truth.global_null())
            r.power = estimate_from(Metric::power, o.power);
        for (auto c : o.alpha_clamped)
            r.clamped_replications += c;
        return r;
    }

    /// FWER and FDR (and power, with signals) for one cell. Bit-identical
    /// for equal specs whatever the worker count.
    inline CellResult run_cell(const CellSpec& spec, std::size_t workers = 1)
    {
        return summarize(spec, simulate_outcomes(spec, workers));
    }

    struct CellRecord
    {
        CellSpec spec;
        CellResult result;
        double wall_seconds = 0.0;
    };

    struct SweepResult
    {
        /// Ordered by (procedure, n, alpha, rho ascending) in config order.
        std::vector<CellRecord> cells;
        /// One Monte Carlo curve per (procedure, n, alpha, metric).
        std::vector<CurveSummary> curves;
    };

    inline TruthMask truth_for(const ExperimentConfig& config, std::size_t n)
    {
        if (config.signal)
            return TruthMask::with_signals(n, config.signal->false_nulls, config.signal->mean);
        return TruthMask::all_null(n);
    }

    /// Runs every (procedure, n, alpha) across the rho grid. A failing cell
    /// aborts the sweep with the cell identified.
    inline SweepResult run_sweep(const ExperimentConfig& config, std::size_t workers = 1,
                                 const std::function<void(const CellRecord&)>& on_cell = {})
    {
        validate(config);
        SweepResult sweep;
        for (auto procedure : config.procedures)
            for (auto n : config.n_list)
                for (double alpha : config.alpha_list)
                {
                    std::vector<CurveSummary> curves;
                    std::vector<Metric> metrics = {Metric::fwer, Metric::fdr};
                    if (config.signal)
                        metrics.push_back(Metric::power);
                    for (auto metric : metrics)
                    {
                        CurveSummary c;
                        c.procedure = procedure;
                        c.n = n;
                        c.alpha = alpha;
                        c.metric = metric;
                        curves.push_back(std::move(c));
                    }

                    for (double rho : config.rho_grid)
                    {
                        CellSpec spec;
                        spec.procedure = procedure;
                        spec.n = n;
                        spec.rho = Rho(rho);
                        spec.alpha = Alpha(alpha);
                        spec.reps = config.reps;
                        spec.master_seed = config.master_seed;
                        spec.truth = truth_for(config, n);

                        CellRecord rec{spec, {}, 0.0};
                        const auto t0 = std::chrono::steady_clock::now();
                        try
                        {
                            rec.result = run_cell(spec, workers);
                        }
                        catch (const std::exception& e)
                        {
                            throw std::runtime_error("cell failed (" + spec.describe() + "): " + e.what());
                        }
                        rec.wall_seconds =
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

                        for (auto& c : curves)
                        {
                            const ErrorEstimate& e = c.metric == Metric::fwer  ? rec.result.fwer
                                                     : c.metric == Metric::fdr ? rec.result.fdr
                                                                               : *rec.result.power;
                            c.rho_grid.push_back(rho);
                            c.values.push_back(e.estimate);
                            c.std_errors.push_back(e.std_error);
                        }
                        if (on_cell)
                            on_cell(rec);
                        sweep.cells.push_back(std::move(rec));
                    }
                    for (auto& c : curves)
                    {
                        summarize_curve(c, oracle_tolerance);
                        sweep.curves.push_back(std::move(c));
                    }
                }
        return sweep;
    }
} // namespace eqcorr

#endif // EQCORR_MONTE_CARLO_HPP
