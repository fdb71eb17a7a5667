#ifndef EQCORR_CONFIG_HPP
#define EQCORR_CONFIG_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "oracle.hpp"
#include "random_stream.hpp"
#include "types.hpp"

namespace eqcorr
{
    enum class RunMode
    {
        mc,
        oracle,
        both,
    };

    constexpr std::string_view to_string(RunMode m) noexcept
    {
        switch (m)
        {
        case RunMode::mc: return "mc";
        case RunMode::oracle: return "oracle";
        case RunMode::both: return "both";
        }
        return "?";
    }

    constexpr bool includes_mc(RunMode m) noexcept { return m != RunMode::oracle; }
    constexpr bool includes_oracle(RunMode m) noexcept { return m != RunMode::mc; }

    struct SignalSpec
    {
        std::size_t false_nulls = 0;
        double mean = 0.0;

        friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
    };

    inline std::vector<double> default_rho_grid()
    {
        std::vector<double> g;
        for (int i = 0; i <= 20; ++i)
            g.push_back(static_cast<double>(i) / 20.0);
        return g;
    }

    inline constexpr std::size_t default_reps = 100000;
    inline constexpr std::uint64_t default_master_seed = 20190101;

    struct ExperimentConfig
    {
        std::vector<Procedure> procedures = {Procedure::bonferroni};
        std::vector<std::size_t> n_list = {2, 10, 100, 1000};
        std::vector<double> rho_grid = default_rho_grid();
        std::vector<double> alpha_list = {0.1, 0.05, 0.01};
        std::size_t reps = default_reps;
        std::uint64_t master_seed = default_master_seed;
        RunMode mode = RunMode::both;
        std::optional<SignalSpec> signal;
        std::string output_dir = "results";

        friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
    };

    namespace detail
    {
        inline std::string_view trim(std::string_view s)
        {
            const auto ws = " \t\r\n";
            const auto b = s.find_first_not_of(ws);
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(ws);
            return s.substr(b, e - b + 1);
        }

        inline std::vector<std::string_view> split_list(std::string_view s)
        {
            std::vector<std::string_view> out;
            std::size_t start = 0;
            while (true)
            {
                const auto pos = s.find(',', start);
                out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
                if (pos == std::string_view::npos)
                    break;
                start = pos + 1;
            }
            return out;
        }

        inline std::optional<double> to_double(std::string_view s)
        {
            double v = 0.0;
            const auto* end = s.data() + s.size();
            const auto r = std::from_chars(s.data(), end, v);
            if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v))
                return std::nullopt;
            return v;
        }

        /// Accepts plain integers and integral scientific forms like 1e5.
        inline std::optional<std::uint64_t> to_count(std::string_view s)
        {
            std::uint64_t v = 0;
            const auto* end = s.data() + s.size();
            const auto r = std::from_chars(s.data(), end, v);
            if (r.ec == std::errc() && r.ptr == end)
                return v;
            const auto d = to_double(s);
            if (d && *d >= 0.0 && *d <= 9.0e15 && std::floor(*d) == *d)
                return static_cast<std::uint64_t>(*d);
            return std::nullopt;
        }

        inline std::string fmt_double(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }
    } // namespace detail

    /// Rejects inconsistent configurations with a config_error naming the
    /// field.
    inline void validate(const ExperimentConfig& c)
    {
        if (c.procedures.empty())
            throw config_error("procedures", "must not be empty");
        if (c.n_list.empty())
            throw config_error("n_list", "must not be empty");
        if (c.rho_grid.empty())
            throw config_error("rho_grid", "must not be empty");
        if (c.alpha_list.empty())
            throw config_error("alpha_list", "must not be empty");
        if (c.reps < 1)
            throw config_error("reps", "must be at least 1");

        for (auto n : c.n_list)
            if (n < 1)
                throw config_error("n_list", "entries must be positive integers");
        for (std::size_t i = 0; i < c.rho_grid.size(); ++i)
        {
            const double r = c.rho_grid[i];
            if (!(r >= 0.0 && r <= 1.0))
                throw config_error("rho_grid", "value " + detail::fmt_double(r) + " outside [0, 1]");
            if (i > 0 && !(r > c.rho_grid[i - 1]))
                throw config_error("rho_grid", "must be strictly ascending");
        }
        for (double a : c.alpha_list)
            if (!(a > 0.0 && a < 1.0))
                throw config_error("alpha_list", "value " + detail::fmt_double(a) + " outside the open interval (0, 1)");

        const auto has = [&](Procedure p) {
            return std::find(c.procedures.begin(), c.procedures.end(), p) != c.procedures.end();
        };
        if (std::set<Procedure>(c.procedures.begin(), c.procedures.end()).size() != c.procedures.size())
            throw config_error("procedures", "duplicate entry");
        if (std::set<std::size_t>(c.n_list.begin(), c.n_list.end()).size() != c.n_list.size())
            throw config_error("n_list", "duplicate entry");
        if (std::set<double>(c.alpha_list.begin(), c.alpha_list.end()).size() != c.alpha_list.size())
            throw config_error("alpha_list", "duplicate entry");

        const std::size_t min_n = *std::min_element(c.n_list.begin(), c.n_list.end());
        const std::size_t max_n = *std::max_element(c.n_list.begin(), c.n_list.end());
        if (has(Procedure::corrected_bonferroni) && min_n < 2)
            throw config_error("n_list", "corrected_bonferroni estimates rho and needs n >= 2");
        if (includes_oracle(c.mode) && has(Procedure::bh) && max_n > bh_oracle_max_n)
            throw config_error("n_list", "the BH oracle supports n <= " + std::to_string(bh_oracle_max_n) +
                                             "; use mode = mc for larger n");
        if (c.signal)
        {
            if (c.signal->false_nulls < 1)
                throw config_error("signal", "needs at least one false null");
            if (c.signal->false_nulls > min_n)
                throw config_error("signal", "more false nulls than the smallest n");
            if (!(c.signal->mean > 0.0))
                throw config_error("signal", "mean must be positive");
        }
        if (c.output_dir.empty())
            throw config_error("output_dir", "must not be empty");
    }

    /// Parses the key = value config format. '#' starts a comment; lists are
    /// comma separated; rho_grid also accepts start:stop:step.
    inline ExperimentConfig parse_config(std::string_view text)
    {
        ExperimentConfig c;
        std::set<std::string, std::less<>> seen;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size())
        {
            const auto eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
            ++line_no;

            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty())
                continue;

            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw config_error("", "expected 'key = value'", line_no);
            const std::string key(detail::trim(line.substr(0, eq)));
            const std::string_view value = detail::trim(line.substr(eq + 1));
            if (!seen.insert(key).second)
                throw config_error(key, "given more than once", line_no);
            if (value.empty())
                throw config_error(key, "missing value", line_no);

            const auto bad = [&](const std::string& what) { return config_error(key, what, line_no); };

            if (key == "procedures")
            {
                c.procedures.clear();
                for (auto tok : detail::split_list(value))
                {
                    const auto p = parse_procedure(tok);
                    if (!p)
                        throw bad("unknown procedure '" + std::string(tok) + "'");
                    c.procedures.push_back(*p);
                }
            }
            else if (key == "n_list")
            {
                c.n_list.clear();
                for (auto tok : detail::split_list(value))
                {
                    const auto v = detail::to_count(tok);
                    if (!v || *v < 1)
                        throw bad("'" + std::string(tok) + "' is not a positive integer");
                    c.n_list.push_back(static_cast<std::size_t>(*v));
                }
            }
            else if (key == "rho_grid")
            {
                c.rho_grid.clear();
                if (value.find(':') != std::string_view::npos)
                {
                    std::vector<double> parts;
                    std::size_t s = 0;
                    while (true)
                    {
                        const auto colon = value.find(':', s);
                        const auto tok = detail::trim(value.substr(s, colon == std::string_view::npos ? std::string_view::npos : colon - s));
                        const auto v = detail::to_double(tok);
                        if (!v)
                            throw bad("'" + std::string(tok) + "' is not a number");
                        parts.push_back(*v);
                        if (colon == std::string_view::npos)
                            break;
                        s = colon + 1;
                    }
                    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
                        throw bad("range must be start:stop:step with step > 0 and stop >= start");
                    const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
                    for (std::size_t i = 0; i <= count; ++i)
                        c.rho_grid.push_back(std::round((parts[0] + static_cast<double>(i) * parts[2]) * 1e9) / 1e9);
                }
                else
                {
                    for (auto tok : detail::split_list(value))
                    {
                        const auto v = detail::to_double(tok);
                        if (!v)
                            throw bad("'" + std::string(tok) + "' is not a number");
                        c.rho_grid.push_back(*v);
                    }
                }
                for (std::size_t i = 0; i < c.rho_grid.size(); ++i)
                {
                    if (!(c.rho_grid[i] >= 0.0 && c.rho_grid[i] <= 1.0))
                        throw bad("value " + detail::fmt_double(c.rho_grid[i]) + " outside [0, 1]");
                    if (i > 0 && !(c.rho_grid[i] > c.rho_grid[i - 1]))
                        throw bad("must be strictly ascending");
                }
            }
            else if (key == "alpha_list")
            {
                c.alpha_list.clear();
                for (auto tok : detail::split_list(value))
                {
                    const auto v = detail::to_double(tok);
                    if (!v)
                        throw bad("'" + std::string(tok) + "' is not a number");
                    if (!(*v > 0.0 && *v < 1.0))
                        throw bad("value " + std::string(tok) + " outside the open interval (0, 1)");
                    c.alpha_list.push_back(*v);
                }
            }
            else if (key == "reps")
            {
                const auto v = detail::to_count(value);
                if (!v || *v < 1)
                    throw bad("must be a positive integer");
                c.reps = static_cast<std::size_t>(*v);
            }
            else if (key == "master_seed")
            {
                std::uint64_t v = 0;
                const auto* end = value.data() + value.size();
                const auto r = std::from_chars(value.data(), end, v);
                if (r.ec != std::errc() || r.ptr != end)
                    throw bad("must be an unsigned 64-bit integer");
                c.master_seed = v;
            }
            else if (key == "mode")
            {
                if (value == "mc")
                    c.mode = RunMode::mc;
                else if (value == "oracle")
                    c.mode = RunMode::oracle;
                else if (value == "both")
                    c.mode = RunMode::both;
                else
                    throw bad("must be one of mc, oracle, both");
            }
            else if (key == "signal")
            {
                if (value == "none")
                {
                    c.signal.reset();
                    continue;
                }
                const auto toks = detail::split_list(value);
                if (toks.size() != 2)
                    throw bad("expected 'count, mean' or 'none'");
                const auto k = detail::to_count(toks[0]);
                const auto mu = detail::to_double(toks[1]);
                if (!k || *k < 1)
                    throw bad("false-null count must be a positive integer");
                if (!mu || !(*mu > 0.0))
                    throw bad("mean must be a positive number");
                c.signal = SignalSpec{static_cast<std::size_t>(*k), *mu};
            }
            else if (key == "output_dir")
            {
                c.output_dir = std::string(value);
            }
            else
            {
                throw bad("unknown key");
            }
        }
        validate(c);
        return c;
    }

    /// Canonical text form; parse_config(to_text(c)) == c.
    inline std::string to_text(const ExperimentConfig& c)
    {
        std::ostringstream os;
        const auto join = [&](const auto& xs, auto&& fmt) {
            for (std::size_t i = 0; i < xs.size(); ++i)
                os << (i ? ", " : "") << fmt(xs[i]);
            os << '\n';
        };
        os << "procedures = ";
        join(c.procedures, [](Procedure p) { return std::string(to_string(p)); });
        os << "n_list = ";
        join(c.n_list, [](std::size_t n) { return std::to_string(n); });
        os << "rho_grid = ";
        join(c.rho_grid, detail::fmt_double);
        os << "alpha_list = ";
        join(c.alpha_list, detail::fmt_double);
        os << "reps = " << c.reps << '\n';
        os << "master_seed = " << c.master_seed << '\n';
        os << "mode = " << to_string(c.mode) << '\n';
        if (c.signal)
            os << "signal = " << c.signal->false_nulls << ", " << detail::fmt_double(c.signal->mean) << '\n';
        else
            os << "signal = none\n";
        os << "output_dir = " << c.output_dir << '\n';
        return os.str();
    }

    inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a64(to_text(c)); }
} // namespace eqcorr

#endif // EQCORR_CONFIG_HPP
