#ifndef EQCORR_CSV_HPP
#define EQCORR_CSV_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "experiment.hpp"

namespace eqcorr
{
    inline constexpr std::string_view csv_header =
        "procedure,n,rho,alpha,metric,source,estimate,std_error,reps,master_seed,reference_value,flags";

    inline std::string format_csv(std::vector<ResultRow> rows)
    {
        sort_rows(rows);
        std::string out(csv_header);
        out += '\n';
        char buf[512];
        for (const auto& r : rows)
        {
            std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g,%s,%s,%.17g,%.17g,%zu,%llu,%.17g,",
                          std::string(to_string(r.procedure)).c_str(), r.n, r.rho, r.alpha,
                          std::string(to_string(r.metric)).c_str(), std::string(to_string(r.source)).c_str(),
                          r.estimate, r.std_error, r.reps, static_cast<unsigned long long>(r.master_seed),
                          r.reference_value);
            out += buf;
            out += r.flags;
            out += '\n';
        }
        return out;
    }

    /// Writes rows in canonical order; byte-identical for identical rows.
    inline void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path)
    {
        if (rows.empty())
            throw domain_error("emit_csv: no rows to write");
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw io_error("emit_csv: cannot open " + path.string() + " for writing");
        const auto text = format_csv(rows);
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!os)
            throw io_error("emit_csv: write to " + path.string() + " failed");
    }

    inline std::vector<ResultRow> parse_csv(const std::string& text)
    {
        std::istringstream is(text);
        std::string line;
        if (!std::getline(is, line) || line != csv_header)
            throw io_error("parse_csv: missing or unexpected header");
        std::vector<ResultRow> rows;
        std::size_t line_no = 1;
        while (std::getline(is, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            std::vector<std::string> f;
            std::size_t start = 0;
            while (true)
            {
                const auto comma = line.find(',', start);
                f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
                if (comma == std::string::npos)
                    break;
                start = comma + 1;
            }
            const auto fail = [&](const std::string& what) {
                return io_error("parse_csv: line " + std::to_string(line_no) + ": " + what);
            };
            if (f.size() != 12)
                throw fail("expected 12 fields");
            ResultRow r;
            const auto proc = parse_procedure(f[0]);
            const auto metric = parse_metric(f[4]);
            if (!proc)
                throw fail("unknown procedure '" + f[0] + "'");
            if (!metric)
                throw fail("unknown metric '" + f[4] + "'");
            if (f[5] != "mc" && f[5] != "oracle")
                throw fail("unknown source '" + f[5] + "'");
            const auto num = [&](const std::string& s) {
                const auto v = detail::to_double(s);
                if (!v)
                    throw fail("bad number '" + s + "'");
                return *v;
            };
            const auto count = [&](const std::string& s) {
                const auto v = detail::to_count(s);
                if (!v)
                    throw fail("bad integer '" + s + "'");
                return *v;
            };
            r.procedure = *proc;
            r.n = static_cast<std::size_t>(count(f[1]));
            r.rho = num(f[2]);
            r.alpha = num(f[3]);
            r.metric = *metric;
            r.source = f[5] == "mc" ? Source::mc : Source::oracle;
            r.estimate = num(f[6]);
            r.std_error = num(f[7]);
            r.reps = static_cast<std::size_t>(count(f[8]));
            r.master_seed = count(f[9]);
            r.reference_value = num(f[10]);
            r.flags = f[11];
            rows.push_back(std::move(r));
        }
        return rows;
    }

    inline std::vector<ResultRow> read_csv(const std::filesystem::path& path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw io_error("read_csv: cannot open " + path.string());
        std::ostringstream ss;
        ss << is.rdbuf();
        return parse_csv(ss.str());
    }
} // namespace eqcorr

#endif // EQCORR_CSV_HPP
