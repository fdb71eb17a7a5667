#ifndef EQCORR_SVG_HPP
#define EQCORR_SVG_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "experiment.hpp"

namespace eqcorr
{
    /// Metric plotted for a procedure: FDR for BH, FWER otherwise.
    constexpr Metric plotted_metric(Procedure p) noexcept { return p == Procedure::bh ? Metric::fdr : Metric::fwer; }

    namespace detail
    {
        struct SvgFrame
        {
            double left = 70, top = 40, width = 480, height = 300;
            double y_max = 1.0;

            double x(double rho) const { return left + rho * width; }
            double y(double v) const { return top + height * (1.0 - std::clamp(v / y_max, 0.0, 1.0)); }
        };

        inline std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", v);
            return buf;
        }
    } // namespace detail

    /// SVG document for one (procedure, alpha, n) group; `rows` must already
    /// be restricted to that group and its plotted metric.
    inline std::string render_svg(Procedure procedure, double alpha, std::size_t n, const std::vector<ResultRow>& rows)
    {
        detail::SvgFrame f;
        f.y_max = 1.2 * alpha;
        const auto metric = plotted_metric(procedure);

        std::string s;
        s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"620\" height=\"400\" viewBox=\"0 0 620 400\">\n";
        s += "<rect x=\"0\" y=\"0\" width=\"620\" height=\"400\" fill=\"white\"/>\n";

        char title[160];
        std::snprintf(title, sizeof title, "%s %s, n = %zu, alpha = %g", std::string(to_string(procedure)).c_str(),
                      metric == Metric::fdr ? "FDR" : "FWER", n, alpha);
        s += "<text x=\"310\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">";
        s += title;
        s += "</text>\n";

        // Axes, ticks and labels.
        s += "<line x1=\"" + detail::num(f.x(0)) + "\" y1=\"" + detail::num(f.y(0)) + "\" x2=\"" + detail::num(f.x(1)) +
             "\" y2=\"" + detail::num(f.y(0)) + "\" stroke=\"black\"/>\n";
        s += "<line x1=\"" + detail::num(f.x(0)) + "\" y1=\"" + detail::num(f.y(0)) + "\" x2=\"" + detail::num(f.x(0)) +
             "\" y2=\"" + detail::num(f.top) + "\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 10; i += 2)
        {
            const double rho = i / 10.0;
            s += "<text x=\"" + detail::num(f.x(rho)) + "\" y=\"" + detail::num(f.y(0) + 18) +
                 "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + detail::num(rho).substr(0, 3) +
                 "</text>\n";
        }
        for (int i = 0; i <= 6; ++i)
        {
            const double v = f.y_max * i / 6.0;
            char lbl[32];
            std::snprintf(lbl, sizeof lbl, "%.4g", v);
            s += "<text x=\"" + detail::num(f.left - 6) + "\" y=\"" + detail::num(f.y(v) + 4) +
                 "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + lbl + "</text>\n";
        }
        s += "<text x=\"" + detail::num(f.x(0.5)) + "\" y=\"" + detail::num(f.y(0) + 40) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">rho</text>\n";
        s += "<text x=\"18\" y=\"" + detail::num(f.top + f.height / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
             detail::num(f.top + f.height / 2) + ")\" font-family=\"sans-serif\" font-size=\"13\">" +
             std::string(metric == Metric::fdr ? "FDR" : "FWER") + "</text>\n";

        // Reference line L(rho) = alpha (1 - rho).
        s += "<line class=\"reference\" x1=\"" + detail::num(f.x(0)) + "\" y1=\"" + detail::num(f.y(reference_line(alpha, 0))) +
             "\" x2=\"" + detail::num(f.x(1)) + "\" y2=\"" + detail::num(f.y(reference_line(alpha, 1))) +
             "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";

        for (auto source : {Source::oracle, Source::mc})
        {
            std::vector<const ResultRow*> pts;
            for (const auto& r : rows)
                if (r.source == source)
                    pts.push_back(&r);
            if (pts.empty())
                continue;
            std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->rho < b->rho; });
            const char* colour = source == Source::mc ? "#1f5fbf" : "#c0392b";
            s += std::string("<polyline class=\"") + std::string(to_string(source)) + "\" fill=\"none\" stroke=\"" +
                 colour + "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i)
                s += (i ? " " : "") + detail::num(f.x(pts[i]->rho)) + "," + detail::num(f.y(pts[i]->estimate));
            s += "\"/>\n";
            if (source == Source::mc)
                for (const auto* p : pts)
                {
                    const double lo = p->estimate - 2.0 * p->std_error;
                    const double hi = p->estimate + 2.0 * p->std_error;
                    s += "<line class=\"errorbar\" x1=\"" + detail::num(f.x(p->rho)) + "\" y1=\"" + detail::num(f.y(lo)) +
                         "\" x2=\"" + detail::num(f.x(p->rho)) + "\" y2=\"" + detail::num(f.y(hi)) + "\" stroke=\"" +
                         colour + "\"/>\n";
                }
        }
        s += "</svg>\n";
        return s;
    }

    struct SvgOutput
    {
        std::vector<std::filesystem::path> written;
        std::vector<std::string> warnings;
    };

    /// One SVG per (procedure, alpha, n) group into `dir`. Groups spanning
    /// fewer than two rho values are skipped with a warning.
    inline SvgOutput emit_svg(const std::vector<ResultRow>& rows, const std::filesystem::path& dir)
    {
        using Key = std::tuple<std::string, double, std::size_t>;
        std::map<Key, std::vector<ResultRow>> groups;
        for (const auto& r : rows)
            if (r.metric == plotted_metric(r.procedure))
                groups[{std::string(to_string(r.procedure)), r.alpha, r.n}].push_back(r);

        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw io_error("emit_svg: cannot create " + dir.string() + ": " + ec.message());

        SvgOutput out;
        for (const auto& [key, members] : groups)
        {
            const auto& [proc_name, alpha, n] = key;
            std::vector<double> rhos;
            for (const auto& r : members)
                rhos.push_back(r.rho);
            std::sort(rhos.begin(), rhos.end());
            rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
            char name[160];
            std::snprintf(name, sizeof name, "%s_alpha%g_n%zu.svg", proc_name.c_str(), alpha, n);
            if (rhos.size() < 2)
            {
                out.warnings.push_back(std::string("svg skipped: ") + name + " spans fewer than two rho values");
                continue;
            }
            const auto path = dir / name;
            std::ofstream os(path, std::ios::binary | std::ios::trunc);
            if (!os)
                throw io_error("emit_svg: cannot open " + path.string());
            os << render_svg(*parse_procedure(proc_name), alpha, n, members);
            out.written.push_back(path);
        }
        return out;
    }
} // namespace eqcorr

#endif // EQCORR_SVG_HPP
