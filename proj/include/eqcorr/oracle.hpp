#ifndef EQCORR_ORACLE_HPP
#define EQCORR_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "normal.hpp"
#include "procedures.hpp"
#include "types.hpp"

/// Quadrature-grade error rates under the equicorrelated global null.
///
/// Given the common factor Z the coordinates are iid, so every quantity
/// reduces to a one-dimensional expectation over Z ~ N(0, 1):
///
///   FWER(c)   = 1 - E_Z[ Phi((c - sqrt(rho) Z) / sqrt(1 - rho))^n ]
///   P(BH > 0) = 1 - E_Z[ P(U_(j) > b_j(Z) for all j) ]
///
/// with U iid uniform and b_j(z) the conditional probability that a p-value
/// falls below j alpha / n.
namespace eqcorr
{
    /// Nodes and weights for E[g(Z)], Z standard normal: sum_k w_k g(z_k).
    struct QuadratureRule
    {
        std::vector<double> nodes;
        std::vector<double> weights;
        std::size_t order = 0;
    };

    namespace detail
    {
        /// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_m.
        inline void gauss_legendre(std::size_t m, std::vector<double>& x, std::vector<double>& w)
        {
            x.assign(m, 0.0);
            w.assign(m, 0.0);
            const std::size_t half = (m + 1) / 2;
            for (std::size_t i = 0; i < half; ++i)
            {
                double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
                double dp = 0.0;
                for (int iter = 0; iter < 100; ++iter)
                {
                    double p0 = 1.0, p1 = 0.0;
                    for (std::size_t j = 1; j <= m; ++j)
                    {
                        const double p2 = p1;
                        p1 = p0;
                        p0 = ((2.0 * static_cast<double>(j) - 1.0) * z * p1 - (static_cast<double>(j) - 1.0) * p2) /
                             static_cast<double>(j);
                    }
                    dp = static_cast<double>(m) * (z * p0 - p1) / (z * z - 1.0);
                    const double step = p0 / dp;
                    z -= step;
                    if (std::abs(step) < 1e-16)
                        break;
                }
                x[i] = -z;
                x[m - 1 - i] = z;
                w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
            }
        }

        /// Kahan-compensated running sum.
        struct CompensatedSum
        {
            double sum = 0.0;
            double carry = 0.0;

            void add(double v) noexcept
            {
                const double y = v - carry;
                const double t = sum + y;
                carry = (t - sum) - y;
                sum = t;
            }
        };
    } // namespace detail

    inline constexpr std::size_t rule_panel_points = 16;
    inline constexpr double rule_half_width = 9.0;

    /// Composite 16-point Gauss-Legendre rule on [lo, hi] with the weights
    /// multiplied by phi, so sum w_k f(z_k) approximates the integral of
    /// f(z) phi(z) over the interval. `order` is the total node count and
    /// must be a positive multiple of 16. Plain Gauss-Hermite cannot resolve
    /// the steep conditional integrands that arise for large n and rho;
    /// evenly spaced panels can.
    inline QuadratureRule make_interval_rule(std::size_t order, double lo, double hi)
    {
        if (order == 0 || order % rule_panel_points != 0)
            throw domain_error("make_interval_rule: order must be a positive multiple of 16");
        if (!(lo < hi))
            throw domain_error("make_interval_rule: need lo < hi");
        static const auto base = [] {
            std::pair<std::vector<double>, std::vector<double>> xw;
            detail::gauss_legendre(rule_panel_points, xw.first, xw.second);
            return xw;
        }();
        const auto& [gx, gw] = base;

        QuadratureRule rule;
        rule.order = order;
        rule.nodes.reserve(order);
        rule.weights.reserve(order);
        const std::size_t panels = order / rule_panel_points;
        const double width = (hi - lo) / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p)
        {
            const double mid = lo + (static_cast<double>(p) + 0.5) * width;
            for (std::size_t i = 0; i < rule_panel_points; ++i)
            {
                const double z = mid + 0.5 * width * gx[i];
                rule.nodes.push_back(z);
                rule.weights.push_back(0.5 * width * gw[i] * normal_pdf(z));
            }
        }
        return rule;
    }

    /// The standard rule over [-9, 9]; mass outside is below 2.3e-19.
    inline QuadratureRule make_normal_rule(std::size_t order)
    {
        QuadratureRule rule = make_interval_rule(order, -rule_half_width, rule_half_width);
        // Mirror exactly so the rule is symmetric to the last bit.
        for (std::size_t i = 0; i < order / 2; ++i)
        {
            rule.nodes[order - 1 - i] = -rule.nodes[i];
            rule.weights[order - 1 - i] = rule.weights[i];
        }
        return rule;
    }

    inline constexpr std::size_t default_rule_order = 128;
    inline constexpr std::size_t max_rule_order = 2048;
    inline constexpr double oracle_tolerance = 1e-9;

    /// Rules of order 128, 256, ..., 2048, built once.
    inline const QuadratureRule& standard_rule(std::size_t order)
    {
        static const std::array<QuadratureRule, 5> rules = [] {
            std::array<QuadratureRule, 5> r;
            for (std::size_t i = 0; i < r.size(); ++i)
                r[i] = make_normal_rule(default_rule_order << i);
            return r;
        }();
        for (const auto& r : rules)
            if (r.order == order)
                return r;
        throw domain_error("standard_rule: order must be 128 * 2^k, at most 2048");
    }

    struct ConvergedValue
    {
        double value = 0.0;
        std::size_t order = 0;  ///< order of the accepted evaluation
        double change = 0.0;    ///< |I(order) - I(order / 2)|
    };

    /// Evaluates `eval(rule)` at order 128, 256, ... until two consecutive
    /// orders differ by less than `tol`. Throws convergence_error past 2048.
    template <typename Eval>
    ConvergedValue converge(Eval&& eval, double tol = oracle_tolerance)
    {
        double previous = eval(standard_rule(default_rule_order));
        for (std::size_t order = 2 * default_rule_order; order <= max_rule_order; order *= 2)
        {
            const double current = eval(standard_rule(order));
            const double change = std::abs(current - previous);
            if (change < tol)
                return {current, order, change};
            previous = current;
        }
        char msg[96];
        std::snprintf(msg, sizeof msg, "quadrature did not converge to %g by order %zu", tol, max_rule_order);
        throw convergence_error(msg);
    }

    /// P(max_i X_i > c) for n equicorrelated standard normals, using one rule.
    inline double fwer_exact(std::size_t n, Rho rho, double c, const QuadratureRule& rule)
    {
        if (n == 0)
            throw domain_error("fwer_exact: n must be at least 1");
        detail::require_finite(c, "fwer_exact");
        const double dn = static_cast<double>(n);
        if (rho.value() == 0.0)
            return -std::expm1(dn * normal_log_cdf(c));
        if (rho.degenerate())
            return normal_sf(c);

        const double load = std::sqrt(rho.value());
        const double scale = 1.0 / std::sqrt(1.0 - rho.value());
        detail::CompensatedSum acc;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        {
            const double t = (c - load * rule.nodes[k]) * scale;
            acc.add(rule.weights[k] * -std::expm1(dn * normal_log_cdf(t)));
        }
        return std::clamp(acc.sum, 0.0, 1.0);
    }

    /// FWER with automatic order doubling to the 1e-9 convergence criterion.
    inline ConvergedValue fwer_exact_converged(std::size_t n, Rho rho, double c)
    {
        if (rho.value() == 0.0 || rho.degenerate())
            return {fwer_exact(n, rho, c, standard_rule(default_rule_order)), 0, 0.0};
        return converge([&](const QuadratureRule& r) { return fwer_exact(n, rho, c, r); });
    }

    inline double fwer_exact(std::size_t n, Rho rho, double c) { return fwer_exact_converged(n, rho, c).value; }

    inline constexpr std::size_t bh_oracle_max_n = 1000;

    namespace detail
    {
        /// States below this mass are dropped from the boundary DP; with at
        /// most n^2 states the discarded total stays far below 1e-12.
        inline constexpr double dp_prune_mass = 1e-30;
    }

    /// P(U_(j) > b_j for j = 1..n) for n iid uniforms and nondecreasing
    /// thresholds b in [0, 1].
    ///
    /// Dynamic program over the cells (b_{j-1}, b_j]: the state after cell j
    /// is the number k of uniforms at or below b_j, restricted to k <= j - 1
    /// (the no-crossing condition). Given k uniforms at or below b_{j-1} the
    /// other n - k are iid on (b_{j-1}, 1], so the count landing in the next
    /// cell is binomial. All terms are positive, so nothing cancels.
    inline double bh_norejection_conditional(std::span<const double> b)
    {
        const std::size_t n = b.size();
        if (n == 0)
            throw domain_error("bh_norejection_conditional: need at least one threshold");
        for (std::size_t j = 0; j < n; ++j)
        {
            if (!(b[j] >= 0.0 && b[j] <= 1.0))
                throw domain_error("bh_norejection_conditional: thresholds must lie in [0, 1]");
            if (j > 0 && b[j] < b[j - 1])
                throw domain_error("bh_norejection_conditional: thresholds must be nondecreasing");
        }

        std::vector<double> cur(n + 1, 0.0), nxt(n + 1, 0.0), carry(n + 1, 0.0);
        cur[0] = 1.0;
        std::size_t lo = 0, hi = 0; // live state range in `cur`
        double prev_b = 0.0;

        for (std::size_t j = 1; j <= n; ++j)
        {
            const double bj = b[j - 1];
            const std::size_t cap = j - 1; // at most j-1 uniforms may sit at or below b_j
            if (prev_b >= 1.0)
                return 0.0;
            const double p = std::min(1.0, (bj - prev_b) / (1.0 - prev_b));

            std::size_t new_lo = n + 1, new_hi = 0;
            for (std::size_t k = lo; k <= hi; ++k)
            {
                const double mass = cur[k];
                if (mass == 0.0 || k > cap)
                    continue;
                const std::size_t trials = n - k;
                const std::size_t max_m = std::min(trials, cap - k);

                auto deposit = [&](std::size_t m, double pmf) {
                    const std::size_t target = k + m;
                    const double y = mass * pmf - carry[target];
                    const double t = nxt[target] + y;
                    carry[target] = (t - nxt[target]) - y;
                    nxt[target] = t;
                    new_lo = std::min(new_lo, target);
                    new_hi = std::max(new_hi, target);
                };

                if (p <= 0.0)
                {
                    deposit(0, 1.0);
                    continue;
                }
                if (p >= 1.0)
                {
                    if (trials <= max_m)
                        deposit(trials, 1.0);
                    continue;
                }

                // Binomial(trials, p) pmf for m = 0..max_m, walked upward from
                // m = 0 in log space, linear once representable.
                const double odds = p / (1.0 - p);
                const double log_odds = std::log(p) - std::log1p(-p);
                double log_pmf = static_cast<double>(trials) * std::log1p(-p);
                bool linear = log_pmf > -700.0;
                double pmf = linear ? std::exp(log_pmf) : 0.0;
                const double mode = std::floor((static_cast<double>(trials) + 1.0) * p);
                double peak = 0.0;
                for (std::size_t m = 0; m <= max_m; ++m)
                {
                    if (m > 0)
                    {
                        const double ratio = static_cast<double>(trials - m + 1) / static_cast<double>(m);
                        if (linear)
                            pmf *= ratio * odds;
                        else
                        {
                            log_pmf += std::log(ratio) + log_odds;
                            linear = log_pmf > -700.0;
                            pmf = linear ? std::exp(log_pmf) : 0.0;
                        }
                    }
                    peak = std::max(peak, pmf);
                    if (pmf * mass > detail::dp_prune_mass)
                        deposit(m, pmf);
                    else if (static_cast<double>(m) > mode && pmf < 1e-20 * peak)
                        break;
                }
            }

            std::fill(cur.begin() + static_cast<std::ptrdiff_t>(lo), cur.begin() + static_cast<std::ptrdiff_t>(hi) + 1, 0.0);
            if (new_lo > new_hi)
                return 0.0;
            lo = new_lo;
            hi = new_hi;
            for (std::size_t k = lo; k <= hi; ++k)
            {
                cur[k] = nxt[k];
                nxt[k] = 0.0;
                carry[k] = 0.0;
            }
            while (lo < hi && cur[lo] < detail::dp_prune_mass)
                cur[lo++] = 0.0;
            while (hi > lo && cur[hi] < detail::dp_prune_mass)
                cur[hi--] = 0.0;
            prev_b = bj;
        }

        detail::CompensatedSum total;
        for (std::size_t k = lo; k <= hi; ++k)
            total.add(cur[k]);
        return std::clamp(total.sum, 0.0, 1.0);
    }

    namespace detail
    {
        /// P(no BH rejection | Z = z) for fixed upper quantiles q_j.
        struct BhConditional
        {
            std::size_t n;
            double load;  // sqrt(rho)
            double scale; // 1 / sqrt(1 - rho)
            std::span<const double> quantiles;

            double no_rejection(double z, std::vector<double>& b) const
            {
                b.resize(n);
                for (std::size_t j = 0; j < n; ++j)
                    b[j] = normal_cdf((load * z - quantiles[j]) * scale);
                // Guard monotonicity against last-ulp noise in Phi.
                for (std::size_t j = 1; j < n; ++j)
                    b[j] = std::max(b[j], b[j - 1]);
                return bh_norejection_conditional(b);
            }
        };

        inline constexpr double bh_window_eps = 1e-15;

        /// The conditional no-rejection probability falls monotonically in z
        /// from 1 to 0, and for large n it does so over a window that
        /// shrinks like 1 / sqrt(n). Bisection finds [lo, hi] with the
        /// probability at least 1 - eps below lo and at most eps above hi.
        inline std::pair<double, double> bh_transition_window(const BhConditional& g)
        {
            std::vector<double> b;
            const auto edge = [&](auto&& past) {
                double a = -rule_half_width, c = rule_half_width;
                if (past(g.no_rejection(a, b)))
                    return std::pair{a, a};
                if (!past(g.no_rejection(c, b)))
                    return std::pair{c, c};
                while (c - a > 1e-10)
                {
                    const double mid = 0.5 * (a + c);
                    (past(g.no_rejection(mid, b)) ? c : a) = mid;
                }
                return std::pair{a, c};
            };
            const double lo = edge([](double v) { return v < 1.0 - bh_window_eps; }).first;
            const double hi = edge([](double v) { return v <= bh_window_eps; }).second;
            return {lo, std::max(lo, hi)};
        }

        /// Integral of phi(z) (1 - g(z)): the rule of the given order spans
        /// the transition window and the region above it contributes its
        /// normal tail mass.
        inline double bh_any_rejection_windowed(const BhConditional& g, std::pair<double, double> window,
                                                std::size_t order)
        {
            const auto [lo, hi] = window;
            CompensatedSum acc;
            acc.add(normal_sf(hi));
            if (hi - lo > 1e-12)
            {
                const QuadratureRule rule = make_interval_rule(order, lo, hi);
                std::vector<double> b;
                for (std::size_t k = 0; k < rule.nodes.size(); ++k)
                {
                    const double w = rule.weights[k];
                    if (w < 1e-20)
                        continue; // contributes at most w
                    acc.add(w * (1.0 - g.no_rejection(rule.nodes[k], b)));
                }
            }
            return std::clamp(acc.sum, 0.0, 1.0);
        }

        inline std::vector<double> bh_upper_quantiles(std::size_t n, Alpha alpha)
        {
            std::vector<double> q(n);
            for (std::size_t j = 1; j <= n; ++j)
                q[j - 1] = normal_upper_quantile(bh_threshold(alpha.value(), j, n));
            return q;
        }

        inline void require_bh_oracle_n(std::size_t n)
        {
            if (n == 0)
                throw domain_error("bh_any_rejection_exact: n must be at least 1");
            if (n > bh_oracle_max_n)
                throw domain_error("bh_any_rejection_exact: n above " + std::to_string(bh_oracle_max_n) +
                                   " is not supported by the boundary DP");
        }
    } // namespace detail

    /// Probability that BH rejects at least one hypothesis under the global
    /// null, which is also its FDR and FWER there.
    inline double bh_any_rejection_exact(std::size_t n, Rho rho, Alpha alpha, const QuadratureRule& rule)
    {
        detail::require_bh_oracle_n(n);
        if (rho.value() == 0.0 || rho.degenerate())
            return alpha.value();
        const auto q = detail::bh_upper_quantiles(n, alpha);
        const detail::BhConditional g{n, std::sqrt(rho.value()), 1.0 / std::sqrt(1.0 - rho.value()), q};
        return detail::bh_any_rejection_windowed(g, detail::bh_transition_window(g), rule.order);
    }

    inline ConvergedValue bh_any_rejection_converged(std::size_t n, Rho rho, Alpha alpha)
    {
        detail::require_bh_oracle_n(n);
        if (rho.value() == 0.0 || rho.degenerate())
            return {alpha.value(), 0, 0.0};
        const auto q = detail::bh_upper_quantiles(n, alpha);
        const detail::BhConditional g{n, std::sqrt(rho.value()), 1.0 / std::sqrt(1.0 - rho.value()), q};
        const auto window = detail::bh_transition_window(g);
        return converge([&](const QuadratureRule& r) { return detail::bh_any_rejection_windowed(g, window, r.order); });
    }

    inline double bh_any_rejection_exact(std::size_t n, Rho rho, Alpha alpha)
    {
        return bh_any_rejection_converged(n, rho, alpha).value;
    }
} // namespace eqcorr

#endif // EQCORR_ORACLE_HPP
