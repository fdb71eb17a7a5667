#ifndef EQCORR_NORMAL_HPP
#define EQCORR_NORMAL_HPP

#include <cmath>
#include <numbers>

#include "error.hpp"

/// Standard normal special functions.
///
/// Accuracy budget (absolute unless stated):
///   normal_cdf       <= 1e-13 for |x| <= 8
///   normal_log_cdf   exp(result) relative <= 1e-12 for x >= -8, <= 1e-8 below
///   normal_quantile  |cdf(quantile(p)) - p| <= 1e-10 on [1e-12, 1 - 1e-12]
///   normal_pdf       relative <= 1e-14
namespace eqcorr
{
    namespace detail
    {
        inline void require_finite(double x, const char* what)
        {
            if (!std::isfinite(x))
                throw domain_error(std::string(what) + ": argument must be finite");
        }

        template <std::size_t N>
        constexpr double horner(double x, const double (&c)[N])
        {
            double acc = c[N - 1];
            for (std::size_t i = N - 1; i-- > 0;)
                acc = acc * x + c[i];
            return acc;
        }
    } // namespace detail

    inline constexpr double inv_sqrt_2pi = 0.39894228040143267793994605993438;

    /// phi(x). x*x is split with an fma so the exponent carries no rounding
    /// error from the square.
    inline double normal_pdf(double x)
    {
        detail::require_finite(x, "normal_pdf");
        const double hi = x * x;
        const double lo = std::fma(x, x, -hi);
        return inv_sqrt_2pi * std::exp(-0.5 * hi) * std::exp(-0.5 * lo);
    }

    /// Phi(x) = erfc(-x / sqrt 2) / 2. erfc is the C library's rational
    /// (fdlibm/glibc s_erf.c) approximation, accurate to about 1 ulp, and keeps
    /// full relative precision in the lower tail.
    inline double normal_cdf(double x)
    {
        detail::require_finite(x, "normal_cdf");
        return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
    }

    /// Upper tail 1 - Phi(x) without cancellation.
    inline double normal_sf(double x)
    {
        detail::require_finite(x, "normal_sf");
        return 0.5 * std::erfc(x * std::numbers::sqrt2 * 0.5);
    }

    inline constexpr double log_cdf_tail_switch = -8.0;

    /// log Phi(x). Below x = -8 the Mills-ratio asymptotic series
    ///   Phi(x) ~ phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
    /// is summed until its terms stop shrinking.
    inline double normal_log_cdf(double x)
    {
        detail::require_finite(x, "normal_log_cdf");
        if (x > 0.0)
            return std::log1p(-normal_sf(x));
        if (x >= log_cdf_tail_switch)
            return std::log(normal_cdf(x));

        const double inv_x2 = 1.0 / (x * x);
        double term = 1.0;
        double series = 1.0;
        for (int k = 1; k < 60; ++k)
        {
            const double next = -term * (2.0 * k - 1.0) * inv_x2;
            if (std::abs(next) >= std::abs(term))
                break;
            term = next;
            series += term;
            if (std::abs(term) < 1e-17)
                break;
        }
        const double log_pdf = -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
        return log_pdf - std::log(-x) + std::log(series);
    }

    /// Phi^{-1}(p) by Wichura's algorithm AS 241 (PPND16, Applied Statistics
    /// 37(3), 1988), relative accuracy about 1e-16. Coefficients transcribed
    /// from the published algorithm.
    inline double normal_quantile(double p)
    {
        if (!(p > 0.0 && p < 1.0))
            throw domain_error("normal_quantile: probability must lie in (0, 1)");

        static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                       1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                       4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                       3.3430575583588128105e+4, 2.5090809287301226727e+3};
        static constexpr double b[] = {1.0,
                                       4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                       5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                       3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                       5.2264952788528545610e+3};
        static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                       5.76949722146069140550e0, 3.64784832476320460504e0,
                                       1.27045825245236838258e0, 2.41780725177450611770e-1,
                                       2.27238449892691845833e-2, 7.74545014278341407640e-4};
        static constexpr double d[] = {1.0,
                                       2.05319162663775882187e0, 1.67638483018380384940e0,
                                       6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                       1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                       1.05075007164441684324e-9};
        static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                       1.78482653991729133580e0, 2.96560571828504891230e-1,
                                       2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                       2.71155556874348757815e-5, 2.01033439929228813265e-7};
        static constexpr double f[] = {1.0,
                                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                       1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                       1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                       2.04426310338993978564e-15};

        const double q = p - 0.5;
        if (std::abs(q) <= 0.425)
        {
            const double r = 0.180625 - q * q;
            return q * detail::horner(r, a) / detail::horner(r, b);
        }

        double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
        double value;
        if (r <= 5.0)
        {
            r -= 1.6;
            value = detail::horner(r, c) / detail::horner(r, d);
        }
        else
        {
            r -= 5.0;
            value = detail::horner(r, e) / detail::horner(r, f);
        }
        return q < 0.0 ? -value : value;
    }

    /// z with 1 - Phi(z) = q, computed from the lower tail so tiny q keeps its
    /// precision (1 - q would round away).
    inline double normal_upper_quantile(double q)
    {
        if (!(q > 0.0 && q < 1.0))
            throw domain_error("normal_upper_quantile: probability must lie in (0, 1)");
        return -normal_quantile(q);
    }
} // namespace eqcorr

#endif // EQCORR_NORMAL_HPP
