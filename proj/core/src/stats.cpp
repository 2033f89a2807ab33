#include "labelmeas/stats.hpp"

#include <cmath>

#include "labelmeas/errors.hpp"

namespace labelmeas::stats {

double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
    // erfc keeps precision in the far tails where 1-erf would cancel.
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double norm_log_cdf(double x) {
    if (x > -8.0) return std::log(norm_cdf(x));
    // Asymptotic tail expansion: Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4).
    const double x2 = x * x;
    return -0.5 * x2 - 0.9189385332046727 - std::log(-x) +
           std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw numeric_error("norm_quantile: p must be in (0,1)");

    // AS 241 (PPND16), Wichura 1988.
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }

    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return (q < 0.0) ? -value : value;
}

double two_sided_p(double z) {
    return std::erfc(std::fabs(z) * M_SQRT1_2);
}

OddsRatio odds_ratio(double coef, double se, double level) {
    if (!std::isfinite(coef) || !std::isfinite(se) || se < 0.0)
        throw numeric_error("odds_ratio: coef/se must be finite, se >= 0");
    if (!(level > 0.0 && level < 1.0))
        throw numeric_error("odds_ratio: level must be in (0,1)");
    const double z = norm_quantile(0.5 + level / 2.0);
    return {std::exp(coef), std::exp(coef - z * se), std::exp(coef + z * se)};
}

double mean(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return n ? s / static_cast<double>(n) : 0.0;
}

double sample_sd(const double* x, std::size_t n) {
    if (n < 2) return 0.0;
    const double m = mean(x, n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x[i] - m) * (x[i] - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

}  // namespace labelmeas::stats
