#pragma once

#include <cstddef>

namespace labelmeas::stats {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF, accurate over the full double range.
double norm_cdf(double x);

/// log(norm_cdf(x)) without underflow in the far left tail.
double norm_log_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS 241, |abs err| < 1e-9).
/// p must lie in (0,1).
double norm_quantile(double p);

/// Two-sided normal p-value for a z statistic.
double two_sided_p(double z);

struct OddsRatio {
    double or_value;
    double lo;
    double hi;
};

/// exp(coef) with a Wald interval exp(coef +- z(level)*se).
/// level is the two-sided confidence level in (0,1); se must be >= 0 and finite.
OddsRatio odds_ratio(double coef, double se, double level);

/// Sample mean.
double mean(const double* x, std::size_t n);

/// Sample standard deviation with divisor n-1.
double sample_sd(const double* x, std::size_t n);

}  // namespace labelmeas::stats
