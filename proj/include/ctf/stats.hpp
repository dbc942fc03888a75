#pragma once

#include <vector>

namespace ctf::stats {

// Standard normal cdf.
double normal_cdf(double z);

// Inverse standard normal cdf (Wichura's PPND16 rational approximation,
// absolute error well below 1e-9 over (0, 1)).
double inv_normal_cdf(double p);

// Regularized incomplete beta I_x(a, b) via Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability of a Student-t statistic with `dof` degrees of
// freedom.
double student_t_two_sided_p(double t, double dof);

// Two-sample-free Kolmogorov-Smirnov statistic of samples against a cdf
// evaluated at the sorted sample points (caller supplies cdf values aligned
// with the sorted sample).
double ks_statistic(const std::vector<double>& sorted_cdf_values);

// Asymptotic one-sample KS critical value at significance alpha.
double ks_critical_value(std::size_t n, double alpha);

double median(std::vector<double> values);
// Interquartile range endpoints (25th and 75th percentile, linear
// interpolation).
std::pair<double, double> iqr(std::vector<double> values);

}  // namespace ctf::stats
