#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace manakov::stats {

struct SampleSummary {
    double mean = 0.0;
    double variance = 0.0;  ///< unbiased; 0 for a single sample
    double std_error = 0.0;    ///< sqrt(variance / n)
    std::size_t n = 0;
};

SampleSummary summarize(std::span<const double> xs);

/// sup_x |F_a(x) - F_b(x)| for the two empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value c(alpha) sqrt((n + m) / (n m)) with
/// c(alpha) = sqrt(-ln(alpha / 2) / 2).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

/// Sorted (value, cumulative fraction) pairs.
std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> xs);

/// True when d[i+1] <= d[i] + k * sqrt(se[i]^2 + se[i+1]^2) for every i.
bool non_increasing_within(std::span<const double> d, std::span<const double> se, double k);

}  // namespace manakov::stats
