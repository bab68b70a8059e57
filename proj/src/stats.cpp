#include "manakov/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manakov::stats {

SampleSummary summarize(std::span<const double> xs) {
    SampleSummary s;
    s.n = xs.size();
    if (s.n == 0) return s;
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (const double x : xs) {
        ++k;
        const double d = x - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (x - mean);
    }
    s.mean = mean;
    if (s.n > 1) {
        s.variance = m2 / static_cast<double>(s.n - 1);
        s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
    }
    return s;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
    if (n == 0 || m == 0) throw std::invalid_argument("ks_critical_value: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks_critical_value: alpha");
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const auto dn = static_cast<double>(n);
    const auto dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
        out.emplace_back(v[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

bool non_increasing_within(std::span<const double> d, std::span<const double> se, double k) {
    if (d.size() != se.size()) throw std::invalid_argument("non_increasing_within: size mismatch");
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        const double slack = k * std::sqrt(se[i] * se[i] + se[i + 1] * se[i + 1]);
        if (d[i + 1] > d[i] + slack) return false;
    }
    return true;
}

}  // namespace manakov::stats
