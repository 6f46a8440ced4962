#pragma once

// Small statistics toolbox for the verification harness: two-sample
// Kolmogorov-Smirnov, binomial confidence intervals, sample moments.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace graphdiff {

// Two-sample KS statistic; sorts copies of both samples.  Ties are consumed
// from both samples before the gap is measured, so identical samples score 0.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

// Asymptotic critical value: reject at level alpha when KS exceeds this.
inline double ks_critical(double alpha, size_t n, size_t m) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(double(n + m) / (double(n) * double(m)));
}

// Normal-approximation half-width for a binomial proportion; z = 2.576 gives
// the 99% interval.
inline double binomial_ci_halfwidth(double phat, size_t n, double z = 2.576) {
    return z * std::sqrt(std::max(phat * (1.0 - phat), 1e-12) / double(n));
}

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    size_t n = 0;
};

inline MeanSE mean_se(std::span<const double> xs) {
    MeanSE r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / double(r.n);
    double v = 0.0;
    for (double x : xs) v += (x - r.mean) * (x - r.mean);
    r.se = r.n > 1 ? std::sqrt(v / double(r.n - 1) / double(r.n)) : 0.0;
    return r;
}

}  // namespace graphdiff
