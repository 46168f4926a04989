#pragma once

#include <cmath>
#include <cstdint>

#include "jumplev/common.hpp"
#include "jumplev/stats.hpp"
#include "jumplev/tick_series.hpp"

namespace jumplev {

// Pre-average (local window) jump statistic configuration. The window is
// M = c * sqrt(n/k) where k is the assumed serial-dependence order of the
// noise; m_mult implements the documented doubling for large-noise runs.
struct LmConfig {
    double c = 1.0 / 19.0;
    int k = 2;
    double m_mult = 1.0;
    long m_override = 0;  // >0 fixes M directly

    long window(long n) const {
        if (m_override > 0) return m_override;
        if (k < 1) throw estimation_error("LmConfig: k must be >= 1");
        long m = static_cast<long>(std::floor(c * std::sqrt(static_cast<double>(n) / k) * m_mult));
        if (m < 2) m = 2;
        if (m > n / 2) m = n / 2;
        return m;
    }
};

struct TestResult {
    double estimate = 0.0;
    double stat = 0.0;
    double variance = 0.0;  // variance of the (unscaled) estimate
    double pvalue = 1.0;

    bool reject(double alpha) const { return pvalue < alpha; }
};

// Mean of y over indices j .. min(j+M-1, n); the upper limit clamps at the
// last observation.
inline double preaveraged_price(const TickSeries& ts, long j, long M) {
    const long n = ts.n();
    if (j < 0 || j > n) throw estimation_error("preaveraged_price: index out of range");
    if (M < 1) throw estimation_error("preaveraged_price: window must be >= 1");
    long hi = j + M - 1;
    if (hi > n) hi = n;
    double s = 0.0;
    for (long i = j; i <= hi; ++i) s += ts.y[i];
    return s / static_cast<double>(hi - j + 1);
}

inline double lm_statistic_at_index(const TickSeries& ts, long l, long M) {
    const long n = ts.n();
    if (M < 1 || l < M || l > n - M + 1)
        throw estimation_error("lm_statistic: window exceeds series bounds");
    return preaveraged_price(ts, l, M) - preaveraged_price(ts, l - M, M);
}

// P(t_l) - P(t_{l-M}) with l the first index after tau. Estimates the jump
// size at tau; equals the weighted-return form used in the variance analysis.
inline double lm_statistic(const TickSeries& ts, double tau, const LmConfig& cfg) {
    const long n = ts.n();
    const long M = cfg.window(n);
    const long l = ts.index_after(tau);
    if (l < M || l > n - M) throw estimation_error("lm_statistic: window exceeds series bounds");
    return lm_statistic_at_index(ts, l, M);
}

// Exact finite-window variance of the statistic: the squared return weights
// (M-k)/M summed per side plus the 2 eta^2 / M noise term. Converges to the
// (1/3)(sig2_r + sig2_l) c^2 + 2 eta^2 form (after sqrt(M) scaling) for large M.
inline double lm_variance(long n, long M, double sig2_left, double sig2_right, double eta2,
                          double spacing = 1.0) {
    double a = 0.0, b = 0.0;
    for (long k = 1; k < M; ++k) {
        double w = static_cast<double>(M - k) / static_cast<double>(M);
        a += w * w;
    }
    b = a + 1.0;  // k = 0 term has weight 1
    return (sig2_right * a + sig2_left * b) * spacing / static_cast<double>(n) +
           2.0 * eta2 / static_cast<double>(M);
}

// Standardized test of H0: no jump at tau, two-sided normal p-value.
// Variance plug-ins are the caller's; by default they come from the spectral
// pilot estimators.
inline TestResult lm_test(const TickSeries& ts, double tau, const LmConfig& cfg, double sig2_left,
                          double sig2_right, double eta2) {
    if (sig2_left <= 0 || sig2_right <= 0 || eta2 < 0)
        throw estimation_error("lm_test: nonpositive variance inputs");
    const long n = ts.n();
    const long M = cfg.window(n);
    TestResult r;
    r.estimate = lm_statistic(ts, tau, cfg);
    r.variance = lm_variance(n, M, sig2_left, sig2_right, eta2, ts.spacing_factor(tau, 2.0 * M / n));
    r.stat = r.estimate / std::sqrt(r.variance);
    r.pvalue = two_sided_pvalue(r.stat);
    return r;
}

// Cut-out variant for an unknown jump time inside the window (lo, hi) of tick
// indices: averages start at hi (right of the window) and end before lo.
inline double adjusted_lm_statistic(const TickSeries& ts, long lo, long hi, long M) {
    const long n = ts.n();
    if (M < 1 || lo < M || hi < lo || hi + M - 1 > n)
        throw estimation_error("adjusted_lm_statistic: window bounds invalid");
    return preaveraged_price(ts, hi, M) - preaveraged_price(ts, lo - M, M);
}

}  // namespace jumplev
