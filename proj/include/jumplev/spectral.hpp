#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "jumplev/common.hpp"
#include "jumplev/preavg.hpp"
#include "jumplev/stats.hpp"
#include "jumplev/tick_series.hpp"

namespace jumplev {

// Window/frequency configuration for the sine-basis statistics, the pilot
// estimators and the truncation rule.
struct SpectralConfig {
    double kappa = 5.0 / 12.0;  // window constant, h = kappa log(n)/sqrt(n)
    double h_override = 0.0;    // >0 fixes the window length directly
    int J_override = 0;         // >0 fixes the spectral cut-off count
    double varpi = 0.35;        // truncation exponent for the literal u = scale * h^varpi rule
    double R_pilot = 3.0;       // pilot bin count = R_pilot * n^(1/4) per side
    int J_pilot = 10;           // pilot max frequency
    double sig2_floor = 1e-10;  // positive floor for variance plug-ins
    double trunc_scale = 0.0;   // >0: u = trunc_scale * h^varpi; else robust auto scale
    double trunc_mult = 4.0;    // auto rule: u = trunc_mult * median(|bin stats|)

    double window(long n) const {
        if (h_override > 0) return h_override;
        return kappa * std::log(static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
    }
    int cutoff(long n) const {
        if (J_override > 0) return J_override;
        int j = static_cast<int>(std::lround(5.0 * std::log(static_cast<double>(n))));
        return j < 1 ? 1 : j;
    }
    int pilot_bins(long n) const {
        int r = static_cast<int>(std::lround(R_pilot * std::pow(static_cast<double>(n), 0.25)));
        return r < 1 ? 1 : r;
    }
    double trunc_threshold(double h, const std::vector<double>& bin_stats) const {
        if (trunc_scale > 0) return trunc_scale * std::pow(h, varpi);
        std::vector<double> a;
        a.reserve(bin_stats.size());
        for (double s : bin_stats) a.push_back(std::abs(s));
        return trunc_mult * median(std::move(a));
    }
};

// Noise variance and one-sided pilot spot volatilities used to build adaptive
// weights and thresholds.
struct PilotEstimates {
    double eta2 = 0.0;
    double sig2_left = 0.0;
    double sig2_right = 0.0;
};

struct JumpEstimate {
    double value = 0.0;
    double avar = 0.0;         // asymptotic variance, 2 sqrt((s2l+s2r)/2) eta [x spacing^(1/2)]
    double rate_factor = 1.0;  // n^(1/4)
    double var_exact = 0.0;    // finite-sample variance of value
    std::vector<double> weights;
    double h = 0.0;
    double stat = 0.0;
    double pvalue = 1.0;
};

// Sine basis localized on [tau-h/2, tau+h/2], L2-normalized on the window.
inline double sine_basis(int j, double tau, double h, double t) {
    if (j < 1) throw estimation_error("sine_basis: frequency must be >= 1");
    const double lo = tau - 0.5 * h;
    if (t < lo || t > tau + 0.5 * h) return 0.0;
    return std::sqrt(2.0 / h) * std::sin(j * std::numbers::pi * (t - lo) / h);
}

namespace detail {

// Sum of dY_i * Phi_j(mid_i) for all return midpoints inside the window.
// allow_partial permits windows clipped by the sample edges (used for
// boundary-bin statistics); the public entry point enforces containment.
inline double spectral_statistic_impl(const TickSeries& ts, double tau, double h, int j,
                                      bool allow_partial) {
    if (j < 1) throw estimation_error("spectral_statistic: frequency must be >= 1");
    const double lo = tau - 0.5 * h, hi = tau + 0.5 * h;
    if (!allow_partial && (lo < -1e-12 || hi > 1.0 + 1e-12))
        throw estimation_error("spectral_statistic: window outside [0,1]");
    long first = ts.index_after(lo);
    if (first < 1) first = 1;
    double s = 0.0;
    bool any = false;
    const double c = j * std::numbers::pi / h;
    for (long i = first; i <= ts.n(); ++i) {
        const double m = ts.mid(i);
        if (m > hi) break;
        if (m < lo) continue;
        s += ts.ret(i) * std::sin(c * (m - lo));
        any = true;
    }
    if (!any) throw estimation_error("spectral_statistic: empty window");
    return std::sqrt(2.0 / h) * s;
}

// Per-frequency variance of S_j: 0.5(s2l+s2r) + pi^2 j^2 h^-2 eta^2 / n.
inline double freq_variance(int j, double sig2_left, double sig2_right, double eta2, double h,
                            long n, double spacing = 1.0) {
    const double pj = std::numbers::pi * j / h;
    return 0.5 * (sig2_left + sig2_right) + pj * pj * eta2 * spacing / static_cast<double>(n);
}

}  // namespace detail

inline double spectral_statistic(const TickSeries& ts, double tau, double h, int j) {
    return detail::spectral_statistic_impl(ts, tau, h, j, false);
}

// Minus the lag-one autocovariance of returns, floored at zero.
inline double estimate_noise_variance(const TickSeries& ts) {
    const long n = ts.n();
    if (n < 2) throw estimation_error("estimate_noise_variance: series too short");
    double s = 0.0;
    for (long i = 2; i <= n; ++i) s += ts.ret(i) * ts.ret(i - 1);
    double eta2 = -s / static_cast<double>(n);
    return eta2 > 0.0 ? eta2 : 0.0;
}

// Local noise variance from returns inside [lo, hi] only.
inline double estimate_noise_variance_local(const TickSeries& ts, double lo, double hi) {
    long first = std::max<long>(2, ts.index_after(lo));
    long last = std::min<long>(ts.n(), ts.index_after(hi) - 1);
    if (last - first < 16) return estimate_noise_variance(ts);  // too few returns: fall back to global
    double s = 0.0;
    for (long i = first; i <= last; ++i) s += ts.ret(i) * ts.ret(i - 1);
    double eta2 = -s / static_cast<double>(last - first + 1);
    return eta2 > 0.0 ? eta2 : 0.0;
}

enum class Side { Left, Right };

// Truncated average over pilot bins of bias-corrected squared spectral
// statistics, frequencies 1..J_pilot. Bins whose mean statistic exceeds the
// truncation threshold in absolute value are dropped and the average is taken
// over the kept bins.
inline double pilot_spot_vol(const TickSeries& ts, double tau, Side side, const SpectralConfig& cfg,
                             double eta2 = -1.0) {
    const long n = ts.n();
    const double h = cfg.window(n);
    if (eta2 < 0) eta2 = estimate_noise_variance(ts);
    const int jp = cfg.J_pilot;
    const int want = cfg.pilot_bins(n);

    std::vector<double> stats;
    stats.reserve(want);
    for (int k = 1; k <= want; ++k) {
        const double center = side == Side::Left ? tau - k * h : tau + k * h;
        if (center - 0.5 * h < 0.0 || center + 0.5 * h > 1.0) break;
        double m = 0.0;
        for (int j = 1; j <= jp; ++j) {
            const double s = spectral_statistic(ts, center, h, j);
            const double pj = std::numbers::pi * j / h;
            m += s * s - pj * pj * eta2 / static_cast<double>(n);
        }
        stats.push_back(m / jp);
    }
    if (stats.empty()) throw estimation_error("pilot_spot_vol: insufficient bins on requested side");

    const double u = cfg.trunc_threshold(h, stats);
    double sum = 0.0;
    long kept = 0;
    for (double m : stats) {
        if (std::abs(m) <= u) {
            sum += m;
            ++kept;
        }
    }
    if (kept == 0) throw estimation_error("pilot_spot_vol: all bins truncated");
    return std::max(sum / static_cast<double>(kept), cfg.sig2_floor);
}

inline PilotEstimates make_pilots(const TickSeries& ts, double tau, const SpectralConfig& cfg) {
    PilotEstimates p;
    p.eta2 = estimate_noise_variance(ts);
    p.sig2_left = pilot_spot_vol(ts, tau, Side::Left, cfg, p.eta2);
    p.sig2_right = pilot_spot_vol(ts, tau, Side::Right, cfg, p.eta2);
    return p;
}

// Optimal weights over odd frequencies 1, 3, ..., 2J-1, proportional to the
// inverse per-frequency variance and normalized to sum one.
inline std::vector<double> oracle_weights(double sig2_left, double sig2_right, double eta2,
                                          double h, long n, int J, double spacing = 1.0) {
    if (sig2_left <= 0 || sig2_right <= 0 || eta2 < 0 || h <= 0 || J < 1)
        throw estimation_error("oracle_weights: invalid inputs");
    std::vector<double> w(J);
    double sum = 0.0;
    for (int j = 1; j <= J; ++j) {
        const double v = detail::freq_variance(2 * j - 1, sig2_left, sig2_right, eta2, h, n, spacing);
        w[j - 1] = 1.0 / v;
        sum += w[j - 1];
    }
    for (double& x : w) x /= sum;
    return w;
}

// Rescaled weighted sum of odd-frequency spectral statistics with adaptive
// weights; rate n^(1/4). Estimates the price jump at tau.
inline JumpEstimate spectral_jump_estimator(const TickSeries& ts, double tau,
                                            const SpectralConfig& cfg, const PilotEstimates& pil) {
    const long n = ts.n();
    const double h = cfg.window(n);
    const int J = cfg.cutoff(n);
    if (tau - 0.5 * h < 0.0 || tau + 0.5 * h > 1.0)
        throw estimation_error("spectral_jump_estimator: window outside [0,1]");
    const double s2l = std::max(pil.sig2_left, cfg.sig2_floor);
    const double s2r = std::max(pil.sig2_right, cfg.sig2_floor);
    const double spacing = ts.spacing_factor(tau, h);

    JumpEstimate e;
    e.h = h;
    e.weights = oracle_weights(s2l, s2r, pil.eta2, h, n, J, spacing);
    double t = 0.0;
    double inv_var_sum = 0.0;
    const double scale = std::sqrt(0.5 * h);
    for (int j = 1; j <= J; ++j) {
        const double s = spectral_statistic(ts, tau, h, 2 * j - 1);
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        t += sign * e.weights[j - 1] * s * scale;
        inv_var_sum += 1.0 / detail::freq_variance(2 * j - 1, s2l, s2r, pil.eta2, h, n, spacing);
    }
    e.value = t;
    e.var_exact = 0.5 * h / inv_var_sum;
    e.rate_factor = std::pow(static_cast<double>(n), 0.25);
    e.avar = e.rate_factor * e.rate_factor * e.var_exact;
    e.stat = e.value / std::sqrt(e.var_exact);
    e.pvalue = two_sided_pvalue(e.stat);
    return e;
}

inline TestResult spectral_jump_test(const TickSeries& ts, double tau, const SpectralConfig& cfg,
                                     const PilotEstimates& pil) {
    const JumpEstimate e = spectral_jump_estimator(ts, tau, cfg, pil);
    TestResult r;
    r.estimate = e.value;
    r.variance = e.var_exact;
    r.stat = e.stat;
    r.pvalue = e.pvalue;
    return r;
}

}  // namespace jumplev
