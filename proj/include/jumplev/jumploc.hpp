#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "jumplev/common.hpp"
#include "jumplev/spectral.hpp"
#include "jumplev/spotvol.hpp"
#include "jumplev/stats.hpp"
#include "jumplev/tick_series.hpp"

namespace jumplev {

enum class ThresholdLog { Log, LogLog };

// Bin partition of the day with per-bin pilot volatility and detection
// thresholds u_k = u_mult * L(K) * h * sig2_pil with L = log or log(log).
struct BinGridConfig {
    SpectralConfig spec;
    double bins_mult = 3.0;  // K = floor(bins_mult * sqrt(n) / log(n))
    int K_override = 0;
    double u_mult = 2.0;
    ThresholdLog tlog = ThresholdLog::Log;

    int bins(long n) const {
        if (K_override > 0) return K_override;
        return static_cast<int>(std::floor(bins_mult * std::sqrt(static_cast<double>(n)) /
                                           std::log(static_cast<double>(n))));
    }
};

struct BinGrid {
    int K = 0;
    double h = 0.0;
    double eta2 = 0.0;
    std::vector<double> pilot_sig2;  // per bin, index 0 unused (bins are 1-based)
    std::vector<double> u;           // per-bin detection threshold
};

// One detected price jump with its refined time, cut-out window, size and
// flanking spot volatilities.
struct JumpEvent {
    int k = 0;
    double tau_hat = 0.0;
    long win_lo = 0, win_hi = 0;  // tick indices; observations strictly inside are cut out
    double dx_hat = 0.0;
    double qv_inc = 0.0;
    double u_k = 0.0;
    double sig2_left = 0.0;
    double sig2_right = 0.0;
    double eta2_local = 0.0;
    double vol_jump_pvalue = 1.0;
    double price_pvalue = 1.0;
    double vol_diff_var = 0.0;  // exact variance of (sig2_right - sig2_left)
    int kept_left = 0, kept_right = 0;
    int refine_R = 0;
};

// Pilot volatility per bin: sliding truncated mean of the per-bin
// bias-corrected mean statistics, so thresholds track intraday volatility.
inline BinGrid make_bin_grid(const TickSeries& ts, const BinGridConfig& cfg) {
    const long n = ts.n();
    if (n < 100) throw estimation_error("make_bin_grid: series too short (n < 100)");
    const int K = cfg.bins(n);
    if (K < 3) throw estimation_error("make_bin_grid: fewer than 3 bins");
    BinGrid g;
    g.K = K;
    g.h = 1.0 / K;
    g.eta2 = estimate_noise_variance(ts);

    const int jp = cfg.spec.J_pilot;
    std::vector<double> m(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) {
        const double center = (k - 0.5) * g.h;
        double acc = 0.0;
        for (int j = 1; j <= jp; ++j) {
            const double s = detail::spectral_statistic_impl(ts, center, g.h, j, true);
            const double pj = std::numbers::pi * j / g.h;
            acc += s * s - pj * pj * g.eta2 / static_cast<double>(n);
        }
        m[k] = acc / jp;
    }

    const int span = std::min(K, std::max(3, cfg.spec.pilot_bins(n)));
    g.pilot_sig2.assign(K + 1, 0.0);
    g.u.assign(K + 1, 0.0);
    const double lk = cfg.tlog == ThresholdLog::Log
                          ? std::log(static_cast<double>(K))
                          : std::log(std::log(static_cast<double>(K)));
    for (int k = 1; k <= K; ++k) {
        int lo = k - span / 2, hi = lo + span - 1;
        if (lo < 1) { lo = 1; hi = std::min(K, lo + span - 1); }
        if (hi > K) { hi = K; lo = std::max(1, hi - span + 1); }
        std::vector<double> local(m.begin() + lo, m.begin() + hi + 1);
        const double u = cfg.spec.trunc_threshold(g.h, local);
        double sum = 0.0;
        int kept = 0;
        for (double v : local) {
            if (std::abs(v) <= u) { sum += v; ++kept; }
        }
        g.pilot_sig2[k] = std::max(kept > 0 ? sum / kept : m[k], cfg.spec.sig2_floor);
        g.u[k] = cfg.u_mult * lk * g.h * g.pilot_sig2[k];
    }
    return g;
}

// Half-bin-shifted statistic for unbiased jump-variation estimation: odd
// frequencies, half weight on the bin-centered and half on the best shifted
// window, bias corrected and floored at zero.
inline double shifted_bin_stats(const TickSeries& ts, int k, const BinGrid& g,
                                const BinGridConfig& cfg) {
    if (k < 1 || k > g.K) throw estimation_error("shifted_bin_stats: bin out of range");
    const long n = ts.n();
    const int J = cfg.spec.cutoff(n);
    std::vector<int> freqs;
    for (int j = 1; j <= J; j += 2) freqs.push_back(j);
    const double sig2 = g.pilot_sig2[std::clamp(k, 1, g.K)];
    const std::vector<double> w = detail::quad_weights(freqs, sig2, g.eta2, g.h, n);

    auto zeta_for = [&](int shift_bin) {
        double z = 0.0;
        for (std::size_t a = 0; a < freqs.size(); ++a) {
            const int j = freqs[a];
            const double s = detail::spectral_statistic_impl(ts, (k - 0.5) * g.h, g.h, j, true);
            const double st =
                detail::spectral_statistic_impl(ts, (shift_bin - 1.0) * g.h, g.h, j, true);
            const double pj = std::numbers::pi * j / g.h;
            z += w[a] * (0.5 * s * s + 0.5 * st * st - pj * pj * g.eta2 / static_cast<double>(n));
        }
        return z;
    };
    // shifted windows centered at the left and right bin edges
    const double z = std::max(zeta_for(k), zeta_for(k + 1));
    return std::max(z, 0.0);
}

// h * zeta_k when bin k dominates both neighbors (strict), else zero.
// Boundary bins are excluded by the detection range, but their statistics
// still serve as neighbors.
inline double qv_increment(const TickSeries& ts, int k, const BinGrid& g,
                           const BinGridConfig& cfg) {
    if (k < 2 || k > g.K - 1) throw estimation_error("qv_increment: boundary bin");
    const double zk = shifted_bin_stats(ts, k, g, cfg);
    const double zl = shifted_bin_stats(ts, k - 1, g, cfg);
    const double zr = shifted_bin_stats(ts, k + 1, g, cfg);
    return zk > std::max(zl, zr) ? g.h * zk : 0.0;
}

// Bins k = 2..K-1 whose jump-variation increment clears max(a^2, u_k).
inline std::vector<int> detect_jump_bins(const TickSeries& ts, const BinGrid& g,
                                         const BinGridConfig& cfg, double a = 0.0) {
    std::vector<int> out;
    if (g.K < 3) return out;
    std::vector<double> zeta(g.K + 2, 0.0);
    for (int k = 1; k <= g.K; ++k) zeta[k] = shifted_bin_stats(ts, k, g, cfg);
    for (int k = 2; k <= g.K - 1; ++k) {
        if (zeta[k] <= std::max(zeta[k - 1], zeta[k + 1])) continue;
        const double qv = g.h * zeta[k];
        if (qv > std::max(a * a, g.u[k])) out.push_back(k);
    }
    return out;
}

struct JumpWindow {
    long lo = 0, hi = 0;   // tick indices bounding the cut-out window
    double tau_hat = 0.0;  // midpoint of the winning sub-interval
    int R_eff = 0;         // sub-interval count actually used
};

// Partition bin k into R sub-intervals, score each with a short pre-average
// statistic (window = half the sub-interval), and return the argmax
// sub-interval. Ties break toward the lowest index.
inline JumpWindow refine_jump_time(const TickSeries& ts, int k, const BinGrid& g, int R) {
    if (R < 1) throw estimation_error("refine_jump_time: R must be >= 1");
    if (k < 2 || k > g.K - 1) throw estimation_error("refine_jump_time: boundary bin");
    const long n = ts.n();
    long first = ts.index_after((k - 1) * g.h);  // first tick strictly inside the bin
    long last = ts.index_after(k * g.h) - 1;     // last tick inside
    if (last > n) last = n;
    const long count = last - first;  // number of returns spanned by the bin
    if (count < 2) throw estimation_error("refine_jump_time: bin too sparse");

    long s;
    int r_eff;
    if (R >= count - 1) {
        s = 1;  // per-return scan: centers on the largest absolute return
        r_eff = static_cast<int>(count);
    } else if (count / R < 2) {
        s = 2;  // bin too sparse for R sub-intervals: R is reduced (see R_eff)
        r_eff = static_cast<int>(count / 2);
    } else {
        s = count / R;
        if (s % 2 != 0) --s;  // sub-interval return count kept even
        r_eff = R;
    }

    double best = -1.0;
    int best_i = 0;
    for (int i = 0; i < r_eff; ++i) {
        const long lo = first + i * s;
        const long hi = lo + s;
        double t;
        if (s == 1) {
            t = ts.y[hi] - ts.y[lo];
        } else {
            const long m = s / 2;
            const long c = lo + m;
            if (c - m < 0 || c + m - 1 > n) continue;
            t = preaveraged_price(ts, c, m) - preaveraged_price(ts, c - m, m);
        }
        if (std::abs(t) > best) {
            best = std::abs(t);
            best_i = i;
        }
    }
    JumpWindow w;
    w.lo = first + best_i * s;
    w.hi = w.lo + s;
    w.tau_hat = 0.5 * (ts.times[w.lo] + ts.times[w.hi]);
    w.R_eff = r_eff;
    return w;
}

// Spectral jump estimate centered on the cut-out window: observations strictly
// inside (lo, hi) are deleted, the right flank is shifted toward the center,
// and the estimator runs on the spliced series with the junction return in the
// middle of its window.
inline JumpEstimate estimate_jump_at_window(const TickSeries& ts, const JumpWindow& w,
                                            const SpectralConfig& cfg,
                                            const PilotEstimates& pil) {
    const long n = ts.n();
    if (w.lo < 1 || w.hi <= w.lo || w.hi > n) throw estimation_error("estimate_jump_at_window: bad window");
    const double dt = (ts.times.back() - ts.times.front()) / static_cast<double>(n);

    TickSeries sp;
    const long removed = w.hi - w.lo - 1;
    sp.times.reserve(ts.size() - removed);
    sp.y.reserve(ts.size() - removed);
    for (long i = 0; i <= w.lo; ++i) {
        sp.times.push_back(ts.times[i]);
        sp.y.push_back(ts.y[i]);
    }
    const double shift = ts.times[w.hi] - ts.times[w.lo] - dt;
    for (long i = w.hi; i <= n; ++i) {
        sp.times.push_back(ts.times[i] - shift);
        sp.y.push_back(ts.y[i]);
    }

    const double tau_c = ts.times[w.lo] + 0.5 * dt;
    const double h = cfg.window(sp.n());
    if (tau_c - 0.5 * h < sp.times.front() || tau_c + 0.5 * h > sp.times.back())
        throw estimation_error("estimate_jump_at_window: flanks unavailable near sample edges");
    return spectral_jump_estimator(sp, tau_c, cfg, pil);
}

}  // namespace jumplev
