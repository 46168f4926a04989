#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "jumplev/common.hpp"
#include "jumplev/spectral.hpp"
#include "jumplev/stats.hpp"
#include "jumplev/tick_series.hpp"

namespace jumplev {

// Bin-wise adaptive spot volatility on a grid of windows of length h.
// r_inv bins are averaged per side; rate exponent beta ties the default bin
// count to r_n = n^-beta log(n).
struct SpotVolConfig {
    SpectralConfig spec;
    double beta = 0.2;
    double r_const = 1.0;
    int r_inv_override = 0;

    int r_inv(long n) const {
        if (r_inv_override > 0) return r_inv_override;
        double r = r_const * std::pow(static_cast<double>(n), beta) / std::log(static_cast<double>(n));
        long v = std::lround(r);
        return static_cast<int>(v < 1 ? 1 : v);
    }
};

struct SpotVolEstimate {
    double sig2_left = 0.0;
    double sig2_right = 0.0;
    int kept_left = 0;
    int kept_right = 0;
    double eta2 = 0.0;          // local noise variance used in the scaling
    double avar = 0.0;          // 8 (sig_l^3 + sig_r^3) eta
    double beta_eff = 0.0;      // realized rate exponent: n^beta = h sqrt(n) r_inv
    double rate_scale_left = 0.0;   // h sqrt(n) kept_left
    double rate_scale_right = 0.0;
    double h = 0.0;
};

namespace detail {

// Weights proportional to the squared inverse per-frequency variance
// (variance of S^2 scales with the square), normalized over the requested
// frequency set.
inline std::vector<double> quad_weights(const std::vector<int>& freqs, double sig2, double eta2,
                                        double h, long n) {
    std::vector<double> w(freqs.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double v = freq_variance(freqs[i], sig2, sig2, eta2, h, n);
        w[i] = 1.0 / (v * v);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

}  // namespace detail

// Bias-corrected weighted average of squared spectral statistics on bin k
// (1-based, bins ((k-1)h, kh], statistics centered at (k-1/2)h).
inline double bin_adaptive_stat(const TickSeries& ts, int k, const SpotVolConfig& cfg,
                                const PilotEstimates& pil, double h = 0.0) {
    const long n = ts.n();
    if (h <= 0) h = cfg.spec.window(n);
    const long nbins = static_cast<long>(std::floor(1.0 / h + 1e-9));
    if (k < 1 || k > nbins) throw estimation_error("bin_adaptive_stat: bin out of range");
    const int J = cfg.spec.cutoff(n);
    const double center = (k - 0.5) * h;
    const double sig2 = std::max(0.5 * (pil.sig2_left + pil.sig2_right), cfg.spec.sig2_floor);

    std::vector<int> freqs(J);
    for (int j = 1; j <= J; ++j) freqs[j - 1] = j;
    const std::vector<double> w = detail::quad_weights(freqs, sig2, pil.eta2, h, n);

    double z = 0.0;
    for (int j = 1; j <= J; ++j) {
        const double s = detail::spectral_statistic_impl(ts, center, h, j, true);
        const double pj = std::numbers::pi * j / h;
        z += w[j - 1] * (s * s - pj * pj * pil.eta2 / static_cast<double>(n));
    }
    return z;
}

struct SpotSideResult {
    double value = 0.0;
    int kept = 0;
};

// Truncated average of bin statistics over the r_inv bins strictly before
// (left) or after (right) the bin containing tau.
inline SpotSideResult spot_vol_side(const TickSeries& ts, double tau, Side side,
                                    const SpotVolConfig& cfg, const PilotEstimates& pil,
                                    double h = 0.0) {
    const long n = ts.n();
    if (h <= 0) h = cfg.spec.window(n);
    const long nbins = static_cast<long>(std::floor(1.0 / h + 1e-9));
    const long k_tau = std::min<long>(nbins, static_cast<long>(std::floor(tau / h)) + 1);
    const int want = cfg.r_inv(n);

    std::vector<double> stats;
    stats.reserve(want);
    for (int i = 1; i <= want; ++i) {
        const long k = side == Side::Left ? k_tau - i : k_tau + i;
        if (k < 1 || k > nbins) break;
        stats.push_back(bin_adaptive_stat(ts, static_cast<int>(k), cfg, pil, h));
    }
    if (stats.empty()) throw estimation_error("spot_vol: insufficient bins on requested side");

    std::vector<double> scaled;
    scaled.reserve(stats.size());
    for (double z : stats) scaled.push_back(h * z);
    const double u = cfg.spec.trunc_threshold(h, scaled);

    double sum = 0.0;
    int kept = 0;
    for (double z : stats) {
        if (std::abs(h * z) <= u) {
            sum += z;
            ++kept;
        }
    }
    if (kept == 0) throw estimation_error("spot_vol: all bins truncated");
    SpotSideResult r;
    r.value = std::max(sum / kept, 0.0);
    r.kept = kept;
    return r;
}

inline double spot_vol(const TickSeries& ts, double tau, Side side, const SpotVolConfig& cfg) {
    PilotEstimates pil = make_pilots(ts, tau, cfg.spec);
    return spot_vol_side(ts, tau, side, cfg, pil).value;
}

// Both sides plus the local noise level and the realized rate scales.
inline SpotVolEstimate estimate_spot_vol(const TickSeries& ts, double tau, const SpotVolConfig& cfg,
                                         const PilotEstimates* pilots = nullptr) {
    const long n = ts.n();
    const double h = cfg.spec.window(n);
    PilotEstimates pil = pilots ? *pilots : make_pilots(ts, tau, cfg.spec);

    SpotVolEstimate e;
    e.h = h;
    const SpotSideResult l = spot_vol_side(ts, tau, Side::Left, cfg, pil, h);
    const SpotSideResult r = spot_vol_side(ts, tau, Side::Right, cfg, pil, h);
    e.sig2_left = l.value;
    e.sig2_right = r.value;
    e.kept_left = l.kept;
    e.kept_right = r.kept;
    const int span = std::max(l.kept, r.kept) + 1;
    e.eta2 = estimate_noise_variance_local(ts, tau - span * h, tau + span * h);
    const double sqn = std::sqrt(static_cast<double>(n));
    e.rate_scale_left = h * sqn * l.kept;
    e.rate_scale_right = h * sqn * r.kept;
    const double sl = std::sqrt(e.sig2_left), sr = std::sqrt(e.sig2_right);
    e.avar = 8.0 * (sl * sl * sl + sr * sr * sr) * std::sqrt(e.eta2);
    e.beta_eff = std::log(0.5 * (e.rate_scale_left + e.rate_scale_right)) /
                 std::log(static_cast<double>(n));
    return e;
}

// Test of H0: no squared-volatility jump at tau. The statistic standardizes
// the left/right difference by its exact variance 8 eta (sig_l^3/scale_l +
// sig_r^3/scale_r), the finite-sample form of the n^(beta/2) normalization.
inline TestResult vol_jump_test(const TickSeries& ts, double tau, const SpotVolConfig& cfg,
                                double eta_tau2 = -1.0, const PilotEstimates* pilots = nullptr) {
    SpotVolEstimate e = estimate_spot_vol(ts, tau, cfg, pilots);
    if (eta_tau2 >= 0) e.eta2 = eta_tau2;
    TestResult r;
    r.estimate = e.sig2_right - e.sig2_left;
    const double eta = std::sqrt(std::max(e.eta2, cfg.spec.sig2_floor));
    const double sl = std::sqrt(std::max(e.sig2_left, cfg.spec.sig2_floor));
    const double sr = std::sqrt(std::max(e.sig2_right, cfg.spec.sig2_floor));
    r.variance = 8.0 * eta * (sl * sl * sl / e.rate_scale_left + sr * sr * sr / e.rate_scale_right);
    if (r.variance <= 0) throw estimation_error("vol_jump_test: degenerate variance");
    r.stat = r.estimate == 0.0 ? 0.0 : r.estimate / std::sqrt(r.variance);
    r.pvalue = two_sided_pvalue(r.stat);
    return r;
}

}  // namespace jumplev
