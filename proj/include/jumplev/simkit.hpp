#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "jumplev/common.hpp"
#include "jumplev/stats.hpp"
#include "jumplev/tick_series.hpp"

namespace jumplev {

// One injected price jump: additive shift of the log price at the first grid
// point strictly after `time`.
struct PriceJump {
    double time = 0.5;
    double size = -0.002;
};

// One injected squared-volatility jump, sized as a ratio of the pre-jump level
// (rel_size = 1.373 raises sig2 by 137.3%).
struct VolJump {
    double time = 0.5;
    double rel_size = 1.373;
};

// Heston-type data generating process. The variance path is kept in the
// conventional daily percent^2 units; `variance_unit_scale` converts it to
// natural log-price variance per day and `session_days` is the real-time
// length of the simulated [0,1] interval (1/6.5 for a one-hour session).
struct SimConfig {
    long n = 23400;
    double kappa_mr = 0.0162;   // mean reversion per day
    double theta = 0.8465;      // long-run variance level
    double xi = 0.117;          // vol of vol per sqrt(day)
    double sig2_0 = -1.0;       // initial variance; <0 means theta
    double q = 0.0005;          // market quality (noise scale)
    std::optional<PriceJump> price_jump;
    std::optional<VolJump> vol_jump;
    std::uint64_t seed = 1;
    double session_days = 1.0;
    double variance_unit_scale = 1e-4;
    double sig2_clip = 1e-12;

    void validate() const {
        if (n < 2) throw estimation_error("SimConfig: n must be >= 2");
        if (kappa_mr <= 0 || theta <= 0 || xi < 0) throw estimation_error("SimConfig: kappa/theta/xi must be positive");
        if (session_days <= 0 || variance_unit_scale <= 0) throw estimation_error("SimConfig: scale factors must be positive");
        if (price_jump && (price_jump->time <= 0.0 || price_jump->time >= 1.0))
            throw estimation_error("SimConfig: price jump time outside (0,1)");
        if (vol_jump && (vol_jump->time <= 0.0 || vol_jump->time >= 1.0))
            throw estimation_error("SimConfig: vol jump time outside (0,1)");
    }
};

// Simulated day: efficient log price x, variance path sig2 (paper units),
// observed noisy price y. All arrays have n+1 entries on the grid i/n.
struct SimPath {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> sig2;
    std::vector<double> y;

    // Realized injected sizes, for truth bookkeeping in study runs.
    double injected_dx = 0.0;
    double injected_dsig2 = 0.0;   // natural units per day
    long jump_index = -1;

    TickSeries observed() const {
        TickSeries ts;
        ts.times = times;
        ts.y = y;
        return ts;
    }
};

// Euler-Maruyama on the n-step grid with full-truncation clipping of the
// variance before taking square roots. B and W independent.
inline SimPath simulate_path(const SimConfig& cfg) {
    cfg.validate();
    SimPath p;
    const long n = cfg.n;
    p.times.resize(n + 1);
    p.x.resize(n + 1);
    p.sig2.resize(n + 1);

    const double ds = 1.0 / static_cast<double>(n);
    const double kd = cfg.kappa_mr * cfg.session_days;
    const double xd = cfg.xi * std::sqrt(cfg.session_days);
    // per-grid-step return variance = sig2(paper) * unit_scale * session_days / n
    const double x_scale = cfg.variance_unit_scale * cfg.session_days;

    std::mt19937_64 rng(derive_seed(cfg.seed, 0, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);

    long jp = -1, jv = -1;
    if (cfg.price_jump) jp = static_cast<long>(std::floor(cfg.price_jump->time * n)) + 1;
    if (cfg.vol_jump) jv = static_cast<long>(std::floor(cfg.vol_jump->time * n)) + 1;

    p.times[0] = 0.0;
    p.sig2[0] = cfg.sig2_0 > 0 ? cfg.sig2_0 : cfg.theta;
    p.x[0] = 1.0;
    for (long i = 1; i <= n; ++i) {
        p.times[i] = static_cast<double>(i) * ds;
        const double s2prev = std::max(p.sig2[i - 1], cfg.sig2_clip);
        const double zb = gauss(rng);
        const double zw = gauss(rng);
        double s2 = p.sig2[i - 1] + kd * (cfg.theta - p.sig2[i - 1]) * ds +
                    xd * std::sqrt(s2prev * ds) * zb;
        if (i == jv) {
            const double ds2 = cfg.vol_jump->rel_size * std::max(s2, cfg.sig2_clip);
            s2 += ds2;
            p.injected_dsig2 = ds2 * cfg.variance_unit_scale;
        }
        p.sig2[i] = s2;
        p.x[i] = p.x[i - 1] + std::sqrt(std::max(s2prev, cfg.sig2_clip) * x_scale * ds) * zw;
        if (i == jp) {
            p.x[i] += cfg.price_jump->size;
            p.injected_dx = cfg.price_jump->size;
            p.jump_index = i;
        }
    }
    return p;
}

// Market microstructure noise: a return-correlated component plus the white
// market-quality term U_i ~ N(0, q^2); dX_0 and dX_-1 are treated as zero.
inline SimPath add_noise(const SimPath& path, double q, std::uint64_t seed) {
    if (path.x.size() < 2) throw estimation_error("add_noise: path has no prices");
    if (q < 0) throw estimation_error("add_noise: q must be >= 0");
    SimPath out = path;
    const std::size_t m = path.x.size();
    std::mt19937_64 rng(derive_seed(seed, 0, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    out.y.resize(m);
    double dx_prev = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = i == 0 ? 0.0 : path.x[i] - path.x[i - 1];
        const double u = q > 0 ? q * gauss(rng) : 0.0;
        out.y[i] = path.x[i] + 0.0861 * dx + 0.06 * (dx + dx_prev) + u;
        dx_prev = dx;
    }
    return out;
}

// simulate_path + add_noise with substreams derived from cfg.seed.
inline SimPath simulate_observed(const SimConfig& cfg) {
    SimPath p = simulate_path(cfg);
    return add_noise(p, cfg.q, cfg.seed + 0x51ab5);
}

}  // namespace jumplev
