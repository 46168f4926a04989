#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "jumplev/common.hpp"
#include "jumplev/pipeline.hpp"
#include "jumplev/simkit.hpp"
#include "jumplev/stats.hpp"

namespace jumplev {

// ---------------------------------------------------------------------------
// Replication pool: tasks are seeded by (root, replication, stage) so results
// are identical for any thread count; reductions run in replication order.
// ---------------------------------------------------------------------------

inline int mc_threads() {
    if (const char* env = std::getenv("JUMPLEV_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void run_parallel(long tasks, const std::function<void(long)>& fn) {
    const int nthreads = std::min<long>(mc_threads(), tasks);
    if (nthreads <= 1) {
        for (long i = 0; i < tasks; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= tasks) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Price-jump test/estimator study (size, power, RMSE) on one-hour sessions
// ---------------------------------------------------------------------------

struct PriceJumpCell {
    double q = 0.0005;
    long n = 3600;
    double jump_mult = 0.0;  // jump size = jump_mult * q
};

struct PriceJumpCellResult {
    PriceJumpCell cell;
    long reps = 0;
    long failures = 0;
    double reject_preavg = 0.0;
    double reject_spectral = 0.0;
    double rmse_preavg = 0.0;     // x 1e4
    double rmse_spectral = 0.0;   // x 1e4
    std::vector<double> null_stats_preavg;    // standardized stats (kept when jump_mult == 0)
    std::vector<double> null_stats_spectral;
};

struct PriceJumpStudyConfig {
    long reps = 6000;
    std::uint64_t seed = 20100101;
    double alpha = 0.05;
    double tau = 0.5;
    double session_days = 1.0 / 6.5;
    bool keep_null_stats = false;

    LmConfig lm_for(double q, long /*n*/) const {
        LmConfig c;
        c.c = q >= 0.003 ? 1.0 / 9.0 : 1.0 / 19.0;
        c.k = 2;
        c.m_mult = q >= 0.003 ? 2.0 : 1.0;  // large-noise runs use doubled windows
        return c;
    }
    SpectralConfig spec_for(double q, long /*n*/) const {
        SpectralConfig s;
        s.kappa = q >= 0.003 ? 2.0 / 3.0 : 5.0 / 12.0;
        return s;
    }
};

inline PriceJumpCellResult run_price_jump_cell(const PriceJumpCell& cell,
                                               const PriceJumpStudyConfig& cfg,
                                               std::uint64_t cell_id) {
    PriceJumpCellResult out;
    out.cell = cell;
    out.reps = cfg.reps;

    const LmConfig lmc = cfg.lm_for(cell.q, cell.n);
    const SpectralConfig spc = cfg.spec_for(cell.q, cell.n);
    const double dx = cell.jump_mult * cell.q;

    struct Rep {
        bool ok = false;
        bool rej_lm = false, rej_sp = false;
        double err_lm = 0.0, err_sp = 0.0;
        double stat_lm = 0.0, stat_sp = 0.0;
    };
    std::vector<Rep> reps(cfg.reps);

    run_parallel(cfg.reps, [&](long r) {
        SimConfig sc;
        sc.n = cell.n;
        sc.q = cell.q;
        sc.session_days = cfg.session_days;
        sc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), cell_id);
        if (dx != 0.0) sc.price_jump = PriceJump{cfg.tau, dx};
        const TickSeries ts = simulate_observed(sc).observed();
        Rep& rp = reps[r];
        try {
            const PilotEstimates pil = make_pilots(ts, cfg.tau, spc);
            const TestResult lm = lm_test(ts, cfg.tau, lmc, pil.sig2_left, pil.sig2_right, pil.eta2);
            const TestResult sp = spectral_jump_test(ts, cfg.tau, spc, pil);
            rp.ok = true;
            rp.rej_lm = lm.reject(cfg.alpha);
            rp.rej_sp = sp.reject(cfg.alpha);
            rp.err_lm = lm.estimate - dx;
            rp.err_sp = sp.estimate - dx;
            rp.stat_lm = lm.stat;
            rp.stat_sp = sp.stat;
        } catch (const estimation_error&) {
            rp.ok = false;
        }
    });

    long ok = 0, rej_lm = 0, rej_sp = 0;
    double se_lm = 0.0, se_sp = 0.0;
    for (const Rep& rp : reps) {
        if (!rp.ok) continue;
        ++ok;
        rej_lm += rp.rej_lm;
        rej_sp += rp.rej_sp;
        se_lm += rp.err_lm * rp.err_lm;
        se_sp += rp.err_sp * rp.err_sp;
        if (cfg.keep_null_stats && cell.jump_mult == 0.0) {
            out.null_stats_preavg.push_back(rp.stat_lm);
            out.null_stats_spectral.push_back(rp.stat_sp);
        }
    }
    out.failures = cfg.reps - ok;
    if (ok == 0) throw estimation_error("price-jump cell: every replication failed");
    out.reject_preavg = static_cast<double>(rej_lm) / ok;
    out.reject_spectral = static_cast<double>(rej_sp) / ok;
    out.rmse_preavg = std::sqrt(se_lm / ok) * 1e4;
    out.rmse_spectral = std::sqrt(se_sp / ok) * 1e4;
    return out;
}

inline std::vector<PriceJumpCellResult> run_price_jump_study(const PriceJumpStudyConfig& cfg) {
    std::vector<PriceJumpCell> cells;
    for (double q : {0.0005, 0.005})
        for (long n : {1200L, 1800L, 3600L})
            for (double m : {0.0, 1.0, 2.0, 3.0}) cells.push_back({q, n, m});
    std::vector<PriceJumpCellResult> out;
    out.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        out.push_back(run_price_jump_cell(cells[i], cfg, 1000 + i));
    return out;
}

// ---------------------------------------------------------------------------
// Cojump (DLE) study on one-day sessions
// ---------------------------------------------------------------------------

struct DleStudyConfig {
    long reps = 500;
    std::uint64_t seed = 20150101;
    long n = 23400;
    double q = 0.0005;
    double alpha = 0.05;
    double price_jump = -0.002;
    double vol_jump_rel = 1.373;   // +137.3% of the pre-jump squared volatility
    bool inject_price = true;
    bool inject_vol = true;
    double tau_lo = 0.35, tau_hi = 0.65;
    int grid_bins = 100;   // h^-1 for detection and jump estimation
    int J = 30;
    int R = 6;
    int spot_bins = 8;

    PipelineConfig pipeline(long nobs) const {
        PipelineConfig p;
        p.grid.K_override = grid_bins;
        p.grid.spec.J_override = J;
        p.grid.tlog = ThresholdLog::LogLog;
        p.est.h_override = 1.0 / grid_bins;
        p.est.J_override = J;
        p.spot.spec.kappa = 1.0;
        p.spot.r_inv_override = spot_bins;
        p.R_refine = R;
        (void)nobs;
        return p;
    }
};

struct DleStudyResult {
    long reps = 0;
    long detected_any = 0;
    long detected_exact = 0;   // exactly one event in the true jump's bin
    double truth_fixed = 0.0;  // price_jump * vol_jump_rel * theta * unit_scale
    double bias_fixed = 0.0;       // mean(dle*1e7) - truth_fixed*1e7
    double variance_fixed = 0.0;   // variance of dle*1e7
    double bias_error = 0.0;       // mean((dle - per-rep truth)*1e7)
    double variance_error = 0.0;   // variance of (dle - per-rep truth)*1e7
    double power = 0.0;
    double ks_pvalue = 0.0;
    std::vector<double> z_scores;  // (dle - truth_r)/sd, for QQ emission
    std::vector<double> estimates; // dle per replication
};

inline DleStudyResult run_mc_dle(const DleStudyConfig& cfg) {
    DleStudyResult out;
    out.reps = cfg.reps;

    struct Rep {
        bool ok = false;
        bool rejected = false;
        bool any = false, exact = false;
        double dle = 0.0, truth = 0.0, z = 0.0;
    };
    std::vector<Rep> reps(cfg.reps);
    const PipelineConfig pcfg = cfg.pipeline(cfg.n);

    run_parallel(cfg.reps, [&](long r) {
        SimConfig sc;
        sc.n = cfg.n;
        sc.q = cfg.q;
        sc.session_days = 1.0;
        sc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 7);
        std::mt19937_64 trng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 8));
        std::uniform_real_distribution<double> unif(cfg.tau_lo, cfg.tau_hi);
        const double tau = unif(trng);
        if (cfg.inject_price) sc.price_jump = PriceJump{tau, cfg.price_jump};
        if (cfg.inject_vol) sc.vol_jump = VolJump{tau, cfg.vol_jump_rel};

        const SimPath path = simulate_observed(sc);
        Rep& rp = reps[r];
        rp.truth = path.injected_dx * path.injected_dsig2;
        try {
            const DayAnalysis day = detect_day(path.observed(), pcfg);
            rp.ok = true;
            rp.dle = day.dle.dle;
            rp.any = day.dle.n_jumps > 0;
            const int true_bin =
                static_cast<int>(std::floor(tau * pcfg.grid.K_override)) + 1;
            rp.exact = day.dle.n_jumps == 1 && !day.events.empty() &&
                       std::abs(day.events.front().k - true_bin) <= 1;
            rp.rejected = day.dle_t.reject(cfg.alpha);
            if (day.dle.n_jumps > 0 && day.dle.var_exact > 0)
                rp.z = (day.dle.dle - rp.truth) / std::sqrt(day.dle.var_exact);
            else
                rp.z = 0.0;
        } catch (const estimation_error&) {
            rp.ok = false;
        }
    });

    std::vector<double> est, err, z;
    long rejected = 0;
    for (const Rep& rp : reps) {
        if (!rp.ok) continue;
        est.push_back(rp.dle);
        err.push_back((rp.dle - rp.truth) * 1e7);
        z.push_back(rp.z);
        out.detected_any += rp.any;
        out.detected_exact += rp.exact;
        rejected += rp.rejected;
    }
    if (est.size() < 2) throw estimation_error("DLE study: too few successful replications");

    SimConfig ref;
    out.truth_fixed = cfg.inject_price && cfg.inject_vol
                          ? cfg.price_jump * cfg.vol_jump_rel * ref.theta * ref.variance_unit_scale
                          : 0.0;
    std::vector<double> scaled;
    scaled.reserve(est.size());
    for (double e : est) scaled.push_back(e * 1e7);
    out.bias_fixed = mean(scaled) - out.truth_fixed * 1e7;
    out.variance_fixed = variance(scaled);
    out.bias_error = mean(err);
    out.variance_error = variance(err);
    out.power = static_cast<double>(rejected) / static_cast<double>(est.size());
    out.ks_pvalue = ks_test_normal(z);
    out.z_scores = std::move(z);
    out.estimates = std::move(est);
    return out;
}

// Size of the volatility-jump test on jump-free days (null calibration).
struct VolNullResult {
    double size = 0.0;
    long reps = 0;
    long failures = 0;
};

inline VolNullResult run_vol_jump_null(long reps, std::uint64_t seed, long n = 23400,
                                       double q = 0.0005, double alpha = 0.05, int spot_bins = 8) {
    std::vector<int> rej(reps, -1);
    run_parallel(reps, [&](long r) {
        SimConfig sc;
        sc.n = n;
        sc.q = q;
        sc.seed = derive_seed(seed, static_cast<std::uint64_t>(r), 11);
        const TickSeries ts = simulate_observed(sc).observed();
        SpotVolConfig cfg;
        cfg.spec.kappa = 1.0;
        cfg.r_inv_override = spot_bins;
        try {
            rej[r] = vol_jump_test(ts, 0.5, cfg).reject(alpha) ? 1 : 0;
        } catch (const estimation_error&) {
            rej[r] = -1;
        }
    });
    VolNullResult out;
    out.reps = reps;
    long ok = 0, hits = 0;
    for (int v : rej) {
        if (v < 0) continue;
        ++ok;
        hits += v;
    }
    out.failures = reps - ok;
    if (ok == 0) throw estimation_error("vol-jump null study: every replication failed");
    out.size = static_cast<double>(hits) / ok;
    return out;
}

}  // namespace jumplev
