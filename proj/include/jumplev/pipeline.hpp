#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "jumplev/common.hpp"
#include "jumplev/dle.hpp"
#include "jumplev/jumploc.hpp"
#include "jumplev/preavg.hpp"
#include "jumplev/spectral.hpp"
#include "jumplev/spotvol.hpp"
#include "jumplev/tick_series.hpp"

namespace jumplev {

// One-day analysis settings: detection grid, refinement, jump-size estimation
// window and spot-volatility windows. Defaults follow the empirical tuning
// rules (K = 3 sqrt(n)/log n bins, J = 5 log n frequencies, R = 6
// sub-intervals, spot averaging over ceil(3 n^(1/4)/log n) kappa-rule bins).
struct PipelineConfig {
    BinGridConfig grid;
    SpectralConfig est;     // jump-size estimation window (h_override to pin)
    SpotVolConfig spot;     // spot volatility flanks
    int R_refine = 6;
    double tail_cutoff = 0.0;
    bool significant_vol_only = false;
    double bh_alpha = 0.1;

    PipelineConfig() {
        grid.tlog = ThresholdLog::LogLog;  // robust variant; see detect notes
        spot.spec.kappa = 1.0;
        spot.r_inv_override = 0;  // 0: ceil(3 n^(1/4)/log n)
    }

    int spot_bins(long n) const {
        if (spot.r_inv_override > 0) return spot.r_inv_override;
        const double v = 3.0 * std::pow(static_cast<double>(n), 0.25) /
                         std::log(static_cast<double>(n));
        return static_cast<int>(std::ceil(v));
    }
};

struct DayAnalysis {
    BinGrid grid;
    std::vector<JumpEvent> events;
    DleResult dle;
    TestResult dle_t;
};

// Full detection pipeline: bin grid and thresholds -> flagged bins -> argmax
// refinement -> cut-out spectral jump estimate -> flanking spot volatilities
// and volatility-jump test -> DLE aggregation.
inline DayAnalysis detect_day(const TickSeries& ts, const PipelineConfig& cfg) {
    ts.validate();
    const long n = ts.n();
    DayAnalysis out;
    out.grid = make_bin_grid(ts, cfg.grid);

    SpotVolConfig spot = cfg.spot;
    spot.r_inv_override = cfg.spot_bins(n);

    const std::vector<int> flagged = detect_jump_bins(ts, out.grid, cfg.grid);
    for (int k : flagged) {
        JumpEvent e;
        e.k = k;
        e.u_k = out.grid.u[k];
        e.qv_inc = qv_increment(ts, k, out.grid, cfg.grid);

        const JumpWindow w = refine_jump_time(ts, k, out.grid, cfg.R_refine);
        e.tau_hat = w.tau_hat;
        e.win_lo = w.lo;
        e.win_hi = w.hi;
        e.refine_R = w.R_eff;

        SpotVolEstimate sv;
        try {
            sv = estimate_spot_vol(ts, e.tau_hat, spot);
        } catch (const estimation_error&) {
            continue;  // too close to the day edges for flanking windows
        }
        e.sig2_left = sv.sig2_left;
        e.sig2_right = sv.sig2_right;
        e.kept_left = sv.kept_left;
        e.kept_right = sv.kept_right;
        e.eta2_local = sv.eta2;

        PilotEstimates pil;
        pil.eta2 = sv.eta2;
        pil.sig2_left = std::max(sv.sig2_left, cfg.est.sig2_floor);
        pil.sig2_right = std::max(sv.sig2_right, cfg.est.sig2_floor);
        JumpEstimate je;
        try {
            je = estimate_jump_at_window(ts, w, cfg.est, pil);
        } catch (const estimation_error&) {
            continue;
        }
        e.dx_hat = je.value;
        e.price_pvalue = je.pvalue;

        const double eta = std::sqrt(std::max(sv.eta2, cfg.est.sig2_floor));
        const double sl = std::sqrt(std::max(sv.sig2_left, cfg.est.sig2_floor));
        const double sr = std::sqrt(std::max(sv.sig2_right, cfg.est.sig2_floor));
        e.vol_diff_var =
            8.0 * eta * (sl * sl * sl / sv.rate_scale_left + sr * sr * sr / sv.rate_scale_right);
        e.vol_jump_pvalue =
            two_sided_pvalue((e.sig2_right - e.sig2_left) / std::sqrt(e.vol_diff_var));

        out.events.push_back(e);
    }

    out.dle = estimate_dle(out.events, cfg.tail_cutoff, cfg.significant_vol_only, cfg.bh_alpha, n);
    out.dle_t = dle_test(out.dle);
    return out;
}

}  // namespace jumplev
