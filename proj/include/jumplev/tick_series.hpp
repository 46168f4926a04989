#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jumplev/common.hpp"

namespace jumplev {

// Observation record: strictly increasing times on [0,1] with noisy log prices.
// n() counts returns, i.e. size-1. The single input type of all estimators.
struct TickSeries {
    std::vector<double> times;
    std::vector<double> y;

    // Set when ingestion rescaled raw clock times to [0,1].
    double time_origin = 0.0;
    double time_span = 1.0;

    std::size_t size() const { return y.size(); }
    long n() const { return static_cast<long>(y.size()) - 1; }

    double ret(long i) const { return y[i] - y[i - 1]; }          // i = 1..n
    double mid(long i) const { return 0.5 * (times[i - 1] + times[i]); }  // return midpoint

    void validate() const {
        if (times.size() != y.size()) throw estimation_error("TickSeries: times/y length mismatch");
        if (n() < 2) throw estimation_error("TickSeries: need at least 3 observations");
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(y[i]))
                throw estimation_error("TickSeries: non-finite value at row " + std::to_string(i));
            if (i > 0 && times[i] <= times[i - 1])
                throw estimation_error("TickSeries: times not strictly increasing at row " +
                                       std::to_string(i));
        }
        if (times.front() < 0.0 || times.back() > 1.0 + 1e-12)
            throw estimation_error("TickSeries: times outside [0,1]");
    }

    // First observation index strictly after tau; equals floor(tau*n)+1 on the
    // equidistant grid t_i = i/n.
    long index_after(double tau) const {
        long lo = 0, hi = static_cast<long>(times.size());
        while (lo < hi) {
            long mid_i = lo + (hi - lo) / 2;
            if (times[mid_i] <= tau) lo = mid_i + 1; else hi = mid_i;
        }
        return lo;
    }

    // Local average spacing times n over [tau-h/2, tau+h/2]; plug-in for the
    // sampling-density factor (1 on an equidistant grid).
    double spacing_factor(double tau, double h) const {
        long lo = index_after(tau - 0.5 * h);
        long hi = index_after(tau + 0.5 * h) - 1;
        if (lo < 1) lo = 1;
        if (hi > n()) hi = n();
        if (hi < lo) return 1.0;
        double span = times[hi] - times[lo - 1];
        double cnt = static_cast<double>(hi - lo + 1);
        return (span / cnt) * static_cast<double>(n());
    }
};

inline TickSeries make_equidistant(std::vector<double> y) {
    TickSeries ts;
    const std::size_t m = y.size();
    ts.y = std::move(y);
    ts.times.resize(m);
    const double n = static_cast<double>(m) - 1.0;
    for (std::size_t i = 0; i < m; ++i) ts.times[i] = static_cast<double>(i) / n;
    return ts;
}

}  // namespace jumplev
