#include "madl/backtest.hpp"

#include <cmath>
#include <stdexcept>

namespace madlab {

PositionSeries signals_from_forecasts(const ForecastSeries& forecasts) {
    if (forecasts.values.empty()) {
        throw std::invalid_argument("cannot derive positions from empty forecasts");
    }
    PositionSeries out;
    out.positions.resize(forecasts.size());
    int prev = 0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double f = forecasts.values[i];
        const int pos = f > 0.0 ? 1 : (f < 0.0 ? -1 : prev);
        out.positions[i] = pos;
        prev = pos;
    }
    return out;
}

EquityCurve equity_curve(const PositionSeries& positions, const ReturnSegment& realized,
                         double cost_bps) {
    if (positions.size() != realized.size()) {
        throw std::invalid_argument("positions/returns misalignment: " +
                                    std::to_string(positions.size()) + " vs " +
                                    std::to_string(realized.size()));
    }
    if (cost_bps < 0.0) {
        throw std::invalid_argument("cost_bps must be nonnegative");
    }
    EquityCurve curve;
    curve.dates.assign(realized.dates.begin(), realized.dates.end());
    curve.positions = positions;
    curve.periods_per_year = realized.periods_per_year;
    curve.equity.resize(realized.size());
    curve.strategy_returns.resize(realized.size());
    const double cost = cost_bps / 1e4;
    double equity = 1.0;
    int prev = 0;
    for (std::size_t t = 0; t < realized.size(); ++t) {
        const int pos = positions.positions[t];
        double r = static_cast<double>(pos) * realized.returns[t];
        if (pos != prev) r -= cost;
        curve.strategy_returns[t] = r;
        equity *= 1.0 + r;
        curve.equity[t] = equity;
        prev = pos;
    }
    return curve;
}

std::size_t count_trades(const PositionSeries& positions) {
    std::size_t trades = 0;
    int prev = 0;
    for (int pos : positions.positions) {
        if (pos != prev) ++trades;
        prev = pos;
    }
    if (prev != 0) ++trades;  // implicit exit to flat after the end
    return trades;
}

double arc(const EquityCurve& curve) {
    if (curve.equity.empty()) {
        throw std::invalid_argument("cannot compute ARC of an empty curve");
    }
    const double n = static_cast<double>(curve.size());
    const double p = static_cast<double>(curve.periods_per_year);
    return (std::pow(curve.final_equity(), p / n) - 1.0) * 100.0;
}

double asd(const EquityCurve& curve) {
    if (curve.size() < 2) {
        throw std::invalid_argument("need at least 2 periods for ASD, got " +
                                    std::to_string(curve.size()));
    }
    const double n = static_cast<double>(curve.size());
    double mean = 0.0;
    for (double r : curve.strategy_returns) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : curve.strategy_returns) {
        const double d = r - mean;
        var += d * d;
    }
    var /= n;
    return std::sqrt(var) * std::sqrt(static_cast<double>(curve.periods_per_year)) * 100.0;
}

double max_drawdown(const EquityCurve& curve) {
    double peak = 1.0;  // implicit starting equity
    double worst = 0.0;
    for (double e : curve.equity) {
        if (e > peak) peak = e;
        const double dd = (peak - e) / peak;
        if (dd > worst) worst = dd;
    }
    return worst * 100.0;
}

double max_loss_duration(const EquityCurve& curve) {
    if (curve.equity.empty()) return 0.0;
    // Peaks are tracked on the extended curve (base 1.0 at index -1). A spell
    // counts only if equity went strictly below the peak before recovering.
    std::ptrdiff_t peak_index = -1;
    double peak_value = 1.0;
    bool dipped = false;
    std::ptrdiff_t longest = 0;
    for (std::size_t t = 0; t < curve.equity.size(); ++t) {
        const double e = curve.equity[t];
        if (e > peak_value) {
            if (dipped) {
                longest = std::max(longest, static_cast<std::ptrdiff_t>(t) - peak_index);
            }
            peak_index = static_cast<std::ptrdiff_t>(t);
            peak_value = e;
            dipped = false;
        } else if (e < peak_value) {
            dipped = true;
        }
    }
    if (dipped) {
        // unrecovered terminal stretch counts through the last period
        longest = std::max(longest,
                           static_cast<std::ptrdiff_t>(curve.equity.size()) - 1 - peak_index);
    }
    return static_cast<double>(longest) / static_cast<double>(curve.periods_per_year);
}

InformationRatios information_ratios(double arc_pct, double asd_pct, double md_pct,
                                     double mld_years) {
    InformationRatios out;
    const double a = arc_pct / 100.0;
    const double s = asd_pct / 100.0;
    const double d = md_pct / 100.0;
    if (s > 0.0) out.ir1 = a / s;
    if (out.ir1 && d > 0.0) out.ir2 = *out.ir1 * std::fabs(a) / d;
    if (out.ir2 && mld_years > 0.0) out.ir3 = *out.ir2 * std::fabs(a) / mld_years;
    return out;
}

MetricsReport metrics_report(const EquityCurve& curve) {
    if (curve.equity.empty()) {
        throw std::invalid_argument("cannot report metrics on an empty curve");
    }
    MetricsReport report;
    report.arc_pct = arc(curve);
    report.asd_pct = curve.size() >= 2 ? asd(curve) : 0.0;
    report.md_pct = max_drawdown(curve);
    report.mld_years = max_loss_duration(curve);
    const auto ratios =
        information_ratios(report.arc_pct, report.asd_pct, report.md_pct, report.mld_years);
    report.ir1 = ratios.ir1;
    report.ir2 = ratios.ir2;
    report.ir3 = ratios.ir3;
    report.n_obs = curve.size();
    report.n_trades = count_trades(curve.positions);
    return report;
}

}  // namespace madlab
