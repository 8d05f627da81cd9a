#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "madl/losses.hpp"
#include "madl/market_data.hpp"

namespace madlab {

// Long/Short position per period, values in {-1, 0, +1}.
struct PositionSeries {
    std::vector<int> positions;

    std::size_t size() const { return positions.size(); }
};

// Compounded strategy value per period. The curve starts from an implicit
// base of 1.0, so equity[0] = 1 + strategy_return[0].
struct EquityCurve {
    std::vector<Date> dates;
    std::vector<double> equity;
    std::vector<double> strategy_returns;
    PositionSeries positions;
    int periods_per_year = 252;

    std::size_t size() const { return equity.size(); }
    double final_equity() const { return equity.empty() ? 1.0 : equity.back(); }
};

struct MetricsReport {
    double arc_pct = 0.0;
    double asd_pct = 0.0;
    double md_pct = 0.0;
    double mld_years = 0.0;
    std::optional<double> ir1;
    std::optional<double> ir2;
    std::optional<double> ir3;
    std::size_t n_obs = 0;
    std::size_t n_trades = 0;
};

// position_t = sign(forecast_t); an exactly-zero forecast carries the
// previous position (flat before the first nonzero forecast).
PositionSeries signals_from_forecasts(const ForecastSeries& forecasts);

// strategy_return_t = position_t * R_t - (cost_bps / 1e4) * 1{position changed
// at t}, with an implicit flat position before the start. Equity compounds
// from 1.0.
EquityCurve equity_curve(const PositionSeries& positions, const ReturnSegment& realized,
                         double cost_bps = 0.0);

// Transitions including the implicit flat book before the start and after the
// end, so an always-long series counts entry + exit = 2.
std::size_t count_trades(const PositionSeries& positions);

// Annualized return compounded, percent.
double arc(const EquityCurve& curve);

// Annualized (population) standard deviation of strategy returns, percent.
double asd(const EquityCurve& curve);

// Worst peak-to-trough decline as a percent of the peak. The implicit 1.0
// starting equity counts as the first peak.
double max_drawdown(const EquityCurve& curve);

// Longest span, in years, from an equity peak to the first later period that
// strictly exceeds it, counted only when equity actually dipped below the
// peak in between. An unrecovered final stretch counts through the last
// period.
double max_loss_duration(const EquityCurve& curve);

struct InformationRatios {
    std::optional<double> ir1;  // ARC / ASD
    std::optional<double> ir2;  // IR1 * |ARC| / MD
    std::optional<double> ir3;  // IR2 * |ARC| / MLD
};

// Inputs in percent (ARC/ASD/MD) and years (MLD); ratios computed on the
// fraction scale. A zero denominator leaves that ratio (and the ones built
// on it) absent.
InformationRatios information_ratios(double arc_pct, double asd_pct, double md_pct,
                                     double mld_years);

MetricsReport metrics_report(const EquityCurve& curve);

}  // namespace madlab
