#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "madl/date.hpp"

namespace madlab {

// Daily close series for one asset. Dates strictly increasing, prices > 0.
struct PriceSeries {
    std::vector<Date> dates;
    std::vector<double> prices;
    std::string asset_id;

    std::size_t size() const { return prices.size(); }
};

// Simple period returns r_t = p_t / p_{t-1} - 1, dated at the later day.
struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> returns;
    int periods_per_year = 252;

    std::size_t size() const { return returns.size(); }
};

// Contiguous view over a return series; the unit traded by the backtester.
struct ReturnSegment {
    std::span<const Date> dates;
    std::span<const double> returns;
    int periods_per_year = 252;

    std::size_t size() const { return returns.size(); }
};

ReturnSegment segment(const ReturnSeries& r, std::size_t begin, std::size_t end);

// z-score transform fitted on a training range and applied unchanged to the
// matching test range. Population (divide-by-N) standard deviation.
struct Standardizer {
    double mean = 0.0;
    double std = 0.0;

    bool degenerate() const { return !(std > 0.0); }
    double apply(double x) const { return (x - mean) / std; }
    double invert(double z) const { return z * std + mean; }
};

// Training batch: each row holds sequence_length standardized returns and the
// target is the raw (unstandardized) return immediately after the window.
struct SequenceSet {
    Eigen::MatrixXd inputs;  // num_sequences x sequence_length
    std::vector<double> targets;
    std::vector<Date> target_dates;

    std::size_t size() const { return targets.size(); }
    std::size_t sequence_length() const { return static_cast<std::size_t>(inputs.cols()); }
};

// Half-open index ranges into a ReturnSeries. test_start == train_end.
struct WalkForwardWindow {
    std::size_t train_start = 0;
    std::size_t train_end = 0;
    std::size_t test_start = 0;
    std::size_t test_end = 0;
};

struct WalkForwardPlan {
    std::vector<WalkForwardWindow> windows;
};

struct CsvSchema {
    std::string date_column = "date";
    std::string close_column = "close";
};

// Reads a header CSV with the configured date/close columns. Rows are sorted
// by date; duplicate dates and non-positive prices are rejected with the
// offending line number.
PriceSeries load_price_csv(const std::filesystem::path& path, const CsvSchema& schema = {},
                           std::string asset_id = "");

ReturnSeries to_simple_returns(const PriceSeries& p, int periods_per_year);

// Mean and population std over r.returns[begin, end).
Standardizer fit_standardizer(const ReturnSeries& r, std::size_t begin, std::size_t end);

SequenceSet make_sequences(const ReturnSeries& r, std::size_t sequence_length,
                           const Standardizer& s);

// Sequences whose targets are exactly r.returns[target_begin, target_end);
// each input window is the sequence_length returns immediately preceding its
// target, so windows may reach back before target_begin.
SequenceSet make_sequences_for_targets(const ReturnSeries& r, std::size_t sequence_length,
                                       const Standardizer& s, std::size_t target_begin,
                                       std::size_t target_end);

// Rolling windows stepping by test_len; the final window is truncated so its
// test range ends at n. Out-of-sample coverage of [train_len, n) is gapless.
WalkForwardPlan plan_walk_forward(std::size_t n, std::size_t train_len, std::size_t test_len);

}  // namespace madlab
