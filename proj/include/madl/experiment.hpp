#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "madl/backtest.hpp"
#include "madl/forecaster.hpp"
#include "madl/market_data.hpp"
#include "madl/stats.hpp"

namespace madlab {

struct AssetInput {
    std::string name = "ASSET";
    std::filesystem::path csv_path;
    CsvSchema schema;
    int periods_per_year = 252;
};

struct ExperimentConfig {
    AssetInput asset;
    std::size_t train_len = 500;
    std::size_t test_len = 100;
    int sequence_length = 10;
    LossChoice tuning_loss = LossChoice::kMadl;
    LossChoice training_loss = LossChoice::kMadl;
    // Pass-through candidate used when `grid` is empty. `network_mae`, when
    // set, is the candidate picked up by MAE-tuned rows of the loss matrix.
    NetworkConfig network;
    std::optional<NetworkConfig> network_mae;
    std::vector<NetworkConfig> grid;
    double cost_bps = 0.0;
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";
    bool regress_benchmark_on_strategy = true;

    void validate() const;
    std::string strategy_name() const;  // "<tuning>/<training>", e.g. "MADL/MAE"
};

// Named defaults: "paper-btc", "paper-uso" (full-scale presets) and "desk"
// (minutes-scale preset for local runs and tests).
ExperimentConfig preset_config(const std::string& name);
NetworkConfig preset_network(const std::string& name, LossChoice tuned_for);

struct WindowSummary {
    std::size_t index = 0;
    WalkForwardWindow window;
    std::size_t train_sequences = 0;
    double final_train_loss = 0.0;  // exact loss on the window's training set
};

struct StrategyResult {
    std::string name;
    ForecastSeries forecasts;  // empty for the B&H benchmark
    EquityCurve curve;
    MetricsReport metrics;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::size_t n_returns = 0;
    WalkForwardPlan plan;
    NetworkConfig selected_network;
    std::vector<double> tuning_scores;  // empty when tuning passed through
    std::vector<WindowSummary> windows;
    StrategyResult strategy;
    StrategyResult benchmark;  // B&H, constant +1 over the OOS range
    std::vector<std::pair<std::string, RegressionResult>> regressions;
    std::uint64_t config_hash = 0;
};

// Full pipeline: load prices, build returns, plan walk-forward, tune on the
// first in-sample window (last test_len points held out for validation),
// train one fresh model per window, forecast its test range, then backtest
// the concatenated out-of-sample forecasts against B&H.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Same pipeline starting from an already-built return series.
ExperimentResult run_experiment_on_returns(const ExperimentConfig& config,
                                           const ReturnSeries& returns);

struct LossMatrixResult {
    // Fixed order: MADL/MADL, MADL/MAE, MAE/MAE, MAE/MADL.
    std::vector<ExperimentResult> results;
};

// Runs the four tuning/training combinations over shared data and plan.
// Tuning runs once per tuning loss; the selected hyperparameters are reused
// for both training losses of that row.
LossMatrixResult run_loss_matrix(const ExperimentConfig& config);
LossMatrixResult run_loss_matrix_on_returns(const ExperimentConfig& config,
                                            const ReturnSeries& returns);

// CSV grid of single-pair loss values over (realized, forecast) coordinates.
void emit_loss_surface(std::ostream& out, double realized_lo, double realized_hi,
                       double forecast_lo, double forecast_hi, int realized_steps,
                       int forecast_steps, LossChoice loss);

struct ReportPaths {
    std::filesystem::path metrics_csv;
    std::filesystem::path equity_csv;
    std::filesystem::path regressions_csv;
    std::filesystem::path manifest_json;
    std::filesystem::path result_json;
};

// metrics.csv, equity.csv, regressions.csv, run_manifest.json, result.json.
ReportPaths write_reports(const ExperimentResult& result, const std::filesystem::path& out_dir);
ReportPaths write_reports(const LossMatrixResult& result, const std::filesystem::path& out_dir);

// Low-level writer (no result.json); benchmark may be null and strategies may
// be empty, in which case the CSVs contain headers only.
ReportPaths write_report_files(
    const std::filesystem::path& out_dir, const StrategyResult* benchmark,
    const std::vector<const StrategyResult*>& strategies,
    const std::vector<std::pair<std::string, RegressionResult>>& regressions,
    const ExperimentConfig& config);

}  // namespace madlab
