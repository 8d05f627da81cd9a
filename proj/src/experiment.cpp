#include "madl/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>

#include "madl/rng.hpp"
#include "madl/serialization.hpp"

namespace madlab {

namespace {

constexpr std::uint64_t kTuneStream = 0x74756e65;    // "tune"
constexpr std::uint64_t kWindowStream = 0x77696e64;  // "wind"

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_opt(const std::optional<double>& v) {
    return v ? csv_num(*v) : std::string();
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Candidate set searched when tuning under `loss`. Candidate seeds are
// re-derived from the experiment seed so tuning is reproducible from the
// config alone.
std::vector<NetworkConfig> tuning_candidates(const ExperimentConfig& config, LossChoice loss) {
    std::vector<NetworkConfig> candidates;
    if (!config.grid.empty()) {
        candidates = config.grid;
    } else if (loss == LossChoice::kMae && config.network_mae) {
        candidates = {*config.network_mae};
    } else {
        candidates = {config.network};
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        candidates[i].loss_choice = loss;
        candidates[i].seed = derive_seed(config.seed, kTuneStream,
                                         static_cast<std::uint64_t>(loss == LossChoice::kMae), i);
    }
    return candidates;
}

struct TuningOutcome {
    NetworkConfig selected;
    std::vector<double> scores;  // empty when passed through
};

// Stage 3: hyperparameter selection on the first in-sample window. The last
// test_len points of the training range are held out as validation. A
// single-candidate set passes through without training.
TuningOutcome tune(const ExperimentConfig& config, const ReturnSeries& returns, LossChoice loss) {
    auto candidates = tuning_candidates(config, loss);
    if (candidates.size() == 1) {
        return TuningOutcome{candidates.front(), {}};
    }
    const auto seq = static_cast<std::size_t>(config.sequence_length);
    const std::size_t sub_train_end = config.train_len - config.test_len;
    const auto standardizer = fit_standardizer(returns, 0, sub_train_end);
    const auto train_set =
        make_sequences_for_targets(returns, seq, standardizer, seq, sub_train_end);
    const auto valid_set =
        make_sequences_for_targets(returns, seq, standardizer, sub_train_end, config.train_len);
    auto gs = grid_search(candidates, train_set, valid_set, loss);
    return TuningOutcome{gs.best_config, gs.scores};
}

StrategyResult make_benchmark(const ReturnSegment& oos, double cost_bps) {
    StrategyResult bh;
    bh.name = "B&H";
    PositionSeries longs;
    longs.positions.assign(oos.size(), 1);
    bh.curve = equity_curve(longs, oos, cost_bps);
    bh.metrics = metrics_report(bh.curve);
    return bh;
}

// Stages 4-6 for one tuning/training combination with already-selected
// hyperparameters.
ExperimentResult run_with_selected(const ExperimentConfig& config, const ReturnSeries& returns,
                                   const TuningOutcome& tuning) {
    const std::size_t n = returns.size();
    const auto seq = static_cast<std::size_t>(config.sequence_length);

    ExperimentResult result;
    result.config = config;
    result.n_returns = n;
    result.plan = plan_walk_forward(n, config.train_len, config.test_len);
    result.selected_network = tuning.selected;
    result.selected_network.loss_choice = config.training_loss;
    result.tuning_scores = tuning.scores;
    result.config_hash = config_hash(config);

    ForecastSeries oos_forecasts;
    for (std::size_t w = 0; w < result.plan.windows.size(); ++w) {
        const auto& window = result.plan.windows[w];
        try {
            const auto standardizer =
                fit_standardizer(returns, window.train_start, window.train_end);
            const auto train_set = make_sequences_for_targets(
                returns, seq, standardizer, window.train_start + seq, window.train_end);

            NetworkConfig window_config = result.selected_network;
            window_config.seed =
                derive_seed(config.seed, kWindowStream, w,
                            static_cast<std::uint64_t>(config.training_loss == LossChoice::kMae));
            const auto trained = train(window_config, train_set);

            const auto test_set = make_sequences_for_targets(returns, seq, standardizer,
                                                             window.test_start, window.test_end);
            const auto fwd = forward(trained.params, test_set, RunMode::kInfer);
            for (std::size_t i = 0; i < test_set.size(); ++i) {
                oos_forecasts.values.push_back(fwd.forecasts(static_cast<Eigen::Index>(i)));
                oos_forecasts.dates.push_back(test_set.target_dates[i]);
            }

            WindowSummary summary;
            summary.index = w;
            summary.window = window;
            summary.train_sequences = train_set.size();
            summary.final_train_loss = trained.trace.back().train_loss;
            result.windows.push_back(summary);
        } catch (const std::exception& e) {
            throw std::runtime_error("window " + std::to_string(w) + " [" +
                                     std::to_string(window.train_start) + "," +
                                     std::to_string(window.test_end) + "): " + e.what());
        }
    }

    const auto oos = segment(returns, config.train_len, n);
    result.strategy.name = config.strategy_name();
    result.strategy.forecasts = std::move(oos_forecasts);
    const auto positions = signals_from_forecasts(result.strategy.forecasts);
    result.strategy.curve = equity_curve(positions, oos, config.cost_bps);
    result.strategy.metrics = metrics_report(result.strategy.curve);
    result.benchmark = make_benchmark(oos, config.cost_bps);

    const std::vector<NamedSeries> strategies = {
        {result.strategy.name, result.strategy.curve.strategy_returns}};
    result.regressions =
        strategy_regressions(std::span<const double>(result.benchmark.curve.strategy_returns),
                             strategies, config.regress_benchmark_on_strategy);
    return result;
}

void write_metrics_csv(std::ofstream& out, const StrategyResult* benchmark,
                       const std::vector<const StrategyResult*>& strategies) {
    out << "model,aRC,aSD,MD,MLD,IR*,IR**,IR***,nObs,nTrades\n";
    const auto row = [&out](const StrategyResult& s) {
        const auto& m = s.metrics;
        out << s.name << ',' << csv_num(m.arc_pct) << ',' << csv_num(m.asd_pct) << ','
            << csv_num(m.md_pct) << ',' << csv_num(m.mld_years) << ',' << csv_opt(m.ir1) << ','
            << csv_opt(m.ir2) << ',' << csv_opt(m.ir3) << ',' << m.n_obs << ',' << m.n_trades
            << '\n';
    };
    if (benchmark != nullptr) row(*benchmark);
    for (const auto* s : strategies) row(*s);
}

void write_equity_csv(std::ofstream& out, const StrategyResult* benchmark,
                      const std::vector<const StrategyResult*>& strategies) {
    std::vector<const StrategyResult*> columns;
    if (benchmark != nullptr) columns.push_back(benchmark);
    columns.insert(columns.end(), strategies.begin(), strategies.end());
    out << "date";
    for (const auto* c : columns) out << ',' << c->name;
    out << '\n';
    if (columns.empty()) return;
    const auto& dates = columns.front()->curve.dates;
    for (const auto* c : columns) {
        if (c->curve.size() != dates.size()) {
            throw std::invalid_argument("equity columns are not aligned on the same dates");
        }
    }
    for (std::size_t t = 0; t < dates.size(); ++t) {
        out << dates[t].to_string();
        for (const auto* c : columns) out << ',' << csv_num(c->curve.equity[t]);
        out << '\n';
    }
}

void write_regressions_csv(
    std::ofstream& out,
    const std::vector<std::pair<std::string, RegressionResult>>& regressions) {
    out << "dep_var,alpha,alpha_se,alpha_t,alpha_p,beta,beta_se,beta_t,beta_p\n";
    for (const auto& [name, r] : regressions) {
        out << name << ',' << csv_num(r.alpha) << ',' << csv_num(r.alpha_se) << ','
            << csv_num(r.alpha_t) << ',' << csv_num(r.alpha_p) << ',' << csv_num(r.beta) << ','
            << csv_num(r.beta_se) << ',' << csv_num(r.beta_t) << ',' << csv_num(r.beta_p) << '\n';
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (train_len == 0 || test_len == 0) {
        throw std::invalid_argument("config: train_len and test_len must be positive");
    }
    if (sequence_length <= 0) {
        throw std::invalid_argument("config: sequence_length must be positive");
    }
    if (train_len <= static_cast<std::size_t>(sequence_length) + 1) {
        throw std::invalid_argument("config: need train_len > sequence_length + 1");
    }
    if (cost_bps < 0.0) throw std::invalid_argument("config: cost_bps must be nonnegative");
    if (asset.periods_per_year <= 0) {
        throw std::invalid_argument("config: periods_per_year must be positive");
    }
    const auto check_network = [this](const NetworkConfig& c, const char* what) {
        c.validate();
        if (c.sequence_length != sequence_length) {
            throw std::invalid_argument(std::string("config: ") + what +
                                        " sequence_length differs from experiment value");
        }
    };
    check_network(network, "network");
    if (network_mae) check_network(*network_mae, "network_mae");
    for (const auto& cand : grid) check_network(cand, "grid candidate");
    if (grid.size() > 1 &&
        train_len < test_len + static_cast<std::size_t>(sequence_length) + 1) {
        throw std::invalid_argument(
            "config: tuning split needs train_len >= test_len + sequence_length + 1");
    }
}

std::string ExperimentConfig::strategy_name() const {
    return to_string(tuning_loss) + "/" + to_string(training_loss);
}

NetworkConfig preset_network(const std::string& name, LossChoice tuned_for) {
    NetworkConfig net;
    net.loss_choice = tuned_for;
    if (name == "paper-btc" || name == "paper-uso") {
        // Full-scale selected values. The 2.15 learning rate of the MADL
        // column is unusually large; gradient-norm clipping (default 5.0)
        // keeps it numerically alive.
        net.sequence_length = name == "paper-btc" ? 20 : 10;
        net.batch_size = name == "paper-btc" ? 1460 : 1008;
        if (tuned_for == LossChoice::kMadl) {
            net.layer_sizes = {512, 256, 128};
            net.dropout_rate = 0.02;
            net.l2_coefficient = 0.0005;
            net.learning_rate = 2.15;
            net.epochs = 300;
        } else {
            net.layer_sizes = {64, 32, 16};
            net.dropout_rate = 0.0002;
            net.l2_coefficient = 0.00001;
            net.learning_rate = 0.0015;
            net.epochs = 200;
        }
        return net;
    }
    if (name == "desk") {
        net.layer_sizes = {8, 4};
        net.sequence_length = 10;
        net.dropout_rate = 0.0;
        net.l2_coefficient = 0.0;
        net.learning_rate = 0.02;
        net.epochs = 150;
        net.batch_size = 0;
        return net;
    }
    throw std::invalid_argument("unknown preset '" + name +
                                "' (expected paper-btc, paper-uso or desk)");
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig config;
    if (name == "paper-btc") {
        config.asset.name = "BTC";
        config.asset.periods_per_year = 365;
        config.train_len = 1460;
        config.test_len = 365;
        config.sequence_length = 20;
    } else if (name == "paper-uso") {
        config.asset.name = "USO";
        config.asset.periods_per_year = 252;
        config.train_len = 1008;
        config.test_len = 252;
        config.sequence_length = 10;
    } else if (name == "desk") {
        config.asset.name = "DESK";
        config.asset.periods_per_year = 252;
        config.train_len = 500;
        config.test_len = 100;
        config.sequence_length = 10;
    } else {
        throw std::invalid_argument("unknown preset '" + name +
                                    "' (expected paper-btc, paper-uso or desk)");
    }
    config.network = preset_network(name, LossChoice::kMadl);
    config.network_mae = preset_network(name, LossChoice::kMae);
    return config;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const auto prices =
        load_price_csv(config.asset.csv_path, config.asset.schema, config.asset.name);
    const auto returns = to_simple_returns(prices, config.asset.periods_per_year);
    return run_experiment_on_returns(config, returns);
}

ExperimentResult run_experiment_on_returns(const ExperimentConfig& config,
                                           const ReturnSeries& returns) {
    config.validate();
    if (returns.size() <= config.train_len) {
        throw std::invalid_argument("series of " + std::to_string(returns.size()) +
                                    " returns too short for train_len " +
                                    std::to_string(config.train_len));
    }
    const auto tuning = tune(config, returns, config.tuning_loss);
    return run_with_selected(config, returns, tuning);
}

LossMatrixResult run_loss_matrix(const ExperimentConfig& config) {
    const auto prices =
        load_price_csv(config.asset.csv_path, config.asset.schema, config.asset.name);
    const auto returns = to_simple_returns(prices, config.asset.periods_per_year);
    return run_loss_matrix_on_returns(config, returns);
}

LossMatrixResult run_loss_matrix_on_returns(const ExperimentConfig& config,
                                            const ReturnSeries& returns) {
    config.validate();
    if (returns.size() <= config.train_len) {
        throw std::invalid_argument("series of " + std::to_string(returns.size()) +
                                    " returns too short for train_len " +
                                    std::to_string(config.train_len));
    }
    const auto tuned_madl = tune(config, returns, LossChoice::kMadl);
    const auto tuned_mae = tune(config, returns, LossChoice::kMae);

    const std::pair<LossChoice, LossChoice> combos[] = {
        {LossChoice::kMadl, LossChoice::kMadl},
        {LossChoice::kMadl, LossChoice::kMae},
        {LossChoice::kMae, LossChoice::kMae},
        {LossChoice::kMae, LossChoice::kMadl},
    };
    LossMatrixResult matrix;
    for (const auto& [tuning_loss, training_loss] : combos) {
        ExperimentConfig combo = config;
        combo.tuning_loss = tuning_loss;
        combo.training_loss = training_loss;
        const auto& tuned = tuning_loss == LossChoice::kMadl ? tuned_madl : tuned_mae;
        matrix.results.push_back(run_with_selected(combo, returns, tuned));
    }
    return matrix;
}

void emit_loss_surface(std::ostream& out, double realized_lo, double realized_hi,
                       double forecast_lo, double forecast_hi, int realized_steps,
                       int forecast_steps, LossChoice loss) {
    if (realized_steps <= 0 || forecast_steps <= 0) {
        throw std::invalid_argument("loss surface needs positive step counts");
    }
    if (!(realized_hi >= realized_lo) || !(forecast_hi >= forecast_lo)) {
        throw std::invalid_argument("loss surface ranges are empty");
    }
    const auto coord = [](double lo, double hi, int steps, int i) {
        return steps > 1 ? lo + (hi - lo) * static_cast<double>(i) / (steps - 1) : lo;
    };
    std::vector<double> forecasts(static_cast<std::size_t>(forecast_steps));
    for (int j = 0; j < forecast_steps; ++j) {
        forecasts[static_cast<std::size_t>(j)] = coord(forecast_lo, forecast_hi, forecast_steps, j);
    }
    out << "realized";
    for (double f : forecasts) out << ',' << csv_num(f);
    out << '\n';
    for (int i = 0; i < realized_steps; ++i) {
        const double r = coord(realized_lo, realized_hi, realized_steps, i);
        out << csv_num(r);
        const std::span<const double> rs(&r, 1);
        for (double f : forecasts) {
            const std::span<const double> fs(&f, 1);
            const double value = loss == LossChoice::kMadl ? madl(rs, fs) : mae(rs, fs);
            out << ',' << csv_num(value);
        }
        out << '\n';
    }
}

ReportPaths write_report_files(
    const std::filesystem::path& out_dir, const StrategyResult* benchmark,
    const std::vector<const StrategyResult*>& strategies,
    const std::vector<std::pair<std::string, RegressionResult>>& regressions,
    const ExperimentConfig& config) {
    std::filesystem::create_directories(out_dir);
    ReportPaths paths;
    paths.metrics_csv = out_dir / "metrics.csv";
    paths.equity_csv = out_dir / "equity.csv";
    paths.regressions_csv = out_dir / "regressions.csv";
    paths.manifest_json = out_dir / "run_manifest.json";

    {
        auto out = open_out(paths.metrics_csv);
        write_metrics_csv(out, benchmark, strategies);
    }
    {
        auto out = open_out(paths.equity_csv);
        write_equity_csv(out, benchmark, strategies);
    }
    {
        auto out = open_out(paths.regressions_csv);
        write_regressions_csv(out, regressions);
    }
    {
        nlohmann::json manifest;
        manifest["engine"] = "madl-engine";
        manifest["version"] = "0.1.0";
        manifest["created_utc"] = utc_timestamp();
        manifest["seed"] = config.seed;
        manifest["config"] = config;
        char hash_hex[24];
        std::snprintf(hash_hex, sizeof(hash_hex), "0x%016llx",
                      static_cast<unsigned long long>(config_hash(config)));
        manifest["config_hash"] = hash_hex;
        manifest["files"] = {paths.metrics_csv.filename().string(),
                             paths.equity_csv.filename().string(),
                             paths.regressions_csv.filename().string()};
        auto out = open_out(paths.manifest_json);
        out << manifest.dump(2) << '\n';
    }
    return paths;
}

ReportPaths write_reports(const ExperimentResult& result, const std::filesystem::path& out_dir) {
    auto paths = write_report_files(out_dir, &result.benchmark, {&result.strategy},
                                    result.regressions, result.config);
    paths.result_json = out_dir / "result.json";
    nlohmann::json j;
    j["kind"] = "experiment";
    j["result"] = result;
    auto out = open_out(paths.result_json);
    out << j.dump() << '\n';
    return paths;
}

ReportPaths write_reports(const LossMatrixResult& result, const std::filesystem::path& out_dir) {
    if (result.results.empty()) {
        throw std::invalid_argument("cannot write reports for an empty loss matrix");
    }
    std::vector<const StrategyResult*> strategies;
    std::vector<std::pair<std::string, RegressionResult>> regressions;
    for (const auto& r : result.results) {
        strategies.push_back(&r.strategy);
        regressions.insert(regressions.end(), r.regressions.begin(), r.regressions.end());
    }
    auto paths = write_report_files(out_dir, &result.results.front().benchmark, strategies,
                                    regressions, result.results.front().config);
    paths.result_json = out_dir / "result.json";
    nlohmann::json j;
    j["kind"] = "matrix";
    j["result"] = result;
    auto out = open_out(paths.result_json);
    out << j.dump() << '\n';
    return paths;
}

}  // namespace madlab
