// Command-line front end: full experiment runs, the four-way loss matrix,
// tuning-only runs, loss-surface grids and report re-emission.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "madl/experiment.hpp"
#include "madl/serialization.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
    cmd->add_option("--preset", opts.preset, "named defaults: paper-btc, paper-uso, desk")
        ->check(CLI::IsMember({"paper-btc", "paper-uso", "desk"}));
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "seed override");
}

madlab::ExperimentConfig resolve_config(const CommonOpts& opts) {
    madlab::ExperimentConfig config =
        opts.preset.empty() ? madlab::ExperimentConfig{} : madlab::preset_config(opts.preset);
    if (opts.config_path.empty() && opts.preset.empty()) {
        throw std::runtime_error("either --config or --preset is required");
    }
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw std::runtime_error("cannot open config: " + opts.config_path);
        nlohmann::json j;
        in >> j;
        madlab::from_json(j, config);  // overlays onto the preset defaults
    }
    if (opts.seed) config.seed = *opts.seed;
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    if (config.asset.csv_path.empty()) {
        throw std::runtime_error("config: asset.csv_path is required");
    }
    config.validate();
    return config;
}

void print_metrics_line(const madlab::StrategyResult& s) {
    const auto& m = s.metrics;
    const auto opt = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("n/a");
    };
    std::cout << s.name << ": aRC=" << m.arc_pct << "% aSD=" << m.asd_pct << "% MD=" << m.md_pct
              << "% MLD=" << m.mld_years << "y IR*=" << opt(m.ir1) << " IR**=" << opt(m.ir2)
              << " IR***=" << opt(m.ir3) << " nObs=" << m.n_obs << " nTrades=" << m.n_trades
              << "\n";
}

int cmd_run(const CommonOpts& opts) {
    const auto config = resolve_config(opts);
    const auto result = madlab::run_experiment(config);
    const auto paths = madlab::write_reports(result, config.out_dir);
    print_metrics_line(result.benchmark);
    print_metrics_line(result.strategy);
    std::cout << "reports written to " << paths.metrics_csv.parent_path().string() << "\n";
    return 0;
}

int cmd_matrix(const CommonOpts& opts) {
    const auto config = resolve_config(opts);
    const auto result = madlab::run_loss_matrix(config);
    const auto paths = madlab::write_reports(result, config.out_dir);
    print_metrics_line(result.results.front().benchmark);
    for (const auto& r : result.results) print_metrics_line(r.strategy);
    std::cout << "reports written to " << paths.metrics_csv.parent_path().string() << "\n";
    return 0;
}

int cmd_tune(const CommonOpts& opts) {
    auto config = resolve_config(opts);
    const auto prices =
        madlab::load_price_csv(config.asset.csv_path, config.asset.schema, config.asset.name);
    const auto returns = madlab::to_simple_returns(prices, config.asset.periods_per_year);

    // Force a real search even for a singleton candidate set so scores are
    // always reported.
    if (config.grid.empty()) {
        config.grid = {config.network};
        if (config.network_mae && config.tuning_loss == madlab::LossChoice::kMae) {
            config.grid = {*config.network_mae};
        }
    }
    const auto seq = static_cast<std::size_t>(config.sequence_length);
    const std::size_t sub_train_end = config.train_len - config.test_len;
    const auto standardizer = madlab::fit_standardizer(returns, 0, sub_train_end);
    const auto train_set =
        madlab::make_sequences_for_targets(returns, seq, standardizer, seq, sub_train_end);
    const auto valid_set = madlab::make_sequences_for_targets(returns, seq, standardizer,
                                                            sub_train_end, config.train_len);
    auto grid = config.grid;
    for (auto& cand : grid) cand.loss_choice = config.tuning_loss;
    const auto gs = madlab::grid_search(grid, train_set, valid_set, config.tuning_loss);

    std::filesystem::create_directories(config.out_dir);
    const auto tuning_csv = config.out_dir / "tuning.csv";
    std::ofstream out(tuning_csv);
    if (!out) throw std::runtime_error("cannot write " + tuning_csv.string());
    out << "candidate,score,selected\n";
    for (std::size_t i = 0; i < gs.scores.size(); ++i) {
        out << i << ',' << gs.scores[i] << ',' << (i == gs.best_index ? 1 : 0) << '\n';
    }
    const nlohmann::json best = gs.best_config;
    std::cout << "selected candidate " << gs.best_index << " (score " << gs.scores[gs.best_index]
              << ") under " << madlab::to_string(config.tuning_loss) << ":\n"
              << best.dump(2) << "\n";
    std::cout << "scores written to " << tuning_csv.string() << "\n";
    return 0;
}

int cmd_report(const std::string& result_path, const std::string& out_dir) {
    std::ifstream in(result_path);
    if (!in) throw std::runtime_error("cannot open result file: " + result_path);
    nlohmann::json j;
    in >> j;
    const auto kind = j.value("kind", "");
    const std::filesystem::path out = out_dir.empty()
                                          ? std::filesystem::path(result_path).parent_path()
                                          : std::filesystem::path(out_dir);
    if (kind == "experiment") {
        const auto result = j.at("result").get<madlab::ExperimentResult>();
        madlab::write_reports(result, out);
    } else if (kind == "matrix") {
        const auto result = j.at("result").get<madlab::LossMatrixResult>();
        madlab::write_reports(result, out);
    } else {
        throw std::runtime_error("unrecognized result kind '" + kind + "' in " + result_path);
    }
    std::cout << "reports re-emitted to " << out.string() << "\n";
    return 0;
}

int cmd_surface(const std::string& loss_name, double r_lo, double r_hi, double f_lo, double f_hi,
                int steps, const std::string& out_path) {
    const auto loss = madlab::loss_choice_from_string(loss_name);
    if (out_path.empty() || out_path == "-") {
        madlab::emit_loss_surface(std::cout, r_lo, r_hi, f_lo, f_hi, steps, steps, loss);
        return 0;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    madlab::emit_loss_surface(out, r_lo, r_hi, f_lo, f_hi, steps, steps, loss);
    std::cout << "surface written to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"madl: directional-loss LSTM forecasting and walk-forward backtest engine"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    auto* run = app.add_subcommand("run", "run one tuning/training experiment");
    add_common(run, run_opts);

    CommonOpts matrix_opts;
    auto* matrix =
        app.add_subcommand("matrix", "run the four tuning/training loss combinations");
    add_common(matrix, matrix_opts);

    CommonOpts tune_opts;
    auto* tune = app.add_subcommand("tune", "hyperparameter grid search only");
    add_common(tune, tune_opts);

    std::string surface_loss = "madl";
    double r_lo = -0.05, r_hi = 0.05, f_lo = -0.05, f_hi = 0.05;
    int surface_steps = 41;
    std::string surface_out;
    auto* surface = app.add_subcommand("surface", "emit a loss-value grid over (R, forecast)");
    surface->add_option("--loss", surface_loss, "madl or mae")
        ->check(CLI::IsMember({"madl", "mae", "MADL", "MAE"}));
    surface->add_option("--r-min", r_lo, "realized return lower bound");
    surface->add_option("--r-max", r_hi, "realized return upper bound");
    surface->add_option("--f-min", f_lo, "forecast lower bound");
    surface->add_option("--f-max", f_hi, "forecast upper bound");
    surface->add_option("--steps", surface_steps, "grid steps per axis");
    surface->add_option("--out", surface_out, "output file ('-' for stdout)");

    std::string report_result, report_out;
    auto* report = app.add_subcommand("report", "re-emit report files from a stored result");
    report->add_option("--result", report_result, "result.json produced by run/matrix")
        ->required();
    report->add_option("--out", report_out, "output directory (defaults next to the result)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (matrix->parsed()) return cmd_matrix(matrix_opts);
        if (tune->parsed()) return cmd_tune(tune_opts);
        if (surface->parsed()) {
            return cmd_surface(surface_loss, r_lo, r_hi, f_lo, f_hi, surface_steps, surface_out);
        }
        if (report->parsed()) return cmd_report(report_result, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
