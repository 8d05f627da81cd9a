#include "madl/serialization.hpp"

#include <string>
#include <vector>

namespace madlab {

namespace {

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<std::string> dates_to_strings(const std::vector<Date>& dates) {
    std::vector<std::string> out;
    out.reserve(dates.size());
    for (const auto& d : dates) out.push_back(d.to_string());
    return out;
}

std::vector<Date> dates_from_strings(const std::vector<std::string>& strings) {
    std::vector<Date> out;
    out.reserve(strings.size());
    for (const auto& s : strings) out.push_back(Date::parse(s));
    return out;
}

nlohmann::json optional_to_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const NetworkConfig& c) {
    j = nlohmann::json{{"layer_sizes", c.layer_sizes},
                       {"sequence_length", c.sequence_length},
                       {"dropout_rate", c.dropout_rate},
                       {"l2_coefficient", c.l2_coefficient},
                       {"learning_rate", c.learning_rate},
                       {"epochs", c.epochs},
                       {"batch_size", c.batch_size},
                       {"loss_choice", c.loss_choice},
                       {"surrogate_steepness", c.surrogate_steepness},
                       {"grad_clip_norm", c.grad_clip_norm},
                       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
    get_if_present(j, "layer_sizes", c.layer_sizes);
    get_if_present(j, "sequence_length", c.sequence_length);
    get_if_present(j, "dropout_rate", c.dropout_rate);
    get_if_present(j, "l2_coefficient", c.l2_coefficient);
    get_if_present(j, "learning_rate", c.learning_rate);
    get_if_present(j, "epochs", c.epochs);
    get_if_present(j, "batch_size", c.batch_size);
    get_if_present(j, "loss_choice", c.loss_choice);
    get_if_present(j, "surrogate_steepness", c.surrogate_steepness);
    get_if_present(j, "grad_clip_norm", c.grad_clip_norm);
    get_if_present(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const AssetInput& a) {
    j = nlohmann::json{{"name", a.name},
                       {"csv_path", a.csv_path.string()},
                       {"date_column", a.schema.date_column},
                       {"close_column", a.schema.close_column},
                       {"periods_per_year", a.periods_per_year}};
}

void from_json(const nlohmann::json& j, AssetInput& a) {
    get_if_present(j, "name", a.name);
    if (j.contains("csv_path")) a.csv_path = j.at("csv_path").get<std::string>();
    get_if_present(j, "date_column", a.schema.date_column);
    get_if_present(j, "close_column", a.schema.close_column);
    get_if_present(j, "periods_per_year", a.periods_per_year);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"asset", c.asset},
                       {"train_len", c.train_len},
                       {"test_len", c.test_len},
                       {"sequence_length", c.sequence_length},
                       {"tuning_loss", c.tuning_loss},
                       {"training_loss", c.training_loss},
                       {"network", c.network},
                       {"grid", c.grid},
                       {"cost_bps", c.cost_bps},
                       {"seed", c.seed},
                       {"out_dir", c.out_dir.string()},
                       {"regress_benchmark_on_strategy", c.regress_benchmark_on_strategy}};
    if (c.network_mae) j["network_mae"] = *c.network_mae;
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    get_if_present(j, "asset", c.asset);
    get_if_present(j, "train_len", c.train_len);
    get_if_present(j, "test_len", c.test_len);
    get_if_present(j, "sequence_length", c.sequence_length);
    get_if_present(j, "tuning_loss", c.tuning_loss);
    get_if_present(j, "training_loss", c.training_loss);
    get_if_present(j, "network", c.network);
    if (j.contains("network_mae")) {
        NetworkConfig net;
        from_json(j.at("network_mae"), net);
        c.network_mae = net;
    }
    get_if_present(j, "grid", c.grid);
    get_if_present(j, "cost_bps", c.cost_bps);
    get_if_present(j, "seed", c.seed);
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    get_if_present(j, "regress_benchmark_on_strategy", c.regress_benchmark_on_strategy);
}

void to_json(nlohmann::json& j, const MetricsReport& m) {
    j = nlohmann::json{{"arc_pct", m.arc_pct},   {"asd_pct", m.asd_pct},
                       {"md_pct", m.md_pct},     {"mld_years", m.mld_years},
                       {"ir1", optional_to_json(m.ir1)},
                       {"ir2", optional_to_json(m.ir2)},
                       {"ir3", optional_to_json(m.ir3)},
                       {"n_obs", m.n_obs},       {"n_trades", m.n_trades}};
}

void from_json(const nlohmann::json& j, MetricsReport& m) {
    m.arc_pct = j.at("arc_pct").get<double>();
    m.asd_pct = j.at("asd_pct").get<double>();
    m.md_pct = j.at("md_pct").get<double>();
    m.mld_years = j.at("mld_years").get<double>();
    m.ir1 = optional_from_json(j.at("ir1"));
    m.ir2 = optional_from_json(j.at("ir2"));
    m.ir3 = optional_from_json(j.at("ir3"));
    m.n_obs = j.at("n_obs").get<std::size_t>();
    m.n_trades = j.at("n_trades").get<std::size_t>();
}

void to_json(nlohmann::json& j, const RegressionResult& r) {
    j = nlohmann::json{{"alpha", r.alpha},       {"beta", r.beta},
                       {"alpha_se", r.alpha_se}, {"beta_se", r.beta_se},
                       {"alpha_t", r.alpha_t},   {"beta_t", r.beta_t},
                       {"alpha_p", r.alpha_p},   {"beta_p", r.beta_p},
                       {"n", r.n},               {"residual_variance", r.residual_variance}};
}

void from_json(const nlohmann::json& j, RegressionResult& r) {
    r.alpha = j.at("alpha").get<double>();
    r.beta = j.at("beta").get<double>();
    r.alpha_se = j.at("alpha_se").get<double>();
    r.beta_se = j.at("beta_se").get<double>();
    r.alpha_t = j.at("alpha_t").get<double>();
    r.beta_t = j.at("beta_t").get<double>();
    r.alpha_p = j.at("alpha_p").get<double>();
    r.beta_p = j.at("beta_p").get<double>();
    r.n = j.at("n").get<std::size_t>();
    r.residual_variance = j.at("residual_variance").get<double>();
}

void to_json(nlohmann::json& j, const StrategyResult& s) {
    j = nlohmann::json{{"name", s.name},
                       {"forecasts", s.forecasts.values},
                       {"forecast_dates", dates_to_strings(s.forecasts.dates)},
                       {"dates", dates_to_strings(s.curve.dates)},
                       {"equity", s.curve.equity},
                       {"strategy_returns", s.curve.strategy_returns},
                       {"positions", s.curve.positions.positions},
                       {"periods_per_year", s.curve.periods_per_year},
                       {"metrics", s.metrics}};
}

void from_json(const nlohmann::json& j, StrategyResult& s) {
    s.name = j.at("name").get<std::string>();
    s.forecasts.values = j.at("forecasts").get<std::vector<double>>();
    s.forecasts.dates = dates_from_strings(j.at("forecast_dates").get<std::vector<std::string>>());
    s.curve.dates = dates_from_strings(j.at("dates").get<std::vector<std::string>>());
    s.curve.equity = j.at("equity").get<std::vector<double>>();
    s.curve.strategy_returns = j.at("strategy_returns").get<std::vector<double>>();
    s.curve.positions.positions = j.at("positions").get<std::vector<int>>();
    s.curve.periods_per_year = j.at("periods_per_year").get<int>();
    s.metrics = j.at("metrics").get<MetricsReport>();
}

namespace {

void to_json_window(nlohmann::json& j, const WalkForwardWindow& w) {
    j = nlohmann::json{{"train_start", w.train_start},
                       {"train_end", w.train_end},
                       {"test_start", w.test_start},
                       {"test_end", w.test_end}};
}

WalkForwardWindow window_from_json(const nlohmann::json& j) {
    WalkForwardWindow w;
    w.train_start = j.at("train_start").get<std::size_t>();
    w.train_end = j.at("train_end").get<std::size_t>();
    w.test_start = j.at("test_start").get<std::size_t>();
    w.test_end = j.at("test_end").get<std::size_t>();
    return w;
}

}  // namespace

void to_json(nlohmann::json& j, const ExperimentResult& r) {
    j["config"] = r.config;
    j["n_returns"] = r.n_returns;
    auto& windows = j["plan"] = nlohmann::json::array();
    for (const auto& w : r.plan.windows) {
        nlohmann::json wj;
        to_json_window(wj, w);
        windows.push_back(std::move(wj));
    }
    j["selected_network"] = r.selected_network;
    j["tuning_scores"] = r.tuning_scores;
    auto& summaries = j["windows"] = nlohmann::json::array();
    for (const auto& s : r.windows) {
        nlohmann::json sj;
        sj["index"] = s.index;
        to_json_window(sj["window"], s.window);
        sj["train_sequences"] = s.train_sequences;
        sj["final_train_loss"] = s.final_train_loss;
        summaries.push_back(std::move(sj));
    }
    j["strategy"] = r.strategy;
    j["benchmark"] = r.benchmark;
    auto& regs = j["regressions"] = nlohmann::json::array();
    for (const auto& [name, reg] : r.regressions) {
        regs.push_back(nlohmann::json{{"dep_var", name}, {"result", reg}});
    }
    j["config_hash"] = r.config_hash;
}

void from_json(const nlohmann::json& j, ExperimentResult& r) {
    r.config = j.at("config").get<ExperimentConfig>();
    r.n_returns = j.at("n_returns").get<std::size_t>();
    r.plan.windows.clear();
    for (const auto& wj : j.at("plan")) r.plan.windows.push_back(window_from_json(wj));
    r.selected_network = j.at("selected_network").get<NetworkConfig>();
    r.tuning_scores = j.at("tuning_scores").get<std::vector<double>>();
    r.windows.clear();
    for (const auto& sj : j.at("windows")) {
        WindowSummary s;
        s.index = sj.at("index").get<std::size_t>();
        s.window = window_from_json(sj.at("window"));
        s.train_sequences = sj.at("train_sequences").get<std::size_t>();
        s.final_train_loss = sj.at("final_train_loss").get<double>();
        r.windows.push_back(std::move(s));
    }
    r.strategy = j.at("strategy").get<StrategyResult>();
    r.benchmark = j.at("benchmark").get<StrategyResult>();
    r.regressions.clear();
    for (const auto& rj : j.at("regressions")) {
        r.regressions.emplace_back(rj.at("dep_var").get<std::string>(),
                                   rj.at("result").get<RegressionResult>());
    }
    r.config_hash = j.at("config_hash").get<std::uint64_t>();
}

void to_json(nlohmann::json& j, const LossMatrixResult& r) {
    j = nlohmann::json{{"results", r.results}};
}

void from_json(const nlohmann::json& j, LossMatrixResult& r) {
    r.results = j.at("results").get<std::vector<ExperimentResult>>();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const nlohmann::json j = config;
    const std::string canonical = j.dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace madlab
