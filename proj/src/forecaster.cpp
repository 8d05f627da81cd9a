#include "madl/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>

#include <json.hpp>

#include "madl/rng.hpp"

namespace madlab {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
    return (1.0 + (-x.array()).exp()).inverse().matrix();
}

// Flat views over every tensor; keeps Adam/clipping/norms uniform across
// matrices, vectors and the scalar head bias.
std::vector<std::span<double>> tensor_views(ModelParams& p) {
    std::vector<std::span<double>> views;
    for (auto& layer : p.layers) {
        for (auto& m : layer.w_in) views.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
        for (auto& m : layer.w_rec)
            views.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
        for (auto& b : layer.bias) views.emplace_back(b.data(), static_cast<std::size_t>(b.size()));
    }
    views.emplace_back(p.head_weight.data(), static_cast<std::size_t>(p.head_weight.size()));
    views.emplace_back(&p.head_bias, 1);
    return views;
}

std::vector<std::span<const double>> tensor_views(const ModelParams& p) {
    std::vector<std::span<const double>> views;
    for (const auto& layer : p.layers) {
        for (const auto& m : layer.w_in)
            views.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
        for (const auto& m : layer.w_rec)
            views.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
        for (const auto& b : layer.bias)
            views.emplace_back(b.data(), static_cast<std::size_t>(b.size()));
    }
    views.emplace_back(p.head_weight.data(), static_cast<std::size_t>(p.head_weight.size()));
    views.emplace_back(&p.head_bias, 1);
    return views;
}

void check_same_shape(const ModelParams& a, const ModelParams& b, const char* what) {
    if (a.layers.size() != b.layers.size() || a.head_weight.size() != b.head_weight.size()) {
        throw std::invalid_argument(std::string("shape mismatch: ") + what);
    }
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].input_dim() != b.layers[l].input_dim() ||
            a.layers[l].hidden_size() != b.layers[l].hidden_size()) {
            throw std::invalid_argument(std::string("shape mismatch: ") + what);
        }
    }
}

double exact_loss(const ModelParams& params, const SequenceSet& set, LossChoice choice) {
    const auto fwd = forward(params, set, RunMode::kInfer);
    const std::span<const double> targets(set.targets);
    const std::span<const double> forecasts(fwd.forecasts.data(),
                                            static_cast<std::size_t>(fwd.forecasts.size()));
    return choice == LossChoice::kMadl ? madl(targets, forecasts) : mae(targets, forecasts);
}

}  // namespace

void NetworkConfig::validate() const {
    if (layer_sizes.empty()) throw std::invalid_argument("config: need at least one LSTM layer");
    for (int s : layer_sizes) {
        if (s <= 0) throw std::invalid_argument("config: layer sizes must be positive");
    }
    if (sequence_length <= 0) throw std::invalid_argument("config: sequence_length must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw std::invalid_argument("config: dropout_rate must lie in [0, 1)");
    }
    if (l2_coefficient < 0.0) throw std::invalid_argument("config: l2_coefficient must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be positive");
    if (epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
    if (batch_size < 0) throw std::invalid_argument("config: batch_size must be >= 0");
    if (!(surrogate_steepness > 0.0)) {
        throw std::invalid_argument("config: surrogate_steepness must be positive");
    }
}

ModelParams zeros_like(const ModelParams& params) {
    ModelParams z = params;
    for (auto view : tensor_views(z)) std::fill(view.begin(), view.end(), 0.0);
    return z;
}

AdamState AdamState::like(const ModelParams& params) {
    AdamState state;
    state.m = zeros_like(params);
    state.v = zeros_like(params);
    return state;
}

ModelParams init_params(const NetworkConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const auto fill_uniform = [&rng](Eigen::MatrixXd& m, double limit) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
        }
    };

    ModelParams params;
    Eigen::Index input_dim = 1;  // univariate standardized returns
    for (int hidden : config.layer_sizes) {
        LstmLayerParams layer;
        const auto h = static_cast<Eigen::Index>(hidden);
        const double in_limit = std::sqrt(6.0 / static_cast<double>(input_dim + h));
        const double rec_limit = std::sqrt(6.0 / static_cast<double>(h + h));
        for (int g = 0; g < kNumGates; ++g) {
            layer.w_in[g].resize(input_dim, h);
            fill_uniform(layer.w_in[g], in_limit);
            layer.w_rec[g].resize(h, h);
            fill_uniform(layer.w_rec[g], rec_limit);
            layer.bias[g] = Eigen::VectorXd::Constant(h, g == kGateForget ? 1.0 : 0.0);
        }
        params.layers.push_back(std::move(layer));
        input_dim = h;
    }
    const double head_limit = std::sqrt(6.0 / static_cast<double>(input_dim + 1));
    params.head_weight.resize(input_dim);
    for (Eigen::Index i = 0; i < input_dim; ++i) {
        params.head_weight(i) = rng.uniform(-head_limit, head_limit);
    }
    params.head_bias = 0.0;
    return params;
}

ForwardResult forward(const ModelParams& params, const SequenceSet& batch, RunMode mode,
                      double dropout_rate, std::uint64_t dropout_mask_seed) {
    if (params.layers.empty()) throw std::invalid_argument("forward: model has no layers");
    if (params.layers.front().input_dim() != 1) {
        throw std::invalid_argument("forward: first layer must accept univariate input");
    }
    if (batch.size() == 0) throw std::invalid_argument("forward: empty batch");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw std::invalid_argument("forward: dropout_rate must lie in [0, 1)");
    }
    const auto b = static_cast<Eigen::Index>(batch.size());
    const auto t_steps = static_cast<Eigen::Index>(batch.sequence_length());
    const bool use_dropout = mode == RunMode::kTrain && dropout_rate > 0.0;
    Rng mask_rng(dropout_mask_seed);
    const double keep_scale = use_dropout ? 1.0 / (1.0 - dropout_rate) : 1.0;

    ForwardResult result;
    result.cache.mode = mode;
    result.cache.batch = b;
    result.cache.steps = t_steps;
    result.cache.layers.resize(params.layers.size());

    // Per-step outputs of the layer below; layer 0 consumes the raw inputs.
    std::vector<Eigen::MatrixXd> below(static_cast<std::size_t>(t_steps));
    for (Eigen::Index t = 0; t < t_steps; ++t) {
        below[static_cast<std::size_t>(t)] = batch.inputs.col(t);
    }

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        auto& cache = result.cache.layers[l];
        const Eigen::Index h = layer.hidden_size();
        const Eigen::Index d = layer.input_dim();
        if (below.front().cols() != d) {
            throw std::invalid_argument("forward: layer " + std::to_string(l) +
                                        " input dimension mismatch");
        }
        cache.input = std::move(below);
        below.assign(static_cast<std::size_t>(t_steps), Eigen::MatrixXd());
        for (int g = 0; g < kNumGates; ++g) {
            cache.gate[g].resize(static_cast<std::size_t>(t_steps));
        }
        cache.cell.resize(static_cast<std::size_t>(t_steps));
        cache.cell_tanh.resize(static_cast<std::size_t>(t_steps));
        cache.hidden.resize(static_cast<std::size_t>(t_steps));
        if (use_dropout) cache.mask.resize(static_cast<std::size_t>(t_steps));

        Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(b, h);
        Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(b, h);
        for (Eigen::Index t = 0; t < t_steps; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            const Eigen::MatrixXd& x = cache.input[ts];
            std::array<Eigen::MatrixXd, kNumGates> pre;
            for (int g = 0; g < kNumGates; ++g) {
                pre[g] = x * layer.w_in[g] + h_prev * layer.w_rec[g];
                pre[g].rowwise() += layer.bias[g].transpose();
            }
            cache.gate[kGateInput][ts] = sigmoid(pre[kGateInput]);
            cache.gate[kGateForget][ts] = sigmoid(pre[kGateForget]);
            cache.gate[kGateCell][ts] = pre[kGateCell].array().tanh().matrix();
            cache.gate[kGateOutput][ts] = sigmoid(pre[kGateOutput]);

            cache.cell[ts] = cache.gate[kGateForget][ts].cwiseProduct(c_prev) +
                             cache.gate[kGateInput][ts].cwiseProduct(cache.gate[kGateCell][ts]);
            cache.cell_tanh[ts] = cache.cell[ts].array().tanh().matrix();
            cache.hidden[ts] = cache.gate[kGateOutput][ts].cwiseProduct(cache.cell_tanh[ts]);

            if (use_dropout) {
                Eigen::MatrixXd mask(b, h);
                for (Eigen::Index row = 0; row < b; ++row) {
                    for (Eigen::Index col = 0; col < h; ++col) {
                        mask(row, col) = mask_rng.uniform() >= dropout_rate ? keep_scale : 0.0;
                    }
                }
                below[ts] = mask.cwiseProduct(cache.hidden[ts]);
                cache.mask[ts] = std::move(mask);
            } else {
                below[ts] = cache.hidden[ts];
            }
            h_prev = cache.hidden[ts];
            c_prev = cache.cell[ts];
        }
    }

    result.cache.head_input = below.back();
    result.forecasts =
        (result.cache.head_input * params.head_weight).array() + params.head_bias;
    return result;
}

ModelGradients backward(const ModelParams& params, const ForwardCache& cache,
                        const Eigen::VectorXd& dloss_dforecast, double l2_coefficient) {
    if (cache.layers.size() != params.layers.size() || cache.batch == 0) {
        throw std::invalid_argument("backward: cache missing or stale for these parameters");
    }
    if (dloss_dforecast.size() != cache.batch) {
        throw std::invalid_argument("backward: upstream gradient size " +
                                    std::to_string(dloss_dforecast.size()) +
                                    " does not match cached batch " +
                                    std::to_string(cache.batch));
    }
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        if (cache.layers[l].hidden.front().cols() != params.layers[l].hidden_size()) {
            throw std::invalid_argument("backward: cache stale for layer " + std::to_string(l));
        }
    }
    if (l2_coefficient < 0.0) throw std::invalid_argument("backward: l2_coefficient must be >= 0");

    ModelGradients grads = zeros_like(params);
    const auto steps = static_cast<std::size_t>(cache.steps);

    // Head.
    grads.head_weight = cache.head_input.transpose() * dloss_dforecast;
    grads.head_bias = dloss_dforecast.sum();

    // Upstream gradient w.r.t. each layer's (post-dropout) output sequence.
    std::vector<Eigen::MatrixXd> d_out(steps);
    const Eigen::Index last_hidden = params.layers.back().hidden_size();
    for (std::size_t t = 0; t < steps; ++t) {
        d_out[t] = Eigen::MatrixXd::Zero(cache.batch, last_hidden);
    }
    d_out[steps - 1] = dloss_dforecast * params.head_weight.transpose();

    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const auto& layer = params.layers[li];
        const auto& lc = cache.layers[li];
        auto& lg = grads.layers[li];
        const Eigen::Index h = layer.hidden_size();

        Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(cache.batch, h);
        Eigen::MatrixXd dh_rec = Eigen::MatrixXd::Zero(cache.batch, h);
        std::vector<Eigen::MatrixXd> d_below(steps);

        for (std::size_t t = steps; t-- > 0;) {
            Eigen::MatrixXd dh = lc.mask.empty() ? d_out[t]
                                                 : lc.mask[t].cwiseProduct(d_out[t]).eval();
            dh += dh_rec;

            const auto& gi = lc.gate[kGateInput][t];
            const auto& gf = lc.gate[kGateForget][t];
            const auto& gg = lc.gate[kGateCell][t];
            const auto& go = lc.gate[kGateOutput][t];

            const Eigen::MatrixXd da_o =
                dh.cwiseProduct(lc.cell_tanh[t])
                    .cwiseProduct(go)
                    .cwiseProduct((1.0 - go.array()).matrix());
            Eigen::MatrixXd dc =
                dh.cwiseProduct(go).cwiseProduct(
                    (1.0 - lc.cell_tanh[t].array().square()).matrix()) +
                dc_next;

            const Eigen::MatrixXd da_i = dc.cwiseProduct(gg).cwiseProduct(gi).cwiseProduct(
                (1.0 - gi.array()).matrix());
            const Eigen::MatrixXd da_g =
                dc.cwiseProduct(gi).cwiseProduct((1.0 - gg.array().square()).matrix());
            Eigen::MatrixXd da_f;
            if (t > 0) {
                da_f = dc.cwiseProduct(lc.cell[t - 1]).cwiseProduct(gf).cwiseProduct(
                    (1.0 - gf.array()).matrix());
            } else {
                da_f = Eigen::MatrixXd::Zero(cache.batch, h);  // c_{-1} = 0
            }
            dc_next = dc.cwiseProduct(gf);

            const std::array<const Eigen::MatrixXd*, kNumGates> da = {&da_i, &da_f, &da_g, &da_o};
            d_below[t] = Eigen::MatrixXd::Zero(cache.batch, layer.input_dim());
            dh_rec = Eigen::MatrixXd::Zero(cache.batch, h);
            for (int g = 0; g < kNumGates; ++g) {
                lg.w_in[g].noalias() += lc.input[t].transpose() * (*da[g]);
                if (t > 0) {
                    lg.w_rec[g].noalias() += lc.hidden[t - 1].transpose() * (*da[g]);
                }
                lg.bias[g] += da[g]->colwise().sum().transpose();
                d_below[t].noalias() += (*da[g]) * layer.w_in[g].transpose();
                dh_rec.noalias() += (*da[g]) * layer.w_rec[g].transpose();
            }
        }
        d_out = std::move(d_below);
    }

    if (l2_coefficient > 0.0) {
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            for (int g = 0; g < kNumGates; ++g) {
                grads.layers[l].w_in[g] += 2.0 * l2_coefficient * params.layers[l].w_in[g];
                grads.layers[l].w_rec[g] += 2.0 * l2_coefficient * params.layers[l].w_rec[g];
            }
        }
        grads.head_weight += 2.0 * l2_coefficient * params.head_weight;
    }
    return grads;
}

void adam_step(ModelParams& params, const ModelGradients& grads, AdamState& state,
               double learning_rate) {
    check_same_shape(params, grads, "params vs grads");
    check_same_shape(params, state.m, "params vs adam state");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto p_views = tensor_views(params);
    const auto g_views = tensor_views(static_cast<const ModelParams&>(grads));
    auto m_views = tensor_views(state.m);
    auto v_views = tensor_views(state.v);
    for (std::size_t i = 0; i < p_views.size(); ++i) {
        auto p = p_views[i];
        const auto g = g_views[i];
        auto m = m_views[i];
        auto v = v_views[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            p[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

double global_grad_norm(const ModelGradients& grads) {
    double sum = 0.0;
    for (const auto view : tensor_views(grads)) {
        for (double g : view) sum += g * g;
    }
    return std::sqrt(sum);
}

void clip_grad_norm(ModelGradients& grads, double max_norm) {
    if (!(max_norm > 0.0)) return;
    const double norm = global_grad_norm(grads);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (auto view : tensor_views(grads)) {
        for (double& g : view) g *= scale;
    }
}

TrainResult train(const NetworkConfig& config, const SequenceSet& train_set,
                  const SequenceSet* valid_set) {
    config.validate();
    if (train_set.size() == 0) throw std::invalid_argument("train: empty training set");
    if (train_set.sequence_length() != static_cast<std::size_t>(config.sequence_length)) {
        throw std::invalid_argument("train: sequence set width " +
                                    std::to_string(train_set.sequence_length()) +
                                    " does not match config sequence_length " +
                                    std::to_string(config.sequence_length));
    }

    TrainResult result;
    result.params = init_params(config);
    result.constant_targets =
        std::all_of(train_set.targets.begin(), train_set.targets.end(),
                    [&](double v) { return v == train_set.targets.front(); });

    AdamState adam = AdamState::like(result.params);
    const bool has_valid = valid_set != nullptr && valid_set->size() > 0;

    const auto record = [&](int epoch) {
        TrainTracePoint pt;
        pt.epoch = epoch;
        pt.train_loss = exact_loss(result.params, train_set, config.loss_choice);
        pt.valid_loss = has_valid ? exact_loss(result.params, *valid_set, config.loss_choice)
                                  : std::numeric_limits<double>::quiet_NaN();
        result.trace.push_back(pt);
    };
    record(0);

    const std::span<const double> targets(train_set.targets);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const std::uint64_t mask_seed =
            derive_seed(config.seed, 0x6d61736bULL, static_cast<std::uint64_t>(epoch));
        const auto fwd =
            forward(result.params, train_set, RunMode::kTrain, config.dropout_rate, mask_seed);
        const std::span<const double> forecasts(fwd.forecasts.data(),
                                                static_cast<std::size_t>(fwd.forecasts.size()));
        const std::vector<double> upstream =
            config.loss_choice == LossChoice::kMadl
                ? madl_smooth_grad(targets, forecasts, config.surrogate_steepness)
                : mae_subgrad(targets, forecasts);
        const Eigen::Map<const Eigen::VectorXd> upstream_vec(
            upstream.data(), static_cast<Eigen::Index>(upstream.size()));
        auto grads = backward(result.params, fwd.cache, upstream_vec, config.l2_coefficient);
        clip_grad_norm(grads, config.grad_clip_norm);
        adam_step(result.params, grads, adam, config.learning_rate);
        record(epoch);
    }
    return result;
}

GridSearchResult grid_search(const std::vector<NetworkConfig>& grid, const SequenceSet& train_set,
                             const SequenceSet& valid_set, LossChoice selection_loss) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
    if (valid_set.size() == 0) throw std::invalid_argument("grid_search: empty validation set");

    GridSearchResult result;
    result.scores.reserve(grid.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto trained = train(grid[i], train_set, nullptr);
        const double score = exact_loss(trained.params, valid_set, selection_loss);
        result.scores.push_back(score);
        if (score < best) {
            best = score;
            result.best_index = i;
        }
    }
    result.best_config = grid[result.best_index];
    return result;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     std::uint64_t config_hash) {
    nlohmann::json j;
    j["format"] = "madl-checkpoint";
    j["version"] = 1;
    j["config_hash"] = config_hash;
    j["head_bias"] = params.head_bias;
    j["head_weight"] = std::vector<double>(params.head_weight.data(),
                                           params.head_weight.data() + params.head_weight.size());
    auto& layers = j["layers"] = nlohmann::json::array();
    for (const auto& layer : params.layers) {
        nlohmann::json lj;
        lj["input_dim"] = layer.input_dim();
        lj["hidden"] = layer.hidden_size();
        const auto dump = [](const auto& m) {
            return std::vector<double>(m.data(), m.data() + m.size());
        };
        for (int g = 0; g < kNumGates; ++g) {
            lj["w_in"].push_back(dump(layer.w_in[g]));
            lj["w_rec"].push_back(dump(layer.w_rec[g]));
            lj["bias"].push_back(dump(layer.bias[g]));
        }
        layers.push_back(std::move(lj));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << j.dump(2) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path, std::uint64_t* config_hash) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "madl-checkpoint" || j.value("version", 0) != 1) {
        throw std::runtime_error("unrecognized checkpoint format: " + path.string());
    }
    if (config_hash != nullptr) *config_hash = j.at("config_hash").get<std::uint64_t>();

    ModelParams params;
    for (const auto& lj : j.at("layers")) {
        LstmLayerParams layer;
        const auto d = lj.at("input_dim").get<Eigen::Index>();
        const auto h = lj.at("hidden").get<Eigen::Index>();
        for (int g = 0; g < kNumGates; ++g) {
            const auto w_in = lj.at("w_in").at(g).get<std::vector<double>>();
            const auto w_rec = lj.at("w_rec").at(g).get<std::vector<double>>();
            const auto bias = lj.at("bias").at(g).get<std::vector<double>>();
            if (w_in.size() != static_cast<std::size_t>(d * h) ||
                w_rec.size() != static_cast<std::size_t>(h * h) ||
                bias.size() != static_cast<std::size_t>(h)) {
                throw std::runtime_error("checkpoint tensor size mismatch: " + path.string());
            }
            layer.w_in[g] = Eigen::Map<const Eigen::MatrixXd>(w_in.data(), d, h);
            layer.w_rec[g] = Eigen::Map<const Eigen::MatrixXd>(w_rec.data(), h, h);
            layer.bias[g] = Eigen::Map<const Eigen::VectorXd>(bias.data(), h);
        }
        params.layers.push_back(std::move(layer));
    }
    const auto head = j.at("head_weight").get<std::vector<double>>();
    params.head_weight =
        Eigen::Map<const Eigen::VectorXd>(head.data(), static_cast<Eigen::Index>(head.size()));
    params.head_bias = j.at("head_bias").get<double>();
    return params;
}

}  // namespace madlab
