#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "madl/losses.hpp"
#include "madl/market_data.hpp"

namespace madlab {

struct NetworkConfig {
    std::vector<int> layer_sizes{8, 4};  // hidden units per LSTM layer
    int sequence_length = 10;
    double dropout_rate = 0.0;
    double l2_coefficient = 0.0;
    double learning_rate = 0.01;
    int epochs = 100;
    int batch_size = 0;  // informational: training always runs full-batch
    LossChoice loss_choice = LossChoice::kMadl;
    double surrogate_steepness = 100.0;
    double grad_clip_norm = 5.0;  // global norm; <= 0 disables clipping
    std::uint64_t seed = 42;

    void validate() const;  // throws std::invalid_argument
};

inline constexpr int kNumGates = 4;
enum GateIndex { kGateInput = 0, kGateForget = 1, kGateCell = 2, kGateOutput = 3 };

// One stacked-LSTM layer: per-gate input weights (input_dim x hidden),
// recurrent weights (hidden x hidden) and biases (hidden).
struct LstmLayerParams {
    std::array<Eigen::MatrixXd, kNumGates> w_in;
    std::array<Eigen::MatrixXd, kNumGates> w_rec;
    std::array<Eigen::VectorXd, kNumGates> bias;

    Eigen::Index input_dim() const { return w_in[kGateInput].rows(); }
    Eigen::Index hidden_size() const { return w_in[kGateInput].cols(); }
};

// Full model: stacked LSTM layers plus a linear many-to-one head.
struct ModelParams {
    std::vector<LstmLayerParams> layers;
    Eigen::VectorXd head_weight;  // last hidden -> 1
    double head_bias = 0.0;
};

// Gradients share the parameter layout.
using ModelGradients = ModelParams;

ModelParams zeros_like(const ModelParams& params);

struct AdamState {
    ModelParams m;  // first-moment accumulators
    ModelParams v;  // second-moment accumulators
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState like(const ModelParams& params);
};

enum class RunMode { kTrain, kInfer };

struct LayerCache {
    std::vector<Eigen::MatrixXd> input;  // per step: batch x input_dim
    std::array<std::vector<Eigen::MatrixXd>, kNumGates> gate;  // activated gate values
    std::vector<Eigen::MatrixXd> cell;
    std::vector<Eigen::MatrixXd> cell_tanh;
    std::vector<Eigen::MatrixXd> hidden;  // pre-dropout h_t
    std::vector<Eigen::MatrixXd> mask;    // inverted-dropout factors; empty if unused
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Eigen::MatrixXd head_input;  // batch x last hidden, final step, post-dropout
    RunMode mode = RunMode::kInfer;
    Eigen::Index batch = 0;
    Eigen::Index steps = 0;
};

// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, forget-gate bias 1.0,
// all other biases 0. Fully determined by config.seed.
ModelParams init_params(const NetworkConfig& config);

struct ForwardResult {
    Eigen::VectorXd forecasts;  // one per sequence
    ForwardCache cache;
};

// Standard LSTM recurrences with sigmoid gates and tanh cell/candidate,
// zero initial states, many-to-one linear head on the last layer's final
// hidden state. Train mode applies inverted dropout to every layer's output
// sequence; masks are fully determined by dropout_mask_seed.
ForwardResult forward(const ModelParams& params, const SequenceSet& batch, RunMode mode,
                      double dropout_rate = 0.0, std::uint64_t dropout_mask_seed = 0);

// Exact gradients of (loss + l2 * sum of squared weights) through BPTT,
// including the dropout masks captured in the cache. Biases and the head
// bias are excluded from the L2 term.
ModelGradients backward(const ModelParams& params, const ForwardCache& cache,
                        const Eigen::VectorXd& dloss_dforecast, double l2_coefficient);

// Adam with bias correction; advances state.step even for zero gradients.
void adam_step(ModelParams& params, const ModelGradients& grads, AdamState& state,
               double learning_rate);

double global_grad_norm(const ModelGradients& grads);
void clip_grad_norm(ModelGradients& grads, double max_norm);

struct TrainTracePoint {
    int epoch = 0;            // 0 = initial parameters, before any update
    double train_loss = 0.0;  // exact loss (per loss_choice) on the training set
    double valid_loss = 0.0;  // NaN when no validation set was given
};

struct TrainResult {
    ModelParams params;
    std::vector<TrainTracePoint> trace;
    bool constant_targets = false;  // degenerate-input warning flag
};

// Full-batch gradient descent: smooth-MADL surrogate or MAE per
// config.loss_choice for the updates, exact loss for the trace. Seed
// deterministic: identical (config, data) reproduce identical traces.
TrainResult train(const NetworkConfig& config, const SequenceSet& train_set,
                  const SequenceSet* valid_set = nullptr);

struct GridSearchResult {
    std::size_t best_index = 0;
    NetworkConfig best_config;
    std::vector<double> scores;  // exact selection loss per candidate
};

// Trains every candidate on train_set and scores the exact selection loss on
// valid_set; returns the argmin, ties broken by earliest grid order.
GridSearchResult grid_search(const std::vector<NetworkConfig>& grid, const SequenceSet& train_set,
                             const SequenceSet& valid_set, LossChoice selection_loss);

// Versioned JSON checkpoint; doubles round-trip exactly.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     std::uint64_t config_hash);
ModelParams load_checkpoint(const std::filesystem::path& path,
                            std::uint64_t* config_hash = nullptr);

}  // namespace madlab
