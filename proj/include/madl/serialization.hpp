#pragma once

#include <json.hpp>

#include "madl/experiment.hpp"

namespace madlab {

NLOHMANN_JSON_SERIALIZE_ENUM(LossChoice, {
                                             {LossChoice::kMadl, "MADL"},
                                             {LossChoice::kMae, "MAE"},
                                         })

void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);

void to_json(nlohmann::json& j, const AssetInput& a);
void from_json(const nlohmann::json& j, AssetInput& a);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

void to_json(nlohmann::json& j, const MetricsReport& m);
void from_json(const nlohmann::json& j, MetricsReport& m);

void to_json(nlohmann::json& j, const RegressionResult& r);
void from_json(const nlohmann::json& j, RegressionResult& r);

void to_json(nlohmann::json& j, const StrategyResult& s);
void from_json(const nlohmann::json& j, StrategyResult& s);

void to_json(nlohmann::json& j, const ExperimentResult& r);
void from_json(const nlohmann::json& j, ExperimentResult& r);

void to_json(nlohmann::json& j, const LossMatrixResult& r);
void from_json(const nlohmann::json& j, LossMatrixResult& r);

// FNV-1a over the canonical JSON form of the config.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace madlab
