#pragma once

#include <span>
#include <string>
#include <vector>

#include "madl/date.hpp"

namespace madlab {

enum class LossChoice { kMadl, kMae };

std::string to_string(LossChoice loss);
LossChoice loss_choice_from_string(const std::string& name);

// Model-predicted next-period returns aligned to the realized returns they
// are scored against.
struct ForecastSeries {
    std::vector<double> values;
    std::vector<Date> dates;

    std::size_t size() const { return values.size(); }
};

// Three-valued sign: -1, 0, +1.
inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Mean absolute directional loss:
//   (1/N) * sum_i (-1) * sign(R_i * Rhat_i) * |R_i|
// Negative values mean the forecast directions capture realized returns.
double madl(std::span<const double> realized, std::span<const double> predicted);

// Algebraically identical form -(1/N) * sum_i sign(Rhat_i) * R_i.
double madl_sign_form(std::span<const double> realized, std::span<const double> predicted);

// Differentiable surrogate -(1/N) * sum_i tanh(k * Rhat_i) * R_i. Converges
// to madl_sign_form as k grows, for forecasts bounded away from zero. Used
// only inside gradient descent; exact madl is used for scoring/selection.
double madl_smooth(std::span<const double> realized, std::span<const double> predicted,
                   double steepness);

// d(madl_smooth)/d(Rhat_i) = -(1/N) * k * (1 - tanh^2(k * Rhat_i)) * R_i.
std::vector<double> madl_smooth_grad(std::span<const double> realized,
                                     std::span<const double> predicted, double steepness);

// Mean absolute error and its subgradient sign(Rhat_i - R_i) / N (0 at ties).
double mae(std::span<const double> realized, std::span<const double> predicted);
std::vector<double> mae_subgrad(std::span<const double> realized,
                                std::span<const double> predicted);

// One single-observation case where MAE and MADL rank two forecasts in
// opposite order: MAE prefers forecast_a, MADL prefers forecast_b.
struct DivergenceCase {
    double realized;
    double forecast_a;
    double forecast_b;
    double mae_a;
    double mae_b;
    double madl_a;
    double madl_b;
};

// Constructed ranking-flip cases, scored through the public madl/mae ops.
std::vector<DivergenceCase> divergence_case_catalog();

}  // namespace madlab
