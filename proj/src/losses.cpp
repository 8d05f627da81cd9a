#include "madl/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace madlab {

namespace {

void check_pair(std::span<const double> realized, std::span<const double> predicted) {
    if (realized.size() != predicted.size()) {
        throw std::invalid_argument("realized/predicted length mismatch: " +
                                    std::to_string(realized.size()) + " vs " +
                                    std::to_string(predicted.size()));
    }
    if (realized.empty()) {
        throw std::invalid_argument("empty input");
    }
}

void check_steepness(double k) {
    if (!(k > 0.0)) {
        throw std::invalid_argument("surrogate steepness must be positive, got " +
                                    std::to_string(k));
    }
}

}  // namespace

std::string to_string(LossChoice loss) {
    return loss == LossChoice::kMadl ? "MADL" : "MAE";
}

LossChoice loss_choice_from_string(const std::string& name) {
    if (name == "MADL" || name == "madl") return LossChoice::kMadl;
    if (name == "MAE" || name == "mae") return LossChoice::kMae;
    throw std::invalid_argument("unknown loss '" + name + "' (expected MADL or MAE)");
}

double madl(std::span<const double> realized, std::span<const double> predicted) {
    check_pair(realized, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < realized.size(); ++i) {
        // sign(R * Rhat) evaluated as sign(R) * sign(Rhat): the mathematical
        // sign of the product, immune to underflow of the product itself.
        sum += -1.0 * sign(realized[i]) * sign(predicted[i]) * std::fabs(realized[i]);
    }
    return sum / static_cast<double>(realized.size());
}

double madl_sign_form(std::span<const double> realized, std::span<const double> predicted) {
    check_pair(realized, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < realized.size(); ++i) {
        sum += -1.0 * sign(predicted[i]) * realized[i];
    }
    return sum / static_cast<double>(realized.size());
}

double madl_smooth(std::span<const double> realized, std::span<const double> predicted,
                   double steepness) {
    check_pair(realized, predicted);
    check_steepness(steepness);
    double sum = 0.0;
    for (std::size_t i = 0; i < realized.size(); ++i) {
        sum += -std::tanh(steepness * predicted[i]) * realized[i];
    }
    return sum / static_cast<double>(realized.size());
}

std::vector<double> madl_smooth_grad(std::span<const double> realized,
                                     std::span<const double> predicted, double steepness) {
    check_pair(realized, predicted);
    check_steepness(steepness);
    const double inv_n = 1.0 / static_cast<double>(realized.size());
    std::vector<double> grad(realized.size());
    for (std::size_t i = 0; i < realized.size(); ++i) {
        const double t = std::tanh(steepness * predicted[i]);
        grad[i] = -inv_n * steepness * (1.0 - t * t) * realized[i];
    }
    return grad;
}

double mae(std::span<const double> realized, std::span<const double> predicted) {
    check_pair(realized, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < realized.size(); ++i) {
        sum += std::fabs(predicted[i] - realized[i]);
    }
    return sum / static_cast<double>(realized.size());
}

std::vector<double> mae_subgrad(std::span<const double> realized,
                                std::span<const double> predicted) {
    check_pair(realized, predicted);
    const double inv_n = 1.0 / static_cast<double>(realized.size());
    std::vector<double> grad(realized.size());
    for (std::size_t i = 0; i < realized.size(); ++i) {
        grad[i] = sign(predicted[i] - realized[i]) * inv_n;
    }
    return grad;
}

std::vector<DivergenceCase> divergence_case_catalog() {
    // (R, a, b) built so |a - R| < |b - R| while a misses the direction of R
    // and b gets it right: MAE ranks a ahead, MADL ranks b ahead.
    static constexpr double kTriples[][3] = {
        {0.01, -0.0001, 0.05},   // tiny wrong-sign miss vs large right-sign overshoot
        {-0.02, 0.001, -0.08},   // negative day: short signal wins under MADL
        {0.03, -0.002, 0.10},    // same flip at a larger realized move
        {0.005, -0.0005, 0.09},  // small move, forecast magnitudes far apart
        {-0.04, 0.01, -0.20},    // deep short vs near-zero long
    };
    std::vector<DivergenceCase> cases;
    cases.reserve(std::size(kTriples));
    for (const auto& t : kTriples) {
        DivergenceCase c;
        c.realized = t[0];
        c.forecast_a = t[1];
        c.forecast_b = t[2];
        const std::span<const double> r(&c.realized, 1);
        c.mae_a = mae(r, std::span<const double>(&c.forecast_a, 1));
        c.mae_b = mae(r, std::span<const double>(&c.forecast_b, 1));
        c.madl_a = madl(r, std::span<const double>(&c.forecast_a, 1));
        c.madl_b = madl(r, std::span<const double>(&c.forecast_b, 1));
        cases.push_back(c);
    }
    return cases;
}

}  // namespace madlab
