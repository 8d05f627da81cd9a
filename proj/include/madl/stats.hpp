#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace madlab {

struct RegressionResult {
    double alpha = 0.0;
    double beta = 0.0;
    double alpha_se = 0.0;
    double beta_se = 0.0;
    double alpha_t = 0.0;
    double beta_t = 0.0;
    double alpha_p = 1.0;
    double beta_p = 1.0;
    std::size_t n = 0;
    double residual_variance = 0.0;
};

// Closed-form OLS of y on x with homoskedastic standard errors. Residual
// variance uses n-2 degrees of freedom; p-values are two-sided Student-t.
RegressionResult ols_simple(std::span<const double> y, std::span<const double> x);

// 2 * (1 - CDF(|t|)) for Student-t with df degrees of freedom, evaluated via
// the regularized incomplete beta function.
double student_t_two_sided_p(double t, double df);

struct NamedSeries {
    std::string name;
    std::vector<double> values;
};

// One regression per strategy. With benchmark_on_strategy=true the benchmark
// returns are the response and the strategy returns the regressor; false
// swaps them.
std::vector<std::pair<std::string, RegressionResult>> strategy_regressions(
    std::span<const double> benchmark, const std::vector<NamedSeries>& strategies,
    bool benchmark_on_strategy = true);

}  // namespace madlab
