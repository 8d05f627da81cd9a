#include "madl/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace madlab {

namespace {

// Continued-fraction core of the regularized incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;
    constexpr int kMaxIter = 1000;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_two_sided_p(double t, double df) {
    if (!(df >= 1.0)) {
        throw std::invalid_argument("degrees of freedom must be >= 1, got " + std::to_string(df));
    }
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    // P(|T| > t) = I_x(df/2, 1/2)
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

RegressionResult ols_simple(std::span<const double> y, std::span<const double> x) {
    if (y.size() != x.size()) {
        throw std::invalid_argument("ols_simple: length mismatch " + std::to_string(y.size()) +
                                    " vs " + std::to_string(x.size()));
    }
    const std::size_t n = y.size();
    if (n < 3) {
        throw std::invalid_argument("ols_simple: need at least 3 observations, got " +
                                    std::to_string(n));
    }
    const double dn = static_cast<double>(n);
    double x_mean = 0.0;
    double y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x_mean += x[i];
        y_mean += y[i];
    }
    x_mean /= dn;
    y_mean /= dn;

    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - x_mean;
        sxx += dx * dx;
        sxy += dx * (y[i] - y_mean);
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("ols_simple: regressor is constant");
    }

    RegressionResult r;
    r.n = n;
    r.beta = sxy / sxx;
    r.alpha = y_mean - r.beta * x_mean;

    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double resid = y[i] - r.alpha - r.beta * x[i];
        ssr += resid * resid;
    }
    r.residual_variance = ssr / (dn - 2.0);

    const double df = dn - 2.0;
    r.beta_se = std::sqrt(r.residual_variance / sxx);
    r.alpha_se = std::sqrt(r.residual_variance * (1.0 / dn + x_mean * x_mean / sxx));

    const auto t_and_p = [df](double estimate, double se, double& t_out, double& p_out) {
        if (se > 0.0) {
            t_out = estimate / se;
            p_out = student_t_two_sided_p(t_out, df);
        } else if (estimate == 0.0) {
            t_out = 0.0;
            p_out = 1.0;
        } else {
            t_out = estimate > 0.0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
            p_out = 0.0;
        }
    };
    t_and_p(r.alpha, r.alpha_se, r.alpha_t, r.alpha_p);
    t_and_p(r.beta, r.beta_se, r.beta_t, r.beta_p);
    return r;
}

std::vector<std::pair<std::string, RegressionResult>> strategy_regressions(
    std::span<const double> benchmark, const std::vector<NamedSeries>& strategies,
    bool benchmark_on_strategy) {
    std::vector<std::pair<std::string, RegressionResult>> out;
    out.reserve(strategies.size());
    for (const auto& strat : strategies) {
        if (strat.values.size() != benchmark.size()) {
            throw std::invalid_argument("strategy '" + strat.name +
                                        "' not aligned with benchmark: " +
                                        std::to_string(strat.values.size()) + " vs " +
                                        std::to_string(benchmark.size()));
        }
        const std::span<const double> s(strat.values);
        const auto result =
            benchmark_on_strategy ? ols_simple(benchmark, s) : ols_simple(s, benchmark);
        out.emplace_back(strat.name, result);
    }
    return out;
}

}  // namespace madlab
