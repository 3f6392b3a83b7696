#pragma once

#include <cstdint>

namespace ddl {

/// Inputs of the closed-form estimator-quality model.
struct AnalysisParams {
    int K = 10;
    double n = 1e4;
    /// Aggregate variance factor, 0 < fK <= 2.
    double fK = 1.0;

    void validate() const;
};

/// Mean squared error of the DDL estimate as a function of the split
/// alpha = m/n, without its alpha-independent constant:
///
///   K^2 log2^2(a) / (2 n^2 (1-a)^2) + fK / (n (1-a)) - K log2(a) / (2 n^2 (1-a))
double mse_alpha(double alpha, const AnalysisParams& p);

/// Analytic d mse_alpha / d alpha.
double mse_alpha_derivative(double alpha, const AnalysisParams& p);

/// Principal branch W0, z >= -1/e. Halley iteration.
double lambert_w(double z);

struct OptimalAlpha {
    /// Stationary point of mse_alpha (refined by bracketed root finding on the derivative).
    double alpha = 0.0;
    /// Lambert-W closed form 2K^2 W(n fK ln2 ln4 / 2K^2) / (n fK ln2 ln4).
    double closed_form = 0.0;
    /// Large-n limit 2K^2 ln(n) / (fK ln2 ln4 n).
    double asymptotic = 0.0;
    /// Closed form reached 1 and was clamped.
    bool saturated = false;
};

OptimalAlpha optimal_alpha(const AnalysisParams& p);

double optimal_alpha_closed_form(const AnalysisParams& p);
double optimal_alpha_asymptotic(const AnalysisParams& p);

/// Leading bias of the DDL estimate, K / (2 (n - m)) * log2(n / m). Requires 0 < m < n.
double ddl_bias_term(std::int64_t n, std::int64_t m, int K);

} // namespace ddl
