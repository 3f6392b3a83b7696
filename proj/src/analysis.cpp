#include "ddl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ddl/errors.hpp"

namespace ddl {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("mse_alpha: alpha must lie in (0, 1)");
}

/// n fK ln2 ln4 / (2 K^2)
double lambert_argument_scale(const AnalysisParams& p) {
    return p.fK * kLn2 * (2.0 * kLn2) / (2.0 * static_cast<double>(p.K) * static_cast<double>(p.K));
}

} // namespace

void AnalysisParams::validate() const {
    if (K < 1) throw ConfigError("AnalysisParams: K must be at least 1");
    if (!(n >= 2.0)) throw ConfigError("AnalysisParams: n must be at least 2");
    if (!(fK > 0.0 && fK <= 2.0)) throw ConfigError("AnalysisParams: fK must lie in (0, 2]");
}

double mse_alpha(double alpha, const AnalysisParams& p) {
    p.validate();
    check_alpha(alpha);
    const double K = p.K;
    const double n = p.n;
    const double L = std::log2(alpha);
    const double q = 1.0 - alpha;
    return K * K * L * L / (2.0 * n * n * q * q) + p.fK / (n * q) - K * L / (2.0 * n * n * q);
}

double mse_alpha_derivative(double alpha, const AnalysisParams& p) {
    p.validate();
    check_alpha(alpha);
    const double K = p.K;
    const double n = p.n;
    const double L = std::log2(alpha);
    const double dL = 1.0 / (alpha * kLn2);
    const double q = 1.0 - alpha;
    const double d_first = K * K / (2.0 * n * n) * (2.0 * L * dL / (q * q) + 2.0 * L * L / (q * q * q));
    const double d_second = p.fK / (n * q * q);
    const double d_third = -K / (2.0 * n * n) * (dL / q + L / (q * q));
    return d_first + d_second + d_third;
}

double lambert_w(double z) {
    constexpr double kBranch = -1.0 / std::numbers::e;
    if (std::isnan(z) || z < kBranch - 1e-15) throw ConfigError("lambert_w: argument below -1/e");
    if (z == 0.0) return 0.0;
    if (z <= kBranch + 1e-15) return -1.0;
    if (std::isinf(z)) return z;

    double w;
    if (z < -0.25) {
        const double p = std::sqrt(2.0 * (std::numbers::e * z + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (z <= std::numbers::e) {
        w = std::log1p(z) * (1.0 - 0.25 * std::log1p(z) / (1.0 + std::log1p(z)));
    } else {
        const double l1 = std::log(z);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
    }
    return w;
}

double optimal_alpha_closed_form(const AnalysisParams& p) {
    p.validate();
    const double z = p.n * lambert_argument_scale(p);
    return lambert_w(z) / z;
}

double optimal_alpha_asymptotic(const AnalysisParams& p) {
    p.validate();
    return std::log(p.n) / (p.n * lambert_argument_scale(p));
}

OptimalAlpha optimal_alpha(const AnalysisParams& p) {
    p.validate();
    OptimalAlpha out;
    out.closed_form = optimal_alpha_closed_form(p);
    out.asymptotic = optimal_alpha_asymptotic(p);
    if (out.closed_form >= 1.0) {
        out.saturated = true;
        out.closed_form = std::nextafter(1.0, 0.0);
    }

    // The closed form solves only the leading-order stationarity condition, so
    // bracket the exact root of the derivative and bisect to full precision.
    double lo = 1e-12;
    double hi = 1.0 - 1e-12;
    if (!(mse_alpha_derivative(lo, p) < 0.0) || !(mse_alpha_derivative(hi, p) > 0.0))
        throw ComputationError("optimal_alpha: derivative does not change sign on (0, 1)");
    const double guess = std::clamp(out.closed_form, lo, hi);
    (mse_alpha_derivative(guess, p) < 0.0 ? lo : hi) = guess;
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mse_alpha_derivative(mid, p) < 0.0 ? lo : hi) = mid;
    }
    out.alpha = 0.5 * (lo + hi);
    return out;
}

double ddl_bias_term(std::int64_t n, std::int64_t m, int K) {
    if (!(m > 0 && m < n)) throw ConfigError("ddl_bias_term: requires 0 < m < n");
    return static_cast<double>(K) / (2.0 * static_cast<double>(n - m)) *
           std::log2(static_cast<double>(n) / static_cast<double>(m));
}

} // namespace ddl
