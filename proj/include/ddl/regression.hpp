#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddl/data.hpp"
#include "ddl/discrete.hpp"
#include "ddl/selection.hpp"

namespace ddl {

/// Floor on the plug-in noise variance.
inline constexpr double kSigma2Min = 1e-6;

/// Polynomial order and ridge penalty.
struct RegCandidate {
    int order = 0;
    double lambda = 0.0;
};

/// (1, x, x^2, ..., x^M).
Eigen::VectorXd poly_features(double x, int order);

/// Plug-in Gaussian predictor: polynomial weights (raw monomial basis) and noise variance.
struct PolyFit {
    Eigen::VectorXd weights;
    double sigma2 = 1.0;
    double rss = 0.0;
    std::size_t count = 0;

    [[nodiscard]] double predict(double x) const;
};

/// -log2 of the N(mean, sigma2) density at y.
double gaussian_bits(double y, double mean, double sigma2);

/// Smallest prefix for which predictive coding is allowed: max(M + 6, 10).
std::size_t min_prefix(int order);

/// Ridge fit on the given samples. Noise variance max(rss / max(count - d, 1), kSigma2Min).
PolyFit fit_poly(const RegressionDataset& data, const RegCandidate& candidate);
PolyFit fit_poly(const RegressionDataset& data, const RegCandidate& candidate, std::span<const std::size_t> rows);

/// Sequential plug-in Gaussian code of targets m..n-1; sample i is coded with
/// the ridge fit on samples 0..i-1. Bits are differential (quantization omitted)
/// and may be negative.
CodelengthTrace predictive_codelength(const RegressionDataset& data, const RegCandidate& candidate, std::size_t m);

/// Same pass, also returning the fit on all n samples.
CodelengthTrace predictive_codelength(const RegressionDataset& data, const RegCandidate& candidate, std::size_t m,
                                      PolyFit& full_fit);

/// -log2 P(y | x; ML fit, ML variance rss/n) + (d/2) log2 n with d = M + 1.
double two_part_mdl(const RegressionDataset& data, int order);

struct CvResult {
    double score_bits = 0.0;
    PolyFit fit;
};

/// Single random hold-out split; fits on the rest and returns the mean held-out bits.
CvResult cv_score(const RegressionDataset& data, const RegCandidate& candidate, double holdout_fraction,
                  std::uint64_t seed);

/// Log marginal likelihood (bits) of the Gaussian-linear model with prior
/// precision alpha on the raw coefficients and noise precision beta.
double log_evidence_bits(const RegressionDataset& data, int order, double alpha, double beta);

/// Negated log evidence (bits) per lambda with alpha = lambda * beta_hat and
/// beta_hat = n / rss of the lambda-regularized fit.
std::vector<double> bayes_evidence_score(const RegressionDataset& data, int order,
                                         std::span<const double> lambda_grid);

/// Expected log-loss (bits) of N(w^T phi(x), sigma2) against the sine source with
/// x ~ U[-2, 2], by composite Simpson quadrature on `nodes` points.
double oracle_generalization(const Eigen::VectorXd& weights, double sigma2, double noise_variance,
                             std::size_t nodes = 10001);

enum class RegMethod { ddl, cv, mdl2part, bayes };

std::string to_string(RegMethod m);
RegMethod parse_reg_method(const std::string& name);

struct RegressionOptions {
    double alpha = 0.5;
    double holdout_fraction = 0.25;
    std::uint64_t cv_seed = 0;
    std::size_t quadrature_nodes = 10001;
};

/// Scores every candidate with every method, picks argmins and computes regret
/// against the best full-data refit.
SelectionReport select(const RegressionDataset& data, std::span<const RegCandidate> grid,
                       std::span<const RegMethod> methods, const RegressionOptions& options = {});

} // namespace ddl
