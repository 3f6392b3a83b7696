#include "ddl/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ddl/errors.hpp"
#include "ddl/rls.hpp"
#include "ddl/rng.hpp"

namespace ddl {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Inputs live in [-2, 2]. Fitting runs on (x / 2)^j with the ridge penalty
// rescaled to lambda / 4^j, which is the same model as raw monomials with
// penalty lambda ||w||^2 but with unit-scale columns.
constexpr double kInputScale = 2.0;

Eigen::VectorXd scaled_features(double x, int order) {
    Eigen::VectorXd phi(order + 1);
    const double u = x / kInputScale;
    double v = 1.0;
    for (int j = 0; j <= order; ++j) {
        phi(j) = v;
        v *= u;
    }
    return phi;
}

Eigen::VectorXd scaled_penalty(int order, double lambda) {
    Eigen::VectorXd pen(order + 1);
    for (int j = 0; j <= order; ++j) pen(j) = std::ldexp(lambda, -2 * j);
    return pen;
}

Eigen::VectorXd to_raw(const Eigen::VectorXd& scaled) {
    Eigen::VectorXd raw(scaled.size());
    for (Eigen::Index j = 0; j < scaled.size(); ++j) raw(j) = std::ldexp(scaled(j), -static_cast<int>(j));
    return raw;
}

void check_candidate(const RegCandidate& c) {
    if (c.order < 0) throw ConfigError("regression: polynomial order must be nonnegative");
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ConfigError("regression: lambda must be finite and >= 0");
}

double plugin_variance(double rss, std::size_t count, int order) {
    const double dof = std::max(static_cast<double>(count) - static_cast<double>(order + 1), 1.0);
    return std::max(rss / dof, kSigma2Min);
}

double rss_at(const RlsState<double>& state, const Eigen::VectorXd& w) {
    return std::max(0.0, state.objective() - (state.penalty().array() * w.array().square()).sum());
}

PolyFit to_poly_fit(const RlsState<double>& state, int order) {
    PolyFit fit;
    const Eigen::VectorXd w = state.weights();
    fit.rss = rss_at(state, w);
    fit.weights = to_raw(w);
    fit.count = static_cast<std::size_t>(state.count());
    fit.sigma2 = plugin_variance(fit.rss, fit.count, order);
    return fit;
}

} // namespace

Eigen::VectorXd poly_features(double x, int order) {
    if (order < 0) throw ConfigError("poly_features: order must be nonnegative");
    Eigen::VectorXd phi(order + 1);
    double v = 1.0;
    for (int j = 0; j <= order; ++j) {
        phi(j) = v;
        v *= x;
    }
    return phi;
}

double PolyFit::predict(double x) const {
    double acc = 0.0;
    for (Eigen::Index j = weights.size() - 1; j >= 0; --j) acc = acc * x + weights(j);
    return acc;
}

double gaussian_bits(double y, double mean, double sigma2) {
    const double r = y - mean;
    return 0.5 * std::log2(2.0 * std::numbers::pi * sigma2) + r * r / (2.0 * sigma2 * kLn2);
}

std::size_t min_prefix(int order) { return static_cast<std::size_t>(std::max(order + 6, 10)); }

PolyFit fit_poly(const RegressionDataset& data, const RegCandidate& candidate) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    return fit_poly(data, candidate, rows);
}

PolyFit fit_poly(const RegressionDataset& data, const RegCandidate& candidate, std::span<const std::size_t> rows) {
    data.validate();
    check_candidate(candidate);
    RlsState<double> state(scaled_penalty(candidate.order, candidate.lambda));
    for (std::size_t r : rows) {
        const auto i = static_cast<Eigen::Index>(r);
        state.update(scaled_features(data.inputs(i), candidate.order), data.targets(i));
    }
    return to_poly_fit(state, candidate.order);
}

CodelengthTrace predictive_codelength(const RegressionDataset& data, const RegCandidate& candidate, std::size_t m) {
    PolyFit unused;
    return predictive_codelength(data, candidate, m, unused);
}

CodelengthTrace predictive_codelength(const RegressionDataset& data, const RegCandidate& candidate, std::size_t m,
                                      PolyFit& full_fit) {
    data.validate();
    check_candidate(candidate);
    const std::size_t n = data.size();
    if (m < min_prefix(candidate.order))
        throw ConfigError("predictive_codelength: prefix m=" + std::to_string(m) + " is below the minimum " +
                          std::to_string(min_prefix(candidate.order)) + " for order " +
                          std::to_string(candidate.order));
    if (m > n) throw ConfigError("predictive_codelength: m exceeds n");

    RlsState<double> state(scaled_penalty(candidate.order, candidate.lambda));
    CodelengthTrace trace;
    trace.start_index = m;
    trace.per_sample_bits.reserve(n - m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd phi = scaled_features(data.inputs(row), candidate.order);
        if (i >= m) {
            const Eigen::VectorXd w = state.weights();
            const double sigma2 = plugin_variance(rss_at(state, w), i, candidate.order);
            const double bits = gaussian_bits(data.targets(row), phi.dot(w), sigma2);
            if (!std::isfinite(bits)) throw ComputationError("predictive_codelength: non-finite codelength at sample " + std::to_string(i));
            trace.per_sample_bits.push_back(bits);
            trace.total_bits += bits;
        }
        state.update(phi, data.targets(row));
    }
    full_fit = to_poly_fit(state, candidate.order);
    return trace;
}

double two_part_mdl(const RegressionDataset& data, int order) {
    const std::size_t n = data.size();
    const auto d = static_cast<std::size_t>(order + 1);
    if (order < 0) throw ConfigError("two_part_mdl: order must be nonnegative");
    if (n <= d) throw ConfigError("two_part_mdl: need more samples than coefficients");
    const PolyFit fit = fit_poly(data, {order, 0.0});
    const double nn = static_cast<double>(n);
    const double sigma2 = std::max(fit.rss / nn, kSigma2Min);
    const double fit_bits = 0.5 * nn * std::log2(2.0 * std::numbers::pi * sigma2) + fit.rss / (2.0 * sigma2 * kLn2);
    return fit_bits + 0.5 * static_cast<double>(d) * std::log2(nn);
}

CvResult cv_score(const RegressionDataset& data, const RegCandidate& candidate, double holdout_fraction,
                  std::uint64_t seed) {
    data.validate();
    check_candidate(candidate);
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw ConfigError("cv_score: holdout fraction must lie in (0, 1)");
    const std::size_t n = data.size();
    const auto held = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
    const std::size_t train = n - held;
    if (held == 0 || train < static_cast<std::size_t>(candidate.order) + 6)
        throw ConfigError("cv_score: split leaves " + std::to_string(train) + " training samples; need at least " +
                          std::to_string(candidate.order + 6) + " plus one held out");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    CounterRng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    CvResult out;
    out.fit = fit_poly(data, candidate, std::span<const std::size_t>(perm).first(train));
    double bits = 0.0;
    for (std::size_t k = train; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(perm[k]);
        bits += gaussian_bits(data.targets(i), out.fit.predict(data.inputs(i)), out.fit.sigma2);
    }
    out.score_bits = bits / static_cast<double>(held);
    return out;
}

double log_evidence_bits(const RegressionDataset& data, int order, double alpha, double beta) {
    data.validate();
    if (order < 0) throw ConfigError("log_evidence_bits: order must be nonnegative");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("log_evidence_bits: precisions must be positive");
    const std::size_t n = data.size();
    const int d = order + 1;
    if (n <= static_cast<std::size_t>(d)) throw ConfigError("log_evidence_bits: need more samples than coefficients");

    const double lambda = alpha / beta;
    RlsState<double> state(scaled_penalty(order, lambda));
    for (Eigen::Index i = 0; i < data.inputs.size(); ++i)
        state.update(scaled_features(data.inputs(i), order), data.targets(i));

    // E(m_N) = beta/2 (||t - Phi m||^2 + lambda ||m||^2) = beta/2 * regularized objective.
    const double energy = 0.5 * beta * state.objective();
    // log|A| = d log beta + log|Phi^T Phi + lambda I|; undo the column scaling (x/2)^j.
    const double log_det_raw = state.log_det_information() + 2.0 * kLn2 * (static_cast<double>(d) * (d - 1) / 2.0);
    const double log_det_a = static_cast<double>(d) * std::log(beta) + log_det_raw;
    const double nn = static_cast<double>(n);
    const double log_ev = 0.5 * d * std::log(alpha) + 0.5 * nn * std::log(beta) - energy - 0.5 * log_det_a -
                          0.5 * nn * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(log_ev)) throw ComputationError("log_evidence_bits: non-finite evidence");
    return log_ev / kLn2;
}

std::vector<double> bayes_evidence_score(const RegressionDataset& data, int order, std::span<const double> lambda_grid) {
    if (lambda_grid.empty()) throw ConfigError("bayes_evidence_score: empty lambda grid");
    std::vector<double> scores;
    scores.reserve(lambda_grid.size());
    const double nn = static_cast<double>(data.size());
    for (double lambda : lambda_grid) {
        if (!(lambda > 0.0)) throw ConfigError("bayes_evidence_score: lambda must be positive");
        const PolyFit fit = fit_poly(data, {order, lambda});
        const double beta = nn / std::max(fit.rss, nn * kSigma2Min);
        scores.push_back(-log_evidence_bits(data, order, lambda * beta, beta));
    }
    return scores;
}

double oracle_generalization(const Eigen::VectorXd& weights, double sigma2, double noise_variance, std::size_t nodes) {
    if (!(sigma2 > 0.0)) throw ConfigError("oracle_generalization: sigma2 must be positive");
    if (nodes < 3) nodes = 3;
    if (nodes % 2 == 0) ++nodes;
    PolyFit model;
    model.weights = weights;
    const double a = -2.0;
    const double h = 4.0 / static_cast<double>(nodes - 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
        const double x = a + h * static_cast<double>(k);
        const double e = std::sin(3.0 * x) - model.predict(x);
        const double wgt = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc += wgt * e * e;
    }
    const double mean_sq = acc * h / 3.0 / 4.0;
    return 0.5 * std::log2(2.0 * std::numbers::pi * sigma2) + (mean_sq + noise_variance) / (2.0 * sigma2 * kLn2);
}

std::string to_string(RegMethod m) {
    switch (m) {
    case RegMethod::ddl: return "ddl";
    case RegMethod::cv: return "cv";
    case RegMethod::mdl2part: return "mdl";
    case RegMethod::bayes: return "bayes";
    }
    return "unknown";
}

RegMethod parse_reg_method(const std::string& name) {
    if (name == "ddl") return RegMethod::ddl;
    if (name == "cv") return RegMethod::cv;
    if (name == "mdl" || name == "mdl2part") return RegMethod::mdl2part;
    if (name == "bayes") return RegMethod::bayes;
    throw ConfigError("unknown regression method '" + name + "'");
}

SelectionReport select(const RegressionDataset& data, std::span<const RegCandidate> grid,
                       std::span<const RegMethod> methods, const RegressionOptions& options) {
    data.validate();
    if (grid.empty()) throw ConfigError("select: empty candidate grid");
    if (methods.empty()) throw ConfigError("select: no methods");
    const std::size_t n = data.size();
    const bool lambda_grid = std::all_of(grid.begin(), grid.end(), [&](const RegCandidate& c) { return c.order == grid[0].order; });
    const bool needs_ddl = std::find(methods.begin(), methods.end(), RegMethod::ddl) != methods.end();

    SelectionReport report;
    report.candidate_name = lambda_grid ? "lambda" : "order";
    report.seed = options.cv_seed;

    std::vector<double> ddl_scores;
    std::vector<PolyFit> full_fits;
    for (const auto& c : grid) {
        report.candidates.push_back(lambda_grid ? c.lambda : static_cast<double>(c.order));
        PolyFit fit;
        if (needs_ddl) {
            const std::size_t m = DdlConfig{.alpha = options.alpha, .m = {}, .block_count = 1, .min_prefix = min_prefix(c.order)}.resolve(n);
            const auto trace = predictive_codelength(data, c, m, fit);
            ddl_scores.push_back(trace.total_bits / static_cast<double>(n - m));
        } else {
            fit = fit_poly(data, c);
        }
        report.reference_oracle.push_back(
            oracle_generalization(fit.weights, fit.sigma2, data.noise_variance, options.quadrature_nodes));
        full_fits.push_back(std::move(fit));
    }

    for (RegMethod method : methods) {
        std::vector<double> scores, oracle;
        switch (method) {
        case RegMethod::ddl:
            scores = ddl_scores;
            oracle = report.reference_oracle;
            break;
        case RegMethod::cv:
            for (const auto& c : grid) {
                const CvResult cv = cv_score(data, c, options.holdout_fraction, options.cv_seed);
                scores.push_back(cv.score_bits);
                oracle.push_back(oracle_generalization(cv.fit.weights, cv.fit.sigma2, data.noise_variance,
                                                       options.quadrature_nodes));
            }
            break;
        case RegMethod::mdl2part:
            for (const auto& c : grid) {
                if (c.lambda != 0.0) throw ConfigError("select: two-part MDL requires lambda = 0 candidates");
                scores.push_back(two_part_mdl(data, c.order));
            }
            oracle = report.reference_oracle;
            break;
        case RegMethod::bayes:
            for (const auto& c : grid) {
                const double l[1] = {c.lambda};
                scores.push_back(bayes_evidence_score(data, c.order, l).front());
            }
            oracle = report.reference_oracle;
            break;
        }
        report.add_method(to_string(method), std::move(scores), std::move(oracle));
    }
    return report;
}

} // namespace ddl
