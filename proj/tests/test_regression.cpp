#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "ddl/errors.hpp"
#include "ddl/regression.hpp"

using namespace ddl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Raw-monomial ridge by normal equations; fine for low orders.
VectorXd normal_eq(const RegressionDataset& d, int order, double lambda, std::size_t rows) {
    MatrixXd X(rows, order + 1);
    for (std::size_t i = 0; i < rows; ++i) X.row(i) = poly_features(d.inputs(i), order).transpose();
    const MatrixXd A = X.transpose() * X + lambda * MatrixXd::Identity(order + 1, order + 1);
    return A.ldlt().solve(X.transpose() * d.targets.head(rows));
}

double rss_of(const RegressionDataset& d, const VectorXd& w, std::size_t rows) {
    double r = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double e = d.targets(i) - poly_features(d.inputs(i), int(w.size()) - 1).dot(w);
        r += e * e;
    }
    return r;
}

} // namespace

TEST_CASE("poly_features and Horner prediction") {
    const VectorXd phi = poly_features(2.0, 3);
    CHECK(phi == (VectorXd(4) << 1, 2, 4, 8).finished());
    CHECK(poly_features(0.7, 0).size() == 1);
    CHECK_THROWS_AS(poly_features(1.0, -1), ConfigError);
    PolyFit f;
    f.weights = (VectorXd(3) << 1, -2, 0.5).finished();
    CHECK(f.predict(3.0) == doctest::Approx(1 - 6 + 4.5));
}

TEST_CASE("gaussian_bits is -log2 of the normal density") {
    const double y = 0.3, mu = -0.1, s2 = 0.2;
    const double density = std::exp(-(y - mu) * (y - mu) / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
    CHECK(gaussian_bits(y, mu, s2) == doctest::Approx(-std::log2(density)));
}

TEST_CASE("fit_poly equals raw-monomial ridge") {
    const auto d = gen_sine(200, 0.15, 12);
    for (int order : {0, 2, 5})
        for (double lambda : {0.0, 0.01, 3.0}) {
            const PolyFit f = fit_poly(d, {order, lambda});
            const VectorXd ref = normal_eq(d, order, lambda, d.size());
            CHECK((f.weights - ref).norm() <= 1e-8 * std::max(1.0, ref.norm()));
            const double rss = rss_of(d, ref, d.size());
            CHECK(f.rss == doctest::Approx(rss).epsilon(1e-8));
            CHECK(f.sigma2 == doctest::Approx(rss / (200.0 - (order + 1))).epsilon(1e-8));
            CHECK(f.count == 200);
        }
    CHECK_THROWS_AS(fit_poly(d, {-1, 0.0}), ConfigError);
    CHECK_THROWS_AS(fit_poly(d, {2, -1.0}), ConfigError);
}

TEST_CASE("plug-in variance is floored") {
    RegressionDataset d;
    d.inputs = VectorXd::LinSpaced(20, -1, 1);
    d.targets = 2.0 * d.inputs;
    d.noise_variance = 1.0;
    CHECK(fit_poly(d, {1, 0.0}).sigma2 == kSigma2Min);
}

TEST_CASE("predictive codelength codes each sample with the fit on its past") {
    const auto d = gen_sine(80, 0.15, 4);
    const RegCandidate c{3, 0.1};
    PolyFit full;
    const auto trace = predictive_codelength(d, c, 40, full);
    REQUIRE(trace.per_sample_bits.size() == 40);
    CHECK(trace.start_index == 40);
    for (std::size_t i : {40u, 55u, 79u}) {
        const VectorXd w = normal_eq(d, 3, 0.1, i);
        const double s2 = std::max(rss_of(d, w, i) / double(i - 4), kSigma2Min);
        const double expect = gaussian_bits(d.targets(i), poly_features(d.inputs(i), 3).dot(w), s2);
        CHECK(trace.per_sample_bits[i - 40] == doctest::Approx(expect).epsilon(1e-8));
    }
    CHECK(std::accumulate(trace.per_sample_bits.begin(), trace.per_sample_bits.end(), 0.0) ==
          doctest::Approx(trace.total_bits));
    const PolyFit ref = fit_poly(d, c);
    CHECK((full.weights - ref.weights).norm() <= 1e-10);
}

TEST_CASE("predictive codelength is additive across splits") {
    const auto d = gen_sine(120, 0.15, 8);
    const RegCandidate c{4, 0.0};
    const double from10 = predictive_codelength(d, c, 10).total_bits;
    const double from60 = predictive_codelength(d, c, 60).total_bits;
    RegressionDataset head;
    head.inputs = d.inputs.head(60);
    head.targets = d.targets.head(60);
    head.noise_variance = d.noise_variance;
    CHECK(from10 - from60 == doctest::Approx(predictive_codelength(head, c, 10).total_bits).epsilon(1e-10));
}

TEST_CASE("predictive codelength prefix guard") {
    CHECK(min_prefix(0) == 10);
    CHECK(min_prefix(20) == 26);
    const auto d = gen_sine(50, 0.15, 1);
    CHECK_THROWS_AS(predictive_codelength(d, {20, 0.0}, 25), ConfigError);
    CHECK_NOTHROW(predictive_codelength(d, {20, 0.0}, 26));
    CHECK_THROWS_AS(predictive_codelength(d, {2, 0.0}, 51), ConfigError);
}

TEST_CASE("two-part MDL: ML fit plus (d/2) log2 n") {
    const auto d = gen_sine(100, 0.15, 3);
    const VectorXd w = normal_eq(d, 4, 0.0, 100);
    const double s2 = rss_of(d, w, 100) / 100.0;
    const double expect = 50.0 * std::log2(2 * std::numbers::pi * s2) + 50.0 / std::numbers::ln2 + 2.5 * std::log2(100.0);
    CHECK(two_part_mdl(d, 4) == doctest::Approx(expect).epsilon(1e-9));
    const auto tiny = gen_sine(3, 0.15, 3);
    CHECK_THROWS_AS(two_part_mdl(tiny, 2), ConfigError);
}

TEST_CASE("log evidence equals the Gaussian marginal likelihood") {
    const auto d = gen_sine(30, 0.15, 21);
    const int order = 3;
    for (double alpha : {0.01, 1.0})
        for (double beta : {2.0, 7.0}) {
            MatrixXd Phi(30, order + 1);
            for (int i = 0; i < 30; ++i) Phi.row(i) = poly_features(d.inputs(i), order).transpose();
            const MatrixXd C = MatrixXd::Identity(30, 30) / beta + Phi * Phi.transpose() / alpha;
            const Eigen::LDLT<MatrixXd> ldlt(C);
            const double logdet = ldlt.vectorD().array().log().sum();
            const double quad = d.targets.dot(ldlt.solve(d.targets));
            const double ln_ev = -0.5 * (30 * std::log(2 * std::numbers::pi) + logdet + quad);
            CHECK(log_evidence_bits(d, order, alpha, beta) == doctest::Approx(ln_ev / std::numbers::ln2).epsilon(1e-9));
        }
    CHECK_THROWS_AS(log_evidence_bits(d, order, 0.0, 1.0), ConfigError);
}

TEST_CASE("Bayes score plugs in beta = n / rss") {
    const auto d = gen_sine(60, 0.15, 2);
    const std::vector<double> grid{1e-3, 1.0};
    const auto scores = bayes_evidence_score(d, 5, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double beta = 60.0 / fit_poly(d, {5, grid[k]}).rss;
        CHECK(scores[k] == doctest::Approx(-log_evidence_bits(d, 5, grid[k] * beta, beta)));
    }
    const std::vector<double> zero{0.0};
    CHECK_THROWS_AS(bayes_evidence_score(d, 5, zero), ConfigError);
}

TEST_CASE("oracle generalization error against the closed form") {
    // Zero predictor: E[sin^2(3x)] over U[-2, 2] = 1/2 - sin(12)/24.
    const double mean_sq = 0.5 - std::sin(12.0) / 24.0;
    const double s2 = 0.4, noise = 0.15;
    const double expect = 0.5 * std::log2(2 * std::numbers::pi * s2) + (mean_sq + noise) / (2 * s2 * std::numbers::ln2);
    CHECK(oracle_generalization(VectorXd::Zero(3), s2, noise) == doctest::Approx(expect).epsilon(1e-10));
    // No predictor beats the differential entropy of the noise.
    CHECK(oracle_generalization(VectorXd::Zero(1), 0.15, 0.15) > 0.5 * std::log2(2 * std::numbers::pi * std::numbers::e * 0.15));
    CHECK_THROWS_AS(oracle_generalization(VectorXd::Zero(1), 0.0, 0.1), ConfigError);
}

TEST_CASE("cv_score uses one reproducible split") {
    const auto d = gen_sine(100, 0.15, 6);
    const auto a = cv_score(d, {4, 0.0}, 0.25, 9);
    const auto b = cv_score(d, {4, 0.0}, 0.25, 9);
    const auto c = cv_score(d, {4, 0.0}, 0.25, 10);
    CHECK(a.score_bits == b.score_bits);
    CHECK(a.score_bits != c.score_bits);
    CHECK(a.fit.count == 75);
    CHECK_THROWS_AS(cv_score(d, {4, 0.0}, 0.0, 1), ConfigError);
    const auto small = gen_sine(20, 0.15, 6);
    CHECK_THROWS_AS(cv_score(small, {12, 0.0}, 0.25, 1), ConfigError);
}

TEST_CASE("method names round-trip") {
    for (auto m : {RegMethod::ddl, RegMethod::cv, RegMethod::mdl2part, RegMethod::bayes})
        CHECK(parse_reg_method(to_string(m)) == m);
    CHECK(parse_reg_method("mdl2part") == RegMethod::mdl2part);
    CHECK_THROWS_AS(parse_reg_method("aic"), ConfigError);
}

TEST_CASE("select over a lambda grid") {
    const auto d = gen_sine(200, 0.15, 30);
    std::vector<RegCandidate> grid;
    for (double l : {1e-6, 1e-3, 1.0, 100.0}) grid.push_back({10, l});
    const std::vector<RegMethod> methods{RegMethod::ddl, RegMethod::cv, RegMethod::bayes};
    RegressionOptions opts;
    opts.cv_seed = 3;
    const auto r = select(d, grid, methods, opts);
    r.validate();
    CHECK(r.candidate_name == "lambda");
    CHECK(r.candidates == std::vector<double>{1e-6, 1e-3, 1.0, 100.0});
    CHECK(r.methods.size() == 3);
    for (const auto& m : r.methods)
        if (m.method != "cv") CHECK(m.regret_bits >= 0.0);
    // The heaviest penalty cannot fit sin(3x).
    CHECK(r.method("ddl").chosen != 3);
    const std::vector<RegMethod> mdl{RegMethod::mdl2part};
    CHECK_THROWS_AS(select(d, grid, mdl, opts), ConfigError);
}

TEST_CASE("select over polynomial orders") {
    const auto d = gen_sine(300, 0.15, 31);
    std::vector<RegCandidate> grid;
    for (int M = 0; M <= 12; ++M) grid.push_back({M, 0.0});
    const std::vector<RegMethod> methods{RegMethod::ddl, RegMethod::mdl2part};
    const auto r = select(d, grid, methods);
    CHECK(r.candidate_name == "order");
    // sin(3x) on [-2, 2] needs at least a 5th-order polynomial.
    CHECK(r.candidates[r.method("ddl").chosen] >= 5);
    CHECK(r.candidates[r.method("mdl").chosen] >= 5);
    for (const auto& m : r.methods) CHECK(m.regret_bits >= 0.0);
}
