#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "ddl/errors.hpp"
#include "ddl/rls.hpp"
#include "ddl/rng.hpp"

using namespace ddl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Ridge solution from a Householder QR of the stacked system [X; sqrt(Lambda)].
VectorXd batch_ridge(const MatrixXd& X, const VectorXd& y, const VectorXd& penalty) {
    const Eigen::Index n = X.rows(), d = X.cols();
    MatrixXd A(n + d, d);
    A << X, penalty.cwiseSqrt().asDiagonal().toDenseMatrix();
    VectorXd b = VectorXd::Zero(n + d);
    b.head(n) = y;
    return A.colPivHouseholderQr().solve(b);
}

struct Problem {
    MatrixXd X;
    VectorXd y;
};

Problem random_problem(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    CounterRng rng(seed);
    std::normal_distribution<double> g;
    Problem p{MatrixXd(n, d), VectorXd(n)};
    VectorXd w(d);
    for (Eigen::Index j = 0; j < d; ++j) w(j) = g(rng);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) p.X(i, j) = g(rng);
        p.y(i) = p.X.row(i).dot(w) + 0.3 * g(rng);
    }
    return p;
}

} // namespace

TEST_CASE("recursive ridge matches the batch solution at every checkpoint") {
    const Eigen::Index dims[] = {1, 3, 8, 21};
    const double lambdas[] = {1e-6, 0.1, 10.0};
    std::uint64_t seed = 0;
    for (Eigen::Index d : dims)
        for (double lambda : lambdas) {
            const auto p = random_problem(300, d, ++seed);
            RlsState<double> s(d, lambda);
            for (Eigen::Index i = 0; i < p.X.rows(); ++i) {
                s.update(p.X.row(i).transpose(), p.y(i));
                if ((i + 1) % 50 == 0 && i + 1 >= d) {
                    const VectorXd ref = batch_ridge(p.X.topRows(i + 1), p.y.head(i + 1), VectorXd::Constant(d, lambda));
                    REQUIRE((s.weights() - ref).norm() <= 1e-8 * ref.norm());
                }
            }
            CHECK(s.count() == 300);
        }
}

TEST_CASE("objective, rss, precision inverse and log determinant") {
    const auto p = random_problem(120, 5, 99);
    VectorXd pen(5);
    pen << 0.5, 1.0, 2.0, 0.0, 3.0;
    RlsState<double> s(pen);
    for (Eigen::Index i = 0; i < p.X.rows(); ++i) s.update(p.X.row(i).transpose(), p.y(i));
    const VectorXd w = s.weights();
    const double rss = (p.y - p.X * w).squaredNorm();
    const double penalty = (pen.array() * w.array().square()).sum();
    CHECK(s.objective() == doctest::Approx(rss + penalty).epsilon(1e-10));
    CHECK(s.rss() == doctest::Approx(rss).epsilon(1e-10));

    const MatrixXd info = p.X.transpose() * p.X + MatrixXd(pen.asDiagonal());
    CHECK((s.precision_inverse() - info.inverse()).norm() <= 1e-10 * info.inverse().norm());
    const MatrixXd R = s.information_factor();
    CHECK((R.transpose() * R - info).norm() <= 1e-10 * info.norm());
    CHECK(s.log_det_information() == doctest::Approx(std::log(info.determinant())).epsilon(1e-10));
    CHECK(s.predict(p.X.row(3).transpose()) == doctest::Approx(p.X.row(3).dot(w)));
    CHECK(s.penalty() == pen);
}

TEST_CASE("degree-20 monomials stay accurate") {
    // Scaled monomials (x/2)^j on [-2, 2], checked against a long-double normal-equation solve.
    const int d = 21;
    CounterRng rng(5);
    std::normal_distribution<double> g;
    RlsState<double> s(d, 1e-6);
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    MatL G = MatL::Identity(d, d) * 1e-6L;
    VecL b = VecL::Zero(d);
    for (int i = 0; i < 2000; ++i) {
        const double x = -2.0 + 4.0 * rng.uniform();
        VectorXd phi(d);
        for (int j = 0; j < d; ++j) phi(j) = std::pow(x / 2.0, j);
        const double y = std::sin(3 * x) + 0.4 * g(rng);
        s.update(phi, y);
        const VecL pl = phi.cast<long double>();
        G += pl * pl.transpose();
        b += pl * static_cast<long double>(y);
    }
    const VecL ref = G.ldlt().solve(b);
    const VectorXd w = s.weights();
    // Compare fitted curves rather than coefficients; the coefficient vector is ill-conditioned.
    double worst = 0.0;
    for (double x = -2.0; x <= 2.0; x += 0.01) {
        long double fr = 0, fw = 0;
        for (int j = 0; j < d; ++j) {
            const long double v = std::pow(static_cast<long double>(x) / 2, j);
            fr += ref(j) * v;
            fw += w(j) * v;
        }
        worst = std::max(worst, static_cast<double>(std::abs(fr - fw)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("float instantiation") {
    RlsState<float> s(2, 0.0f);
    s.update(Eigen::Vector2f(1, 0), 2.0f);
    s.update(Eigen::Vector2f(0, 1), 3.0f);
    s.update(Eigen::Vector2f(1, 1), 5.0f);
    CHECK(s.weights()(0) == doctest::Approx(2.0f));
    CHECK(s.weights()(1) == doctest::Approx(3.0f));
}

TEST_CASE("RlsState error handling") {
    CHECK_THROWS_AS(RlsState<double>(2, -1.0), ConfigError);
    CHECK_THROWS_AS(RlsState<double>(2, std::numeric_limits<double>::infinity()), ConfigError);
    RlsState<double> s(3, 0.0);
    CHECK_THROWS_AS(s.weights(), ComputationError);
    CHECK(s.rss() == 0.0);
    CHECK_THROWS_AS(s.update(VectorXd::Ones(2), 1.0), ConfigError);
    VectorXd bad = VectorXd::Ones(3);
    bad(1) = std::nan("");
    CHECK_THROWS_AS(s.update(bad, 1.0), ComputationError);
    CHECK_THROWS_AS(s.update(VectorXd::Ones(3), std::numeric_limits<double>::infinity()), ComputationError);
    s.update(VectorXd::Ones(3), 1.0);
    CHECK_THROWS_AS(s.weights(), ComputationError);
    CHECK_THROWS_AS(s.log_det_information(), ComputationError);
}

TEST_CASE("rls_update returns a new state and leaves the input alone") {
    const RlsState<double> s0(2, 1.0);
    const auto s1 = rls_update(s0, VectorXd::Ones(2), 4.0);
    CHECK(s0.count() == 0);
    CHECK(s1.count() == 1);
    CHECK(s0.weights().isZero());
    // (I + 11^T) w = 4 * 1  =>  w = 4/3 * 1
    CHECK(s1.weights()(0) == doctest::Approx(4.0 / 3.0));
}
