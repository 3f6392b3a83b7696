#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ddl/errors.hpp"

namespace ddl {

/// Recursive ridge regression in square-root information form.
///
/// Keeps an upper-triangular R and vector z with
///
///     R^T R = diag(penalty) + sum_i phi_i phi_i^T
///     R^T z = sum_i y_i phi_i
///
/// Each sample is folded in with d Givens rotations, so the weights
/// R^{-1} z equal the batch ridge solution (X^T X + Lambda)^{-1} X^T y at
/// every step. The rotated-out residual accumulates the minimum of the
/// regularized least-squares objective. Working with R rather than its
/// inverse keeps polynomial bases of high degree usable in double precision.
template <typename Scalar = double>
class RlsState {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    /// Ridge penalty lambda * I.
    RlsState(Eigen::Index dim, Scalar lambda) : RlsState(Vector::Constant(dim, lambda)) {}

    /// Diagonal penalty sum_j penalty_j w_j^2.
    explicit RlsState(const Vector& penalty)
        : r_(Matrix::Zero(penalty.size(), penalty.size())), z_(Vector::Zero(penalty.size())), penalty_(penalty) {
        for (Eigen::Index j = 0; j < penalty.size(); ++j) {
            if (!(penalty(j) >= Scalar(0)) || !std::isfinite(static_cast<double>(penalty(j))))
                throw ConfigError("RlsState: penalty must be finite and nonnegative");
            r_(j, j) = std::sqrt(penalty(j));
        }
    }

    [[nodiscard]] Eigen::Index dim() const noexcept { return z_.size(); }
    [[nodiscard]] long count() const noexcept { return count_; }

    void update(const Eigen::Ref<const Vector>& phi, Scalar y) {
        if (phi.size() != dim()) throw ConfigError("RlsState::update: feature length mismatch");
        if (!phi.allFinite() || !std::isfinite(static_cast<double>(y)))
            throw ComputationError("RlsState::update: non-finite input");
        Vector row = phi;
        Scalar target = y;
        const Eigen::Index d = dim();
        for (Eigen::Index k = 0; k < d; ++k) {
            const Scalar a = r_(k, k);
            const Scalar b = row(k);
            if (b == Scalar(0)) continue;
            const Scalar h = std::hypot(a, b);
            const Scalar c = a / h;
            const Scalar s = b / h;
            r_(k, k) = h;
            for (Eigen::Index j = k + 1; j < d; ++j) {
                const Scalar rk = r_(k, j);
                const Scalar rj = row(j);
                r_(k, j) = c * rk + s * rj;
                row(j) = -s * rk + c * rj;
            }
            const Scalar zk = z_(k);
            z_(k) = c * zk + s * target;
            target = -s * zk + c * target;
        }
        objective_ += target * target;
        ++count_;
    }

    /// Current ridge estimate. Throws ComputationError while the system is singular.
    [[nodiscard]] Vector weights() const {
        for (Eigen::Index j = 0; j < dim(); ++j)
            if (r_(j, j) == Scalar(0))
                throw ComputationError("RlsState::weights: singular information matrix (coefficient " +
                                       std::to_string(j) + ")");
        return r_.template triangularView<Eigen::Upper>().solve(z_);
    }

    [[nodiscard]] Scalar predict(const Eigen::Ref<const Vector>& phi) const { return phi.dot(weights()); }

    /// min_w ||y - X w||^2 + sum_j penalty_j w_j^2.
    [[nodiscard]] Scalar objective() const noexcept { return objective_; }

    /// Residual sum of squares of the current fit, objective minus the penalty at the optimum.
    [[nodiscard]] Scalar rss() const {
        if (count_ == 0) return Scalar(0);
        const Vector w = weights();
        const Scalar value = objective_ - (penalty_.array() * w.array().square()).sum();
        return value > Scalar(0) ? value : Scalar(0);
    }

    /// Upper-triangular square root of the regularized Gram matrix.
    [[nodiscard]] const Matrix& information_factor() const noexcept { return r_; }

    /// (X^T X + Lambda)^{-1}, formed on demand.
    [[nodiscard]] Matrix precision_inverse() const {
        const Matrix rinv = r_.template triangularView<Eigen::Upper>().solve(Matrix::Identity(dim(), dim()));
        Matrix p = rinv * rinv.transpose();
        return Scalar(0.5) * (p + p.transpose());
    }

    /// log det(X^T X + Lambda).
    [[nodiscard]] Scalar log_det_information() const {
        Scalar acc = 0;
        for (Eigen::Index j = 0; j < dim(); ++j) {
            if (r_(j, j) == Scalar(0))
                throw ComputationError("RlsState::log_det_information: information matrix is not positive definite");
            acc += Scalar(2) * std::log(std::abs(r_(j, j)));
        }
        return acc;
    }

    [[nodiscard]] const Vector& penalty() const noexcept { return penalty_; }

private:
    Matrix r_;
    Vector z_;
    Vector penalty_;
    Scalar objective_ = 0;
    long count_ = 0;
};

/// Value-semantics form of RlsState::update.
template <typename Scalar>
RlsState<Scalar> rls_update(RlsState<Scalar> state,
                            const Eigen::Ref<const typename RlsState<Scalar>::Vector>& phi, Scalar y) {
    state.update(phi, y);
    return state;
}

} // namespace ddl
