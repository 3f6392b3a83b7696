#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ddl/errors.hpp"

namespace ddl {

/// One-hidden-layer binary classifier d -> H -> 1 with rectifier hidden units
/// and a logistic output.
template <typename Scalar = double>
struct MlpParams {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Matrix w1; // H x d
    Vector b1; // H
    Vector w2; // H
    Scalar b2 = 0;

    static MlpParams zeros(Eigen::Index input_dim, Eigen::Index hidden) {
        MlpParams p;
        p.w1 = Matrix::Zero(hidden, input_dim);
        p.b1 = Vector::Zero(hidden);
        p.w2 = Vector::Zero(hidden);
        return p;
    }

    [[nodiscard]] Eigen::Index input_dim() const noexcept { return w1.cols(); }
    [[nodiscard]] Eigen::Index hidden() const noexcept { return w1.rows(); }

    /// Squared norm of the weight matrices (biases are not penalised).
    [[nodiscard]] Scalar weight_norm2() const { return w1.squaredNorm() + w2.squaredNorm(); }

    [[nodiscard]] bool all_finite() const { return w1.allFinite() && b1.allFinite() && w2.allFinite() && std::isfinite(b2); }

    MlpParams& operator+=(const MlpParams& o) {
        w1 += o.w1;
        b1 += o.b1;
        w2 += o.w2;
        b2 += o.b2;
        return *this;
    }
    MlpParams& operator*=(Scalar s) {
        w1 *= s;
        b1 *= s;
        w2 *= s;
        b2 *= s;
        return *this;
    }
    friend MlpParams operator*(Scalar s, MlpParams p) { return p *= s; }
    friend MlpParams operator+(MlpParams a, const MlpParams& b) { return a += b; }
    bool operator==(const MlpParams& o) const {
        return w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2;
    }
};

/// Probability clamp used wherever a prediction is turned into a codelength.
inline constexpr double kProbClamp = 1e-7;

template <typename Scalar>
Scalar logistic(Scalar z) {
    return z >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-z)) : std::exp(z) / (Scalar(1) + std::exp(z));
}

/// log(1 + e^z) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

/// Output logit for one input.
template <typename Scalar, typename Derived>
Scalar mlp_logit(const MlpParams<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != p.input_dim()) throw ConfigError("mlp: input dimension mismatch");
    const auto hidden = (p.w1 * x + p.b1).cwiseMax(Scalar(0));
    return p.w2.dot(hidden) + p.b2;
}

/// P(y = 1 | x), clamped to [kProbClamp, 1 - kProbClamp].
template <typename Scalar, typename Derived>
Scalar mlp_forward(const MlpParams<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
    return std::clamp(logistic(mlp_logit(p, x)), Scalar(kProbClamp), Scalar(1 - kProbClamp));
}

/// Logits for every row of `inputs`.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mlp_logits(const MlpParams<Scalar>& p, const Eigen::MatrixBase<Derived>& inputs) {
    if (inputs.cols() != p.input_dim()) throw ConfigError("mlp: input dimension mismatch");
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hidden =
        ((inputs * p.w1.transpose()).rowwise() + p.b1.transpose()).cwiseMax(Scalar(0));
    return (hidden * p.w2).array() + p.b2;
}

/// Mean cross-entropy in nats (unclamped) plus l2_lambda * ||W||^2.
template <typename Scalar, typename Derived, typename Labels>
Scalar mlp_loss(const MlpParams<Scalar>& p, const Eigen::MatrixBase<Derived>& inputs, const Labels& labels,
                Scalar l2_lambda) {
    const auto z = mlp_logits(p, inputs);
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) acc += softplus(z(i)) - (labels[i] ? z(i) : Scalar(0));
    return acc / Scalar(z.size()) + l2_lambda * p.weight_norm2();
}

/// Gradient of mlp_loss with respect to every parameter.
template <typename Scalar, typename Derived, typename Labels>
MlpParams<Scalar> mlp_grad(const MlpParams<Scalar>& p, const Eigen::MatrixBase<Derived>& inputs, const Labels& labels,
                           Scalar l2_lambda) {
    using Matrix = typename MlpParams<Scalar>::Matrix;
    using Vector = typename MlpParams<Scalar>::Vector;
    const Eigen::Index batch = inputs.rows();
    if (batch == 0) throw ConfigError("mlp_grad: empty batch");
    if (inputs.cols() != p.input_dim()) throw ConfigError("mlp: input dimension mismatch");

    const Matrix pre = (inputs * p.w1.transpose()).rowwise() + p.b1.transpose();
    const Matrix hidden = pre.cwiseMax(Scalar(0));
    const Vector z = (hidden * p.w2).array() + p.b2;

    Vector dz(batch);
    for (Eigen::Index i = 0; i < batch; ++i) dz(i) = (logistic(z(i)) - (labels[i] ? Scalar(1) : Scalar(0))) / Scalar(batch);

    MlpParams<Scalar> g;
    g.w2 = hidden.transpose() * dz + Scalar(2) * l2_lambda * p.w2;
    g.b2 = dz.sum();
    const Matrix dpre = ((dz * p.w2.transpose()).array() * (pre.array() > Scalar(0)).template cast<Scalar>()).matrix();
    g.w1 = dpre.transpose() * inputs + Scalar(2) * l2_lambda * p.w1;
    g.b1 = dpre.colwise().sum().transpose();
    return g;
}

} // namespace ddl
