#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ddl {

/// Symbol features in {0..K-1} with binary labels.
struct DiscreteDataset {
    std::vector<std::uint32_t> features;
    std::vector<std::uint8_t> labels;
    std::uint32_t alphabet_size = 1;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    /// First m samples.
    [[nodiscard]] DiscreteDataset prefix(std::size_t m) const;
    /// Throws ConfigError if lengths differ or a feature is out of range.
    void validate() const;
};

/// Scalar inputs and real targets; `noise_variance` is generation metadata.
struct RegressionDataset {
    Eigen::VectorXd inputs;
    Eigen::VectorXd targets;
    double noise_variance = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(targets.size()); }
    void validate() const;
};

/// Rows of `inputs` are samples.
struct ClassifDataset {
    Eigen::MatrixXd inputs;
    std::vector<std::uint8_t> labels;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return inputs.cols(); }
    [[nodiscard]] ClassifDataset rows(std::span<const std::size_t> index) const;
    [[nodiscard]] ClassifDataset slice(std::size_t begin, std::size_t end) const;
    void validate() const;
};

/// iid x ~ px, y ~ Bernoulli(p1_given_x[x]).
DiscreteDataset gen_bernoulli_k(std::span<const double> px, std::span<const double> p1_given_x,
                                std::size_t n, std::uint64_t seed);

/// x ~ U[-2, 2], y = sin(3x) + w with w ~ N(0, noise_variance).
RegressionDataset gen_sine(std::size_t n, double noise_variance, std::uint64_t seed);

/// Two balanced Gaussian classes with identity covariance in `dim` dimensions and
/// means at +-separation/2 along the all-ones direction.
ClassifDataset gen_gaussian_classes(std::size_t n, Eigen::Index dim, double separation, std::uint64_t seed);

} // namespace ddl
