#include "ddl/data.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ddl/config.hpp"
#include "ddl/errors.hpp"
#include "ddl/rng.hpp"

namespace ddl {

DiscreteDataset DiscreteDataset::prefix(std::size_t m) const {
    if (m > size()) throw ConfigError("DiscreteDataset::prefix: m exceeds dataset size");
    DiscreteDataset out;
    out.alphabet_size = alphabet_size;
    out.features.assign(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(m));
    out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(m));
    return out;
}

void DiscreteDataset::validate() const {
    if (alphabet_size == 0) throw ConfigError("DiscreteDataset: alphabet size must be positive");
    if (features.size() != labels.size()) throw ConfigError("DiscreteDataset: features and labels differ in length");
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i] >= alphabet_size)
            throw ConfigError("DiscreteDataset: feature " + std::to_string(i) + " out of range");
        if (labels[i] > 1) throw ConfigError("DiscreteDataset: label " + std::to_string(i) + " is not a bit");
    }
}

void RegressionDataset::validate() const {
    if (inputs.size() != targets.size()) throw ConfigError("RegressionDataset: inputs and targets differ in length");
    if (!(noise_variance > 0)) throw ConfigError("RegressionDataset: noise variance must be positive");
}

ClassifDataset ClassifDataset::rows(std::span<const std::size_t> index) const {
    ClassifDataset out;
    out.inputs.resize(static_cast<Eigen::Index>(index.size()), inputs.cols());
    out.labels.resize(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(static_cast<Eigen::Index>(index[i]));
        out.labels[i] = labels.at(index[i]);
    }
    return out;
}

ClassifDataset ClassifDataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw ConfigError("ClassifDataset::slice: bad range");
    ClassifDataset out;
    out.inputs = inputs.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      labels.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

void ClassifDataset::validate() const {
    if (static_cast<std::size_t>(inputs.rows()) != labels.size())
        throw ConfigError("ClassifDataset: inputs and labels differ in length");
}

std::size_t DdlConfig::resolve(std::size_t n) const {
    std::size_t prefix = 0;
    if (m) {
        prefix = *m;
    } else if (alpha) {
        if (!(*alpha > 0.0 && *alpha < 1.0)) throw ConfigError("DdlConfig: alpha must lie in (0, 1)");
        prefix = static_cast<std::size_t>(std::floor(*alpha * static_cast<double>(n)));
    } else {
        throw ConfigError("DdlConfig: neither alpha nor m is set");
    }
    if (block_count == 0) throw ConfigError("DdlConfig: block count must be positive");
    if (prefix == 0 || prefix >= n)
        throw ConfigError("DdlConfig: split m=" + std::to_string(prefix) + " must satisfy 0 < m < n=" +
                          std::to_string(n));
    if (prefix < min_prefix)
        throw ConfigError("DdlConfig: split m=" + std::to_string(prefix) + " is below the minimum prefix " +
                          std::to_string(min_prefix));
    return prefix;
}

DiscreteDataset gen_bernoulli_k(std::span<const double> px, std::span<const double> p1_given_x, std::size_t n,
                                std::uint64_t seed) {
    if (px.empty()) throw ConfigError("gen_bernoulli_k: empty feature distribution");
    if (px.size() != p1_given_x.size()) throw ConfigError("gen_bernoulli_k: px and p1_given_x differ in length");
    double total = 0.0;
    for (double p : px) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("gen_bernoulli_k: px entries must lie in [0, 1]");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("gen_bernoulli_k: px does not sum to 1");
    for (double p : p1_given_x)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("gen_bernoulli_k: p1_given_x entries must lie in [0, 1]");

    std::vector<double> cdf(px.size());
    std::partial_sum(px.begin(), px.end(), cdf.begin());
    cdf.back() = 1.0;

    DiscreteDataset data;
    data.alphabet_size = static_cast<std::uint32_t>(px.size());
    data.features.resize(n);
    data.labels.resize(n);
    CounterRng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::uint32_t x = 0;
        while (x + 1 < cdf.size() && u >= cdf[x]) ++x;
        data.features[i] = x;
        data.labels[i] = rng.uniform() < p1_given_x[x] ? 1 : 0;
    }
    return data;
}

RegressionDataset gen_sine(std::size_t n, double noise_variance, std::uint64_t seed) {
    if (!(noise_variance > 0.0)) throw ConfigError("gen_sine: noise variance must be positive");
    RegressionDataset data;
    data.noise_variance = noise_variance;
    data.inputs.resize(static_cast<Eigen::Index>(n));
    data.targets.resize(static_cast<Eigen::Index>(n));
    CounterRng rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_variance));
    for (Eigen::Index i = 0; i < data.inputs.size(); ++i) {
        const double x = -2.0 + 4.0 * rng.uniform();
        data.inputs(i) = x;
        data.targets(i) = std::sin(3.0 * x) + noise(rng);
    }
    return data;
}

ClassifDataset gen_gaussian_classes(std::size_t n, Eigen::Index dim, double separation, std::uint64_t seed) {
    if (dim <= 0) throw ConfigError("gen_gaussian_classes: dimension must be positive");
    ClassifDataset data;
    data.inputs.resize(static_cast<Eigen::Index>(n), dim);
    data.labels.resize(n);
    CounterRng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double shift = 0.5 * separation / std::sqrt(static_cast<double>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t y = rng.uniform() < 0.5 ? 1 : 0;
        data.labels[i] = y;
        for (Eigen::Index j = 0; j < dim; ++j)
            data.inputs(static_cast<Eigen::Index>(i), j) = normal(rng) + (y ? shift : -shift);
    }
    return data;
}

} // namespace ddl
