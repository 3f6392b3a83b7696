#include "ddl/discrete.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ddl/errors.hpp"

namespace ddl {

namespace {

constexpr double kLn2 = std::numbers::ln2;

} // namespace

KtState::KtState(std::uint32_t alphabet_size) : ones_(alphabet_size, 0), totals_(alphabet_size, 0) {
    if (alphabet_size == 0) throw ConfigError("KtState: alphabet size must be positive");
}

double kt_predict(const KtState& state, std::uint32_t x) {
    if (x >= state.alphabet_size()) throw ConfigError("kt_predict: symbol out of range");
    return state.prob_one(x);
}

CodelengthTrace kt_sequential_codelength(const DiscreteDataset& data, std::size_t m) {
    data.validate();
    if (m > data.size()) throw ConfigError("kt_sequential_codelength: m exceeds n");
    KtState state(data.alphabet_size);
    CodelengthTrace trace;
    trace.start_index = m;
    trace.per_sample_bits.reserve(data.size() - m);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.features[i];
        const auto y = data.labels[i];
        if (i >= m) {
            const double bits = -std::log2(state.prob(x, y));
            trace.per_sample_bits.push_back(bits);
            trace.total_bits += bits;
        }
        state.update(x, y);
    }
    return trace;
}

double kt_stream_bits(std::uint64_t ones, std::uint64_t total) {
    if (ones > total) throw ConfigError("kt_stream_bits: more ones than samples");
    const double k = static_cast<double>(ones);
    const double n = static_cast<double>(total);
    const double log_p = std::lgamma(k + 0.5) + std::lgamma(n - k + 0.5) - std::log(std::numbers::pi) - std::lgamma(n + 1.0);
    return -log_p / kLn2;
}

double log2_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw ConfigError("log2_binomial: k > n");
    if (k == 0 || k == n) return 0.0;
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return (std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0)) / kLn2;
}

double block_codelength(const DiscreteDataset& data) {
    data.validate();
    KtState counts(data.alphabet_size);
    for (std::size_t i = 0; i < data.size(); ++i) counts.update(data.features[i], data.labels[i]);
    double bits = 0.0;
    for (std::uint32_t x = 0; x < data.alphabet_size; ++x) {
        const auto n = counts.totals(x);
        const auto k = counts.ones(x);
        bits += std::log2(static_cast<double>(n) + 1.0) + log2_binomial(n, k);
    }
    return bits;
}

double ddl_estimate(const DiscreteDataset& data, const DdlConfig& cfg, Coder coder) {
    const std::size_t n = data.size();
    const std::size_t m = cfg.resolve(n);
    const double span = static_cast<double>(n - m);
    switch (coder) {
    case Coder::sequential:
        return kt_sequential_codelength(data, m).total_bits / span;
    case Coder::block:
        return (block_codelength(data) - block_codelength(data.prefix(m))) / span;
    }
    throw ConfigError("ddl_estimate: unknown coder");
}

double true_generalization_error(std::span<const double> px, std::span<const double> p1_given_x,
                                 std::span<const double> p1_hat) {
    if (px.size() != p1_given_x.size() || px.size() != p1_hat.size())
        throw ConfigError("true_generalization_error: length mismatch");
    double bits = 0.0;
    for (std::size_t x = 0; x < px.size(); ++x) {
        const double q = p1_hat[x];
        if (!(q > 0.0 && q < 1.0))
            throw ConfigError("true_generalization_error: predicted probability for symbol " + std::to_string(x) +
                              " is not strictly inside (0, 1)");
        if (px[x] == 0.0) continue;
        const double p = p1_given_x[x];
        bits += px[x] * (-p * std::log2(q) - (1.0 - p) * std::log2(1.0 - q));
    }
    return bits;
}

double conditional_entropy(std::span<const double> px, std::span<const double> p1_given_x) {
    if (px.size() != p1_given_x.size()) throw ConfigError("conditional_entropy: length mismatch");
    double bits = 0.0;
    for (std::size_t x = 0; x < px.size(); ++x) {
        const double p = p1_given_x[x];
        if (p > 0.0) bits -= px[x] * p * std::log2(p);
        if (p < 1.0) bits -= px[x] * (1.0 - p) * std::log2(1.0 - p);
    }
    return bits;
}

std::vector<double> kt_posterior_predictor(const DiscreteDataset& data) {
    data.validate();
    KtState state(data.alphabet_size);
    for (std::size_t i = 0; i < data.size(); ++i) state.update(data.features[i], data.labels[i]);
    std::vector<double> p(data.alphabet_size);
    for (std::uint32_t x = 0; x < data.alphabet_size; ++x) p[x] = state.prob_one(x);
    return p;
}

} // namespace ddl
