#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ddl/config.hpp"
#include "ddl/data.hpp"

namespace ddl {

/// Krichevsky-Trofimov counts, one (ones, total) pair per feature symbol.
class KtState {
public:
    explicit KtState(std::uint32_t alphabet_size);

    /// P(y = 1 | x) = (k_x + 1/2) / (n_x + 1).
    [[nodiscard]] double prob_one(std::uint32_t x) const noexcept {
        return (static_cast<double>(ones_[x]) + 0.5) / (static_cast<double>(totals_[x]) + 1.0);
    }
    [[nodiscard]] double prob(std::uint32_t x, std::uint8_t y) const noexcept {
        const double p1 = prob_one(x);
        return y ? p1 : 1.0 - p1;
    }
    void update(std::uint32_t x, std::uint8_t y) noexcept {
        ones_[x] += y;
        ++totals_[x];
        ++consumed_;
    }

    [[nodiscard]] std::uint32_t alphabet_size() const noexcept { return static_cast<std::uint32_t>(ones_.size()); }
    [[nodiscard]] std::uint64_t ones(std::uint32_t x) const { return ones_.at(x); }
    [[nodiscard]] std::uint64_t totals(std::uint32_t x) const { return totals_.at(x); }
    [[nodiscard]] std::uint64_t consumed() const noexcept { return consumed_; }

private:
    std::vector<std::uint64_t> ones_;
    std::vector<std::uint64_t> totals_;
    std::uint64_t consumed_ = 0;
};

/// Per-sample codelengths (bits) for samples start_index..n-1.
struct CodelengthTrace {
    std::vector<double> per_sample_bits;
    double total_bits = 0.0;
    std::size_t start_index = 0;

    [[nodiscard]] double mean_bits() const {
        return per_sample_bits.empty() ? 0.0 : total_bits / static_cast<double>(per_sample_bits.size());
    }
};

/// Returns P(y=1 | x) under the KT estimator. Requires x < K.
double kt_predict(const KtState& state, std::uint32_t x);

/// Codes labels m..n-1 sequentially; the KT state at sample i has seen every
/// sample before i, prefix included.
CodelengthTrace kt_sequential_codelength(const DiscreteDataset& data, std::size_t m);

/// Closed form of the KT sequential codelength of one binary stream with k ones in n:
/// -log2( Gamma(k+1/2) Gamma(n-k+1/2) / (pi Gamma(n+1)) ).
double kt_stream_bits(std::uint64_t ones, std::uint64_t total);

/// log2 of the binomial coefficient C(n, k) via log-gamma.
double log2_binomial(std::uint64_t n, std::uint64_t k);

/// Enumerative two-part block code: per symbol, log2(n_x + 1) bits for the
/// count of ones and log2 C(n_x, k_x) bits for their positions.
double block_codelength(const DiscreteDataset& data);

enum class Coder { sequential, block };

/// (C(n) - C(m)) / (n - m) in bits per sample.
double ddl_estimate(const DiscreteDataset& data, const DdlConfig& cfg, Coder coder = Coder::sequential);

/// Expected log-loss (bits) of predictor p_hat on the source (px, p1).
/// Requires every p_hat strictly inside (0, 1).
double true_generalization_error(std::span<const double> px, std::span<const double> p1_given_x,
                                 std::span<const double> p1_hat);

/// H(Y|X) in bits.
double conditional_entropy(std::span<const double> px, std::span<const double> p1_given_x);

/// KT-smoothed P(y=1|x) fitted on all of `data`.
std::vector<double> kt_posterior_predictor(const DiscreteDataset& data);

} // namespace ddl
