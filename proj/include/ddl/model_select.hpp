#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ddl/config.hpp"
#include "ddl/data.hpp"

namespace ddl {

/// Binary-feature model pair: the label either ignores x or depends on it.
enum class BinaryModel { independent, dependent };

/// Sufficient statistics of a binary-feature dataset: per-symbol (ones, totals).
struct BinaryCounts {
    std::array<std::uint64_t, 2> ones{};
    std::array<std::uint64_t, 2> totals{};

    static BinaryCounts of(const DiscreteDataset& data, std::size_t upto);
    [[nodiscard]] std::uint64_t all_ones() const noexcept { return ones[0] + ones[1]; }
    [[nodiscard]] std::uint64_t all_totals() const noexcept { return totals[0] + totals[1]; }
};

/// KT sequential codelength (bits) of the labels under each model.
double model_codelength(BinaryModel model, const BinaryCounts& counts);

/// DDL under each model, ties to `independent`. Requires K = 2.
BinaryModel select_model_ddl(const DiscreteDataset& data, const DdlConfig& cfg);

/// Whole-sequence codelength selection (m = 0), ties to `independent`.
BinaryModel select_model_mdl(const DiscreteDataset& data);

/// Generalization error (bits) of the KT predictor fitted under `model` on the full counts.
double model_oracle_error(BinaryModel model, const BinaryCounts& counts, double p1_given_0, double p1_given_1,
                          double px1);

/// A selector for the regret experiment: DDL at split alpha, or full codelength.
struct Selector {
    enum class Kind { ddl, mdl } kind = Kind::ddl;
    double alpha = 0.5;

    static Selector ddl(double a) { return {Kind::ddl, a}; }
    static Selector mdl() { return {Kind::mdl, 0.0}; }
};

struct ParamPoint {
    double p1_given_0 = 0.5;
    double p1_given_1 = 0.5;
    double px1 = 0.5;
};

/// Full cartesian grid {0, step, 2 step, ..., 1}^3.
std::vector<ParamPoint> make_param_grid(double step);

struct WorstCaseRegret {
    double worst_regret_bits = 0.0;
    double std_error = 0.0;
    ParamPoint argmax;
};

/// For every grid point the mean regret over `trials` datasets of size n,
/// maximised over the grid. All selectors see the same datasets.
std::vector<WorstCaseRegret> worst_case_regret(std::span<const Selector> selectors, std::size_t n,
                                               std::span<const ParamPoint> grid, std::size_t trials,
                                               std::uint64_t seed, unsigned threads = 1);

WorstCaseRegret worst_case_regret(const Selector& selector, std::size_t n, std::span<const ParamPoint> grid,
                                  std::size_t trials, std::uint64_t seed, unsigned threads = 1);

} // namespace ddl
