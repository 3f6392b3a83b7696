#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ddl/data.hpp"
#include "ddl/discrete.hpp"
#include "ddl/mlp.hpp"
#include "ddl/selection.hpp"

namespace ddl {

using Mlp = MlpParams<double>;

/// Learning rates and epoch counts for the three training phases:
/// full training, unlearning back to the prefix, and block re-addition.
struct TrainSchedule {
    Eigen::Index hidden = 16;
    double train_lr = 0.05;
    int train_epochs = 30;
    double unlearn_high_lr = 0.2;
    int unlearn_high_epochs = 5;
    double unlearn_low_lr = 0.05;
    int unlearn_low_epochs = 5;
    int readd_epochs_per_block = 1;
    std::size_t batch_size = 32;
    double l2_lambda = 0.0;

    void validate() const;
};

/// Prefix length m and block boundaries m = b_0 < b_1 < ... < b_B = n.
struct BlockPlan {
    std::size_t m = 0;
    std::vector<std::size_t> boundaries;

    [[nodiscard]] std::size_t blocks() const noexcept { return boundaries.empty() ? 0 : boundaries.size() - 1; }
    [[nodiscard]] std::size_t n() const noexcept { return boundaries.empty() ? 0 : boundaries.back(); }
    /// Copies of block j used when it is added to a training set of `current` samples:
    /// max(1, floor(current / block_size)).
    [[nodiscard]] std::size_t duplication(std::size_t j) const;
    void validate(std::size_t n) const;
};

/// B equal blocks after the prefix; the last block absorbs the remainder.
BlockPlan make_block_plan(std::size_t n, std::size_t m, std::size_t blocks);

/// He-scaled Gaussian first layer, small Gaussian output layer, zero biases.
Mlp init_mlp(Eigen::Index input_dim, Eigen::Index hidden, std::uint64_t seed);

/// Plain minibatch gradient descent with a fixed learning rate. Each epoch
/// shuffles with its own stream derived from `seed`. Throws ComputationError
/// if the loss or parameters stop being finite.
Mlp train(Mlp params, const ClassifDataset& data, double lr, int epochs, std::size_t batch_size, double l2_lambda,
          std::uint64_t seed);

/// Full-training phase of `schedule`.
Mlp train(Mlp params, const ClassifDataset& data, const TrainSchedule& schedule, std::uint64_t seed);

/// Warm start from the n-sample model and retrain on the prefix only:
/// a high learning-rate phase followed by a low one.
Mlp unlearn(const Mlp& params_n, const ClassifDataset& prefix, const TrainSchedule& schedule, std::uint64_t seed);

/// Mean log-loss in bits with clamped probabilities.
double mean_log_loss_bits(const Mlp& params, const ClassifDataset& data);

struct BlockCoding {
    CodelengthTrace trace;
    std::vector<double> block_bits;
    Mlp final_params;
};

/// Codes each block's labels with the current model, then retrains on prefix +
/// earlier blocks + the new block duplicated. `prefix_model` must have been
/// trained without samples at or after plan.m.
BlockCoding block_sequential_codelength(const ClassifDataset& data, const BlockPlan& plan,
                                        const TrainSchedule& schedule, double lambda, std::uint64_t seed,
                                        const Mlp& prefix_model);

struct NnSelectOptions {
    double m_fraction = 0.8;
    std::size_t blocks = 5;
    double cv_holdout = 0.2;
};

/// DDL and hold-out selection of the L2 penalty. Oracle errors come from `test`.
SelectionReport select_lambda_nn(const ClassifDataset& data, std::span<const double> lambda_grid,
                                 const TrainSchedule& schedule, std::uint64_t seed, const ClassifDataset& test,
                                 const NnSelectOptions& options = {});

} // namespace ddl
