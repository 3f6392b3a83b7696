#include "ddl/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ddl/errors.hpp"
#include "ddl/rng.hpp"

namespace ddl {

namespace {

/// Independent seed for a named phase of a run.
std::uint64_t phase_seed(std::uint64_t seed, std::uint64_t phase) { return CounterRng(seed, phase)(); }

enum Phase : std::uint64_t {
    kInit = 1,
    kCvSplit = 2,
    kFullTrain = 3,
    kUnlearn = 4,
    kBlockCoding = 5,
    kCvTrain = 6,
    kUnlearnLow = 7,
    kReaddBase = 100,
};

Eigen::VectorXd block_probabilities(const Mlp& params, const ClassifDataset& data, std::size_t begin, std::size_t end) {
    const Eigen::VectorXd z =
        mlp_logits(params, data.inputs.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)));
    Eigen::VectorXd p(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) p(i) = std::clamp(logistic(z(i)), kProbClamp, 1.0 - kProbClamp);
    return p;
}

} // namespace

void TrainSchedule::validate() const {
    if (hidden < 1) throw ConfigError("TrainSchedule: hidden width must be positive");
    if (!(train_lr > 0) || !(unlearn_high_lr > 0) || !(unlearn_low_lr > 0))
        throw ConfigError("TrainSchedule: learning rates must be positive");
    if (train_epochs < 0 || unlearn_high_epochs < 0 || unlearn_low_epochs < 0 || readd_epochs_per_block < 0)
        throw ConfigError("TrainSchedule: epoch counts must be nonnegative");
    if (batch_size == 0) throw ConfigError("TrainSchedule: batch size must be positive");
    if (!(l2_lambda >= 0)) throw ConfigError("TrainSchedule: l2_lambda must be nonnegative");
}

std::size_t BlockPlan::duplication(std::size_t j) const {
    if (j + 1 >= boundaries.size()) throw ConfigError("BlockPlan::duplication: block index out of range");
    const std::size_t current = boundaries[j];
    const std::size_t size = boundaries[j + 1] - boundaries[j];
    return std::max<std::size_t>(1, current / size);
}

void BlockPlan::validate(std::size_t n_samples) const {
    if (boundaries.size() < 2) throw ConfigError("BlockPlan: need at least one block");
    if (boundaries.front() != m || m == 0) throw ConfigError("BlockPlan: first boundary must equal m > 0");
    if (boundaries.back() != n_samples) throw ConfigError("BlockPlan: last boundary must equal n");
    for (std::size_t j = 1; j < boundaries.size(); ++j)
        if (boundaries[j] <= boundaries[j - 1]) throw ConfigError("BlockPlan: boundaries must be strictly increasing");
}

BlockPlan make_block_plan(std::size_t n, std::size_t m, std::size_t blocks) {
    if (!(m > 0 && m < n)) throw ConfigError("make_block_plan: requires 0 < m < n");
    if (blocks == 0 || blocks > n - m) throw ConfigError("make_block_plan: block count must lie in [1, n - m]");
    BlockPlan plan;
    plan.m = m;
    const std::size_t size = (n - m) / blocks;
    for (std::size_t j = 0; j < blocks; ++j) plan.boundaries.push_back(m + j * size);
    plan.boundaries.push_back(n);
    return plan;
}

Mlp init_mlp(Eigen::Index input_dim, Eigen::Index hidden, std::uint64_t seed) {
    if (input_dim < 1 || hidden < 1) throw ConfigError("init_mlp: dimensions must be positive");
    Mlp p = Mlp::zeros(input_dim, hidden);
    CounterRng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s1 = std::sqrt(2.0 / static_cast<double>(input_dim));
    const double s2 = std::sqrt(1.0 / static_cast<double>(hidden));
    for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = s1 * normal(rng);
    for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2(i) = s2 * normal(rng);
    return p;
}

Mlp train(Mlp params, const ClassifDataset& data, double lr, int epochs, std::size_t batch_size, double l2_lambda,
          std::uint64_t seed) {
    data.validate();
    if (data.dim() != params.input_dim()) throw ConfigError("train: input dimension mismatch");
    if (batch_size == 0) throw ConfigError("train: batch size must be positive");
    const std::size_t n = data.size();
    if (n == 0 || epochs <= 0) return params;

    std::vector<std::size_t> order(n);
    Eigen::MatrixXd xb;
    std::vector<std::uint8_t> yb;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        CounterRng rng(seed, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t stop = std::min(n, start + batch_size);
            xb.resize(static_cast<Eigen::Index>(stop - start), data.dim());
            yb.resize(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                xb.row(static_cast<Eigen::Index>(k - start)) = data.inputs.row(static_cast<Eigen::Index>(order[k]));
                yb[k - start] = data.labels[order[k]];
            }
            params += -lr * mlp_grad(params, xb, yb, l2_lambda);
        }
        if (!params.all_finite()) {
            throw ComputationError("train: parameters diverged at epoch " + std::to_string(epoch) +
                                   " (lr=" + std::to_string(lr) + ", l2=" + std::to_string(l2_lambda) + ")");
        }
    }
    const double loss = mlp_loss(params, data.inputs, data.labels, l2_lambda);
    if (!std::isfinite(loss)) throw ComputationError("train: loss is not finite after training (lr=" + std::to_string(lr) + ")");
    return params;
}

Mlp train(Mlp params, const ClassifDataset& data, const TrainSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    return train(std::move(params), data, schedule.train_lr, schedule.train_epochs, schedule.batch_size,
                 schedule.l2_lambda, seed);
}

Mlp unlearn(const Mlp& params_n, const ClassifDataset& prefix, const TrainSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    Mlp p = train(params_n, prefix, schedule.unlearn_high_lr, schedule.unlearn_high_epochs, schedule.batch_size,
                  schedule.l2_lambda, phase_seed(seed, kUnlearn));
    return train(std::move(p), prefix, schedule.unlearn_low_lr, schedule.unlearn_low_epochs, schedule.batch_size,
                 schedule.l2_lambda, phase_seed(seed, kUnlearnLow));
}

double mean_log_loss_bits(const Mlp& params, const ClassifDataset& data) {
    data.validate();
    if (data.size() == 0) throw ConfigError("mean_log_loss_bits: empty dataset");
    const Eigen::VectorXd p = block_probabilities(params, data, 0, data.size());
    double bits = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        bits -= std::log2(data.labels[i] ? p(static_cast<Eigen::Index>(i)) : 1.0 - p(static_cast<Eigen::Index>(i)));
    return bits / static_cast<double>(data.size());
}

BlockCoding block_sequential_codelength(const ClassifDataset& data, const BlockPlan& plan,
                                        const TrainSchedule& schedule, double lambda, std::uint64_t seed,
                                        const Mlp& prefix_model) {
    data.validate();
    schedule.validate();
    plan.validate(data.size());
    if (!(lambda >= 0)) throw ConfigError("block_sequential_codelength: lambda must be nonnegative");

    BlockCoding out;
    out.trace.start_index = plan.m;
    out.final_params = prefix_model;
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < plan.blocks(); ++j) {
        const std::size_t begin = plan.boundaries[j];
        const std::size_t end = plan.boundaries[j + 1];
        const Eigen::VectorXd p = block_probabilities(out.final_params, data, begin, end);
        double block = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double q = p(static_cast<Eigen::Index>(i - begin));
            const double bits = -std::log2(data.labels[i] ? q : 1.0 - q);
            out.trace.per_sample_bits.push_back(bits);
            block += bits;
        }
        out.block_bits.push_back(block);
        out.trace.total_bits += block;

        // Retrain on everything seen so far, with the new block repeated so it
        // carries weight comparable to the data already learned.
        rows.resize(begin);
        std::iota(rows.begin(), rows.end(), 0);
        const std::size_t copies = plan.duplication(j);
        for (std::size_t c = 0; c < copies; ++c)
            for (std::size_t i = begin; i < end; ++i) rows.push_back(i);
        out.final_params = train(std::move(out.final_params), data.rows(rows), schedule.train_lr,
                                 schedule.readd_epochs_per_block, schedule.batch_size, lambda,
                                 phase_seed(seed, kReaddBase + j));
    }
    return out;
}

SelectionReport select_lambda_nn(const ClassifDataset& data, std::span<const double> lambda_grid,
                                 const TrainSchedule& schedule, std::uint64_t seed, const ClassifDataset& test,
                                 const NnSelectOptions& options) {
    data.validate();
    schedule.validate();
    if (lambda_grid.empty()) throw ConfigError("select_lambda_nn: empty lambda grid");
    if (!(options.m_fraction > 0 && options.m_fraction < 1)) throw ConfigError("select_lambda_nn: m fraction must lie in (0, 1)");
    if (!(options.cv_holdout > 0 && options.cv_holdout < 1)) throw ConfigError("select_lambda_nn: holdout must lie in (0, 1)");
    const std::size_t n = data.size();
    const auto m = static_cast<std::size_t>(std::floor(options.m_fraction * static_cast<double>(n)));
    const BlockPlan plan = make_block_plan(n, m, options.blocks);
    const ClassifDataset prefix = data.slice(0, m);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    CounterRng split_rng(phase_seed(seed, kCvSplit));
    std::shuffle(perm.begin(), perm.end(), split_rng);
    const auto held = static_cast<std::size_t>(std::llround(options.cv_holdout * static_cast<double>(n)));
    if (held == 0 || held >= n) throw ConfigError("select_lambda_nn: hold-out split is empty");
    const ClassifDataset cv_train = data.rows(std::span<const std::size_t>(perm).first(n - held));
    const ClassifDataset cv_held = data.rows(std::span<const std::size_t>(perm).subspan(n - held));

    const Mlp init = init_mlp(data.dim(), schedule.hidden, phase_seed(seed, kInit));

    SelectionReport report;
    report.candidate_name = "lambda";
    report.seed = seed;
    std::vector<double> ddl_scores, cv_scores, cv_oracle;
    for (double lambda : lambda_grid) {
        if (!(lambda >= 0)) throw ConfigError("select_lambda_nn: lambda must be nonnegative");
        TrainSchedule s = schedule;
        s.l2_lambda = lambda;
        report.candidates.push_back(lambda);

        const Mlp full = train(init, data, s, phase_seed(seed, kFullTrain));
        report.reference_oracle.push_back(mean_log_loss_bits(full, test));

        const Mlp prefix_model = unlearn(full, prefix, s, phase_seed(seed, kUnlearn));
        const BlockCoding coded = block_sequential_codelength(data, plan, s, lambda, phase_seed(seed, kBlockCoding), prefix_model);
        ddl_scores.push_back(coded.trace.total_bits / static_cast<double>(n - m));

        const Mlp cv_model = train(init, cv_train, s, phase_seed(seed, kCvTrain));
        cv_scores.push_back(mean_log_loss_bits(cv_model, cv_held));
        cv_oracle.push_back(mean_log_loss_bits(cv_model, test));
    }
    report.add_method("ddl", std::move(ddl_scores), report.reference_oracle);
    report.add_method("cv", std::move(cv_scores), std::move(cv_oracle));
    return report;
}

} // namespace ddl
