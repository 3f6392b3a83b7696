#include "ddl/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ddl/discrete.hpp"
#include "ddl/errors.hpp"
#include "ddl/parallel.hpp"
#include "ddl/rng.hpp"

namespace ddl {

BinaryCounts BinaryCounts::of(const DiscreteDataset& data, std::size_t upto) {
    if (data.alphabet_size != 2) throw ConfigError("BinaryCounts: requires a binary feature (K = 2)");
    if (upto > data.size()) throw ConfigError("BinaryCounts: prefix exceeds dataset size");
    BinaryCounts c;
    for (std::size_t i = 0; i < upto; ++i) {
        c.ones[data.features[i]] += data.labels[i];
        ++c.totals[data.features[i]];
    }
    return c;
}

double model_codelength(BinaryModel model, const BinaryCounts& counts) {
    if (model == BinaryModel::independent) return kt_stream_bits(counts.all_ones(), counts.all_totals());
    return kt_stream_bits(counts.ones[0], counts.totals[0]) + kt_stream_bits(counts.ones[1], counts.totals[1]);
}

namespace {

BinaryModel pick(double independent_score, double dependent_score) {
    return dependent_score < independent_score ? BinaryModel::dependent : BinaryModel::independent;
}

/// Table of lgamma(j + 1/2) and lgamma(j + 1) so the inner regret loop avoids libm calls.
/// Values are bit-identical to kt_stream_bits.
class KtTable {
public:
    explicit KtTable(std::size_t n) : half_(n + 1), whole_(n + 1) {
        for (std::size_t j = 0; j <= n; ++j) {
            half_[j] = std::lgamma(static_cast<double>(j) + 0.5);
            whole_[j] = std::lgamma(static_cast<double>(j) + 1.0);
        }
    }
    [[nodiscard]] double bits(std::uint64_t k, std::uint64_t n) const {
        const double log_p = half_[k] + half_[n - k] - kLogPi - whole_[n];
        return -log_p / std::numbers::ln2;
    }
    [[nodiscard]] double model_bits(BinaryModel model, const BinaryCounts& c) const {
        if (model == BinaryModel::independent) return bits(c.all_ones(), c.all_totals());
        return bits(c.ones[0], c.totals[0]) + bits(c.ones[1], c.totals[1]);
    }

private:
    static inline const double kLogPi = std::log(std::numbers::pi);
    std::vector<double> half_;
    std::vector<double> whole_;
};

} // namespace

BinaryModel select_model_ddl(const DiscreteDataset& data, const DdlConfig& cfg) {
    data.validate();
    const std::size_t n = data.size();
    const std::size_t m = cfg.resolve(n);
    const auto full = BinaryCounts::of(data, n);
    const auto prefix = BinaryCounts::of(data, m);
    const double span = static_cast<double>(n - m);
    const double s1 = (model_codelength(BinaryModel::independent, full) -
                       model_codelength(BinaryModel::independent, prefix)) / span;
    const double s2 = (model_codelength(BinaryModel::dependent, full) -
                       model_codelength(BinaryModel::dependent, prefix)) / span;
    return pick(s1, s2);
}

BinaryModel select_model_mdl(const DiscreteDataset& data) {
    data.validate();
    const auto full = BinaryCounts::of(data, data.size());
    return pick(model_codelength(BinaryModel::independent, full), model_codelength(BinaryModel::dependent, full));
}

double model_oracle_error(BinaryModel model, const BinaryCounts& counts, double p1_given_0, double p1_given_1,
                          double px1) {
    const double px[2] = {1.0 - px1, px1};
    const double p1[2] = {p1_given_0, p1_given_1};
    double hat[2];
    if (model == BinaryModel::independent) {
        const double q = (static_cast<double>(counts.all_ones()) + 0.5) / (static_cast<double>(counts.all_totals()) + 1.0);
        hat[0] = hat[1] = q;
    } else {
        for (int x = 0; x < 2; ++x)
            hat[x] = (static_cast<double>(counts.ones[x]) + 0.5) / (static_cast<double>(counts.totals[x]) + 1.0);
    }
    return true_generalization_error(px, p1, hat);
}

std::vector<ParamPoint> make_param_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) throw ConfigError("make_param_grid: step must lie in (0, 1]");
    const auto levels = static_cast<std::size_t>(std::llround(1.0 / step));
    if (std::abs(static_cast<double>(levels) * step - 1.0) > 1e-9)
        throw ConfigError("make_param_grid: 1 / step must be an integer");
    std::vector<ParamPoint> grid;
    grid.reserve((levels + 1) * (levels + 1) * (levels + 1));
    for (std::size_t a = 0; a <= levels; ++a)
        for (std::size_t b = 0; b <= levels; ++b)
            for (std::size_t c = 0; c <= levels; ++c)
                grid.push_back({static_cast<double>(a) * step, static_cast<double>(b) * step,
                                static_cast<double>(c) * step});
    return grid;
}

std::vector<WorstCaseRegret> worst_case_regret(std::span<const Selector> selectors, std::size_t n,
                                               std::span<const ParamPoint> grid, std::size_t trials,
                                               std::uint64_t seed, unsigned threads) {
    if (grid.empty()) throw ConfigError("worst_case_regret: empty parameter grid");
    if (trials == 0) throw ConfigError("worst_case_regret: trials must be positive");
    if (selectors.empty()) throw ConfigError("worst_case_regret: no selectors");
    if (n < 2) throw ConfigError("worst_case_regret: n must be at least 2");

    std::vector<std::size_t> splits(selectors.size(), 0);
    for (std::size_t s = 0; s < selectors.size(); ++s) {
        if (selectors[s].kind == Selector::Kind::ddl) splits[s] = DdlConfig::with_alpha(selectors[s].alpha).resolve(n);
    }

    const KtTable table(n);
    const std::size_t S = selectors.size();
    // mean and second moment of regret per (grid point, selector)
    std::vector<double> mean(grid.size() * S, 0.0), second(grid.size() * S, 0.0);

    parallel_for(grid.size(), threads, [&](std::size_t g) {
        const ParamPoint& pt = grid[g];
        CounterRng rng(seed, g);
        std::vector<std::uint8_t> xs(n), ys(n);
        std::vector<BinaryCounts> prefix(n + 1);
        for (std::size_t t = 0; t < trials; ++t) {
            BinaryCounts c;
            for (std::size_t i = 0; i < n; ++i) {
                prefix[i] = c;
                const std::uint8_t x = rng.uniform() < pt.px1 ? 1 : 0;
                const std::uint8_t y = rng.uniform() < (x ? pt.p1_given_1 : pt.p1_given_0) ? 1 : 0;
                c.ones[x] += y;
                ++c.totals[x];
            }
            prefix[n] = c;
            const double g1 = model_oracle_error(BinaryModel::independent, c, pt.p1_given_0, pt.p1_given_1, pt.px1);
            const double g2 = model_oracle_error(BinaryModel::dependent, c, pt.p1_given_0, pt.p1_given_1, pt.px1);
            const double best = std::min(g1, g2);
            const double full1 = table.model_bits(BinaryModel::independent, c);
            const double full2 = table.model_bits(BinaryModel::dependent, c);
            for (std::size_t s = 0; s < S; ++s) {
                BinaryModel chosen;
                if (selectors[s].kind == Selector::Kind::mdl) {
                    chosen = pick(full1, full2);
                } else {
                    const auto& pc = prefix[splits[s]];
                    chosen = pick(full1 - table.model_bits(BinaryModel::independent, pc),
                                  full2 - table.model_bits(BinaryModel::dependent, pc));
                }
                const double r = (chosen == BinaryModel::independent ? g1 : g2) - best;
                mean[g * S + s] += r;
                second[g * S + s] += r * r;
            }
        }
    });

    std::vector<WorstCaseRegret> out(S);
    const double T = static_cast<double>(trials);
    for (std::size_t s = 0; s < S; ++s) {
        std::size_t arg = 0;
        double worst = -1.0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double mu = mean[g * S + s] / T;
            if (mu > worst) {
                worst = mu;
                arg = g;
            }
        }
        const double mu = mean[arg * S + s] / T;
        const double var = trials > 1 ? std::max(0.0, (second[arg * S + s] / T - mu * mu) * T / (T - 1.0)) : 0.0;
        out[s] = {worst, std::sqrt(var / T), grid[arg]};
    }
    return out;
}

WorstCaseRegret worst_case_regret(const Selector& selector, std::size_t n, std::span<const ParamPoint> grid,
                                  std::size_t trials, std::uint64_t seed, unsigned threads) {
    const Selector one[1] = {selector};
    return worst_case_regret(one, n, grid, trials, seed, threads).front();
}

} // namespace ddl
