#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "ddl/discrete.hpp"
#include "ddl/errors.hpp"
#include "ddl/model_select.hpp"

using namespace ddl;

namespace {

// Exact binomial coefficients up to n = 64 by Pascal's rule.
std::vector<std::vector<unsigned __int128>> pascal(int N) {
    std::vector<std::vector<unsigned __int128>> c(N + 1);
    for (int n = 0; n <= N; ++n) {
        c[n].assign(n + 1, 1);
        for (int k = 1; k < n; ++k) c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
    }
    return c;
}

// Product of KT conditionals, computed directly in long double.
long double kt_joint(const std::vector<std::uint32_t>& xs, const std::vector<std::uint8_t>& ys, std::uint32_t K) {
    std::vector<long double> ones(K, 0), tot(K, 0);
    long double p = 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const long double p1 = (ones[xs[i]] + 0.5L) / (tot[xs[i]] + 1.0L);
        p *= ys[i] ? p1 : 1 - p1;
        ones[xs[i]] += ys[i];
        tot[xs[i]] += 1;
    }
    return p;
}

DiscreteDataset from_bits(const std::vector<std::uint32_t>& xs, std::uint32_t mask, std::uint32_t K) {
    DiscreteDataset d;
    d.alphabet_size = K;
    d.features = xs;
    for (std::size_t i = 0; i < xs.size(); ++i) d.labels.push_back(static_cast<std::uint8_t>((mask >> i) & 1u));
    return d;
}

} // namespace

TEST_CASE("KT predictor is (k + 1/2) / (n + 1)") {
    KtState s(2);
    CHECK(kt_predict(s, 0) == 0.5);
    s.update(0, 1);
    s.update(0, 1);
    s.update(0, 0);
    CHECK(kt_predict(s, 0) == doctest::Approx(2.5 / 4.0));
    CHECK(kt_predict(s, 1) == 0.5);
    CHECK(s.consumed() == 3);
    CHECK(s.prob(0, 0) == doctest::Approx(1.5 / 4.0));
    CHECK_THROWS_AS(kt_predict(s, 2), ConfigError);
    CHECK_THROWS_AS(KtState(0), ConfigError);
}

TEST_CASE("log2_binomial agrees with exact integers for n <= 64") {
    const auto c = pascal(64);
    for (int n = 0; n <= 64; ++n)
        for (int k = 0; k <= n; ++k) {
            const double exact = std::log2(static_cast<long double>(c[n][k]));
            REQUIRE(std::abs(log2_binomial(n, k) - exact) <= 1e-9);
        }
    CHECK_THROWS_AS(log2_binomial(3, 4), ConfigError);
}

TEST_CASE("kt_stream_bits matches the product of sequential KT probabilities") {
    for (int n = 0; n <= 40; n += 3)
        for (int k = 0; k <= n; ++k) {
            std::vector<std::uint32_t> xs(n, 0);
            std::vector<std::uint8_t> ys(n, 0);
            for (int i = 0; i < k; ++i) ys[i] = 1;
            const double direct = -std::log2(static_cast<double>(kt_joint(xs, ys, 1)));
            REQUIRE(kt_stream_bits(k, n) == doctest::Approx(direct).epsilon(1e-12));
        }
    CHECK(kt_stream_bits(0, 0) == doctest::Approx(0.0));
    CHECK(kt_stream_bits(1, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(kt_stream_bits(2, 1), ConfigError);
}

TEST_CASE("KT joint probabilities over all label sequences sum to one") {
    const std::vector<std::vector<std::uint32_t>> xseqs{{0, 0, 0, 0, 0, 0, 0, 0},
                                                        {0, 1, 0, 1, 1, 0, 0, 1},
                                                        {2, 0, 1, 2, 2, 1, 0, 0, 1, 2}};
    for (const auto& xs : xseqs) {
        const std::uint32_t K = *std::max_element(xs.begin(), xs.end()) + 1;
        long double total = 0;
        for (std::uint32_t mask = 0; mask < (1u << xs.size()); ++mask) {
            const auto d = from_bits(xs, mask, K);
            total += std::exp2(-static_cast<long double>(kt_sequential_codelength(d, 0).total_bits));
        }
        CHECK(std::abs(static_cast<double>(total) - 1.0) <= 1e-9);
    }
}

TEST_CASE("block code satisfies Kraft with equality") {
    const std::vector<std::vector<std::uint32_t>> xseqs{{0, 0, 0, 0, 0, 0, 0, 0, 0},
                                                        {1, 0, 1, 0, 0, 1, 1, 1},
                                                        {2, 2, 0, 1, 0, 2, 1, 1, 0, 0}};
    for (const auto& xs : xseqs) {
        const std::uint32_t K = *std::max_element(xs.begin(), xs.end()) + 1;
        long double total = 0;
        for (std::uint32_t mask = 0; mask < (1u << xs.size()); ++mask)
            total += std::exp2(-static_cast<long double>(block_codelength(from_bits(xs, mask, K))));
        CHECK(std::abs(static_cast<double>(total) - 1.0) <= 1e-12);
    }
}

TEST_CASE("block code equals log2(n_x + 1) + log2 C(n_x, k_x) per symbol") {
    DiscreteDataset d{{0, 0, 0, 1, 1}, {1, 0, 1, 1, 1}, 3};
    const double expect = std::log2(4.0) + std::log2(3.0) + std::log2(3.0) + 0.0 + 0.0;
    CHECK(block_codelength(d) == doctest::Approx(expect));
}

TEST_CASE("block and sequential codes stay within 2 bits for n <= 12, K <= 3") {
    // Both codes depend on the data only through per-symbol (n_x, k_x), so
    // every count configuration covers every sequence with those counts.
    double worst = 0.0;
    for (int K = 1; K <= 3; ++K)
        for (int n = 1; n <= 12; ++n) {
            std::vector<int> nx(K, 0);
            std::function<void(int, int)> split_n = [&](int x, int left) {
                if (x == K - 1) {
                    nx[x] = left;
                    std::vector<int> kx(K, 0);
                    std::function<void(int)> split_k = [&](int y) {
                        if (y == K) {
                            double block = 0, seq = 0;
                            for (int s = 0; s < K; ++s) {
                                block += std::log2(nx[s] + 1.0) + log2_binomial(nx[s], kx[s]);
                                seq += kt_stream_bits(kx[s], nx[s]);
                            }
                            worst = std::max(worst, std::abs(block - seq));
                            return;
                        }
                        for (kx[y] = 0; kx[y] <= nx[y]; ++kx[y]) split_k(y + 1);
                    };
                    split_k(0);
                    return;
                }
                for (nx[x] = 0; nx[x] <= left; ++nx[x]) split_n(x + 1, left - nx[x]);
            };
            split_n(0, n);
        }
    CHECK(worst <= 2.0);
}

TEST_CASE("sequential trace is additive: C(n) - C(m)") {
    const std::vector<double> px{0.3, 0.7};
    const std::vector<double> p1{0.2, 0.9};
    const auto d = gen_bernoulli_k(px, p1, 500, 17);
    const double full = kt_sequential_codelength(d, 0).total_bits;
    for (std::size_t m : {0u, 1u, 100u, 250u, 499u, 500u}) {
        const auto tail = kt_sequential_codelength(d, m);
        const double head = kt_sequential_codelength(d.prefix(m), 0).total_bits;
        CHECK(tail.total_bits == doctest::Approx(full - head).epsilon(1e-12));
        CHECK(tail.per_sample_bits.size() == 500 - m);
        CHECK(tail.start_index == m);
        CHECK(std::accumulate(tail.per_sample_bits.begin(), tail.per_sample_bits.end(), 0.0) ==
              doctest::Approx(tail.total_bits));
    }
    CHECK_THROWS_AS(kt_sequential_codelength(d, 501), ConfigError);
}

TEST_CASE("sequential DDL is invariant to permuting the prefix") {
    const std::vector<double> px{0.25, 0.25, 0.5};
    const std::vector<double> p1{0.1, 0.6, 0.8};
    auto d = gen_bernoulli_k(px, p1, 400, 23);
    const double before = ddl_estimate(d, DdlConfig::with_alpha(0.5));
    std::vector<std::size_t> perm(200);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::rotate(perm.begin(), perm.begin() + 37, perm.end());
    auto shuffled = d;
    for (std::size_t i = 0; i < 200; ++i) {
        shuffled.features[i] = d.features[perm[i]];
        shuffled.labels[i] = d.labels[perm[i]];
    }
    CHECK(ddl_estimate(shuffled, DdlConfig::with_alpha(0.5)) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("ddl_estimate for both coders") {
    const std::vector<double> px{0.5, 0.5};
    const std::vector<double> p1{0.3, 0.7};
    const auto d = gen_bernoulli_k(px, p1, 2000, 4);
    const double seq = ddl_estimate(d, DdlConfig::with_alpha(0.5), Coder::sequential);
    const double blk = ddl_estimate(d, DdlConfig::with_alpha(0.5), Coder::block);
    // Each code differs from the other by a few bits in total, spread over 1000 samples.
    CHECK(std::abs(seq - blk) < 0.01);
    CHECK(seq == doctest::Approx(conditional_entropy(px, p1)).epsilon(0.05));
    CHECK_THROWS_AS(ddl_estimate(d, DdlConfig::with_prefix(2000)), ConfigError);
}

TEST_CASE("true generalization error is a cross-entropy bounded below by H(Y|X)") {
    const std::vector<double> px{0.4, 0.6};
    const std::vector<double> p1{0.25, 0.5};
    const double h = conditional_entropy(px, p1);
    const double expect_h = 0.4 * (-0.25 * std::log2(0.25) - 0.75 * std::log2(0.75)) + 0.6;
    CHECK(h == doctest::Approx(expect_h));
    CHECK(true_generalization_error(px, p1, p1) == doctest::Approx(h));
    const std::vector<double> off{0.3, 0.45};
    CHECK(true_generalization_error(px, p1, off) > h);
    const std::vector<double> zero{0.0, 0.5};
    CHECK_THROWS_AS(true_generalization_error(px, p1, zero), ConfigError);
    const std::vector<double> one{0.5, 1.0};
    CHECK_THROWS_AS(true_generalization_error(px, p1, one), ConfigError);
    // Degenerate labels have zero entropy.
    const std::vector<double> det{0.0, 1.0};
    CHECK(conditional_entropy(px, det) == 0.0);
}

TEST_CASE("kt_posterior_predictor uses the full counts") {
    DiscreteDataset d{{0, 0, 1, 0}, {1, 1, 0, 0}, 3};
    const auto p = kt_posterior_predictor(d);
    REQUIRE(p.size() == 3);
    CHECK(p[0] == doctest::Approx(2.5 / 4.0));
    CHECK(p[1] == doctest::Approx(0.5 / 2.0));
    CHECK(p[2] == doctest::Approx(0.5));
}

TEST_CASE("binary model codelengths") {
    DiscreteDataset d{{0, 1, 1, 0, 1, 0}, {0, 1, 1, 0, 1, 1}, 2};
    const auto c = BinaryCounts::of(d, d.size());
    CHECK(c.totals[0] == 3);
    CHECK(c.ones[1] == 3);
    CHECK(c.all_ones() == 4);
    CHECK(model_codelength(BinaryModel::independent, c) == doctest::Approx(kt_stream_bits(4, 6)));
    CHECK(model_codelength(BinaryModel::dependent, c) ==
          doctest::Approx(kt_stream_bits(1, 3) + kt_stream_bits(3, 3)));
    CHECK(model_codelength(BinaryModel::dependent, c) ==
          doctest::Approx(kt_sequential_codelength(d, 0).total_bits));
    DiscreteDataset k3{{2}, {1}, 3};
    CHECK_THROWS_AS(BinaryCounts::of(k3, 1), ConfigError);
    CHECK_THROWS_AS(BinaryCounts::of(d, 7), ConfigError);
}

TEST_CASE("model selectors pick the dependent model for a strong effect and break ties to independent") {
    const std::vector<double> px{0.5, 0.5};
    const std::vector<double> strong{0.05, 0.95};
    const auto d = gen_bernoulli_k(px, strong, 200, 8);
    CHECK(select_model_ddl(d, DdlConfig::with_alpha(0.5)) == BinaryModel::dependent);
    CHECK(select_model_mdl(d) == BinaryModel::dependent);

    // Only one symbol observed: both models assign identical codelengths.
    DiscreteDataset tie{{0, 0, 0, 0}, {1, 1, 1, 1}, 2};
    CHECK(select_model_mdl(tie) == BinaryModel::independent);
    CHECK(select_model_ddl(tie, DdlConfig::with_alpha(0.5)) == BinaryModel::independent);

    const std::vector<double> none{0.5, 0.5};
    int independent = 0;
    for (std::uint64_t s = 0; s < 50; ++s)
        independent += select_model_mdl(gen_bernoulli_k(px, none, 200, 100 + s)) == BinaryModel::independent;
    CHECK(independent >= 40);
}

TEST_CASE("model_oracle_error evaluates the fitted KT predictor") {
    DiscreteDataset d{{0, 1, 1, 0}, {0, 1, 1, 1}, 2};
    const auto c = BinaryCounts::of(d, 4);
    const double p0 = 0.3, p1 = 0.8, px1 = 0.6;
    const std::vector<double> px{1 - px1, px1}, truth{p0, p1};
    const double q_ind = (3 + 0.5) / 5.0;
    const std::vector<double> ind{q_ind, q_ind};
    CHECK(model_oracle_error(BinaryModel::independent, c, p0, p1, px1) ==
          doctest::Approx(true_generalization_error(px, truth, ind)));
    const std::vector<double> dep{1.5 / 3.0, 2.5 / 3.0};
    CHECK(model_oracle_error(BinaryModel::dependent, c, p0, p1, px1) ==
          doctest::Approx(true_generalization_error(px, truth, dep)));
}

TEST_CASE("parameter grid covers the closed cube") {
    const auto g = make_param_grid(0.25);
    CHECK(g.size() == 125);
    CHECK(g.front().p1_given_0 == 0.0);
    CHECK(g.back().p1_given_0 == 1.0);
    CHECK(g.back().px1 == 1.0);
    CHECK(make_param_grid(0.05).size() == 21 * 21 * 21);
    CHECK_THROWS_AS(make_param_grid(0.3), ConfigError);
    CHECK_THROWS_AS(make_param_grid(0.0), ConfigError);
}

TEST_CASE("worst_case_regret is nonnegative and independent of the thread count") {
    const auto grid = make_param_grid(0.25);
    const std::vector<Selector> sel{Selector::ddl(0.5), Selector::mdl()};
    const auto a = worst_case_regret(sel, 40, grid, 30, 5, 1);
    const auto b = worst_case_regret(sel, 40, grid, 30, 5, 4);
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a[i].worst_regret_bits >= 0.0);
        CHECK(a[i].worst_regret_bits == b[i].worst_regret_bits);
        CHECK(a[i].std_error == b[i].std_error);
    }
    const auto single = worst_case_regret(Selector::mdl(), 40, grid, 30, 5, 2);
    CHECK(single.worst_regret_bits == a[1].worst_regret_bits);
    CHECK_THROWS_AS(worst_case_regret(sel, 40, grid, 0, 5, 1), ConfigError);
}
