#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ddl::cli {

/// Flags shared by every subcommand.
struct Common {
    std::uint64_t seed = 1;
    std::size_t trials = 0; // 0: subcommand default
    std::string out;        // empty: stdout
    std::string config;
    unsigned threads = 0;   // 0: hardware concurrency
};

/// "a,b,c", "linspace:lo:hi:k", "logspace:lo:hi:k" (base-10 exponents) or
/// "range:a:b" (integers, inclusive). Throws ConfigError.
std::vector<double> parse_grid(const std::string& spec);

struct BernoulliSweepArgs {
    Common common;
    int K = 10;
    std::string n_grid = "10000";
    std::string alpha_grid = "linspace:0.05:0.95:19";
    double fK = 1.0;
    /// P(y=1|x) per symbol; empty spreads K values evenly over [0.2, 0.8].
    std::string p1_grid;
};

struct ModelSelectArgs {
    Common common;
    std::size_t n = 100;
    double step = 0.05;
    std::string alpha_grid = "0.5";
};

struct RegressionArgs {
    Common common;
    std::string mode = "lambda";
    std::size_t n = 500;
    double noise = 0.15;
    bool noise_is_stddev = false;
    std::string grid;    // empty: mode default
    std::string methods; // empty: mode default
    int order = 20;      // lambda mode
    double lambda = 0.0; // order mode
    double alpha = 0.5;
    double holdout = 0.25;
    std::size_t quadrature_nodes = 10001;
};

struct NnToyArgs {
    Common common;
    std::size_t n = 2000;
    long dims = 10;
    double separation = 2.0;
    std::size_t test_n = 10000;
    std::string grid = "0,1e-4,1e-3,3e-3,1e-2,3e-2,1e-1";
    double m_fraction = 0.8;
    std::size_t blocks = 5;
    double holdout = 0.2;
    long hidden = 16;
    double train_lr = 0.05;
    int train_epochs = 30;
    double unlearn_high_lr = 0.2;
    int unlearn_high_epochs = 5;
    double unlearn_low_lr = 0.05;
    int unlearn_low_epochs = 5;
    int readd_epochs = 1;
    std::size_t batch_size = 32;
};

struct AnalysisCurvesArgs {
    Common common;
    std::string K_grid = "10";
    std::string n_grid = "10000";
    double fK = 1.0;
    std::string alpha_grid = "linspace:0.01:0.99:99";
};

inline constexpr std::size_t kBernoulliTrials = 200;
inline constexpr std::size_t kModelSelectTrials = 1000;
inline constexpr std::size_t kRegressionTrials = 200;
inline constexpr std::size_t kNnTrials = 50;

// Each writes a complete CSV (schema comment, header, rows) to `os`.
void run_bernoulli_sweep(const BernoulliSweepArgs& args, std::ostream& os);
void run_model_select(const ModelSelectArgs& args, std::ostream& os);
void run_regression(const RegressionArgs& args, std::ostream& os);
void run_nn_toy(const NnToyArgs& args, std::ostream& os);
void run_analysis_curves(const AnalysisCurvesArgs& args, std::ostream& os);

/// Parses argv (without the program name), applies the optional JSON config,
/// runs the subcommand and returns the process exit code:
/// 0 success, 2 configuration or I/O error, 3 computation error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ddl::cli
