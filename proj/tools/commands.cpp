#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddl/analysis.hpp"
#include "ddl/discrete.hpp"
#include "ddl/errors.hpp"
#include "ddl/model_select.hpp"
#include "ddl/neural.hpp"
#include "ddl/parallel.hpp"
#include "ddl/regression.hpp"
#include "ddl/rng.hpp"

namespace ddl::cli {

namespace {

unsigned worker_count(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t trials_or(const Common& c, std::size_t fallback) { return c.trials == 0 ? fallback : c.trials; }

// Two independent seeds per trial, a pure function of (seed, trial).
std::pair<std::uint64_t, std::uint64_t> trial_seeds(std::uint64_t seed, std::size_t trial) {
    CounterRng rng = CounterRng(seed).split(trial);
    const std::uint64_t a = rng();
    return {a, rng()};
}

double parse_number(const std::string& token, const std::string& spec) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ConfigError("grid '" + spec + "': '" + token + "' is not a number");
    }
    if (used != token.size() || !std::isfinite(v))
        throw ConfigError("grid '" + spec + "': '" + token + "' is not a finite number");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

std::vector<std::size_t> as_sizes(const std::vector<double>& v, const char* what) {
    std::vector<std::size_t> out;
    for (double x : v) {
        if (x < 1 || x != std::floor(x)) throw ConfigError(std::string(what) + " must be positive integers");
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

void schema_line(std::ostream& os, const char* name) { os << "# schema: ddl." << name << "/1\n"; }

} // namespace

std::vector<double> parse_grid(const std::string& spec) {
    if (spec.empty()) throw ConfigError("empty grid");
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        std::vector<double> out;
        for (const auto& tok : split(spec, ',')) out.push_back(parse_number(tok, spec));
        return out;
    }
    const std::string kind = spec.substr(0, colon);
    const auto args = split(spec.substr(colon + 1), ':');
    if (kind == "range") {
        if (args.size() != 2) throw ConfigError("grid '" + spec + "': expected range:a:b");
        const double a = parse_number(args[0], spec);
        const double b = parse_number(args[1], spec);
        if (a != std::floor(a) || b != std::floor(b) || b < a)
            throw ConfigError("grid '" + spec + "': range needs integers a <= b");
        std::vector<double> out;
        for (double x = a; x <= b; x += 1.0) out.push_back(x);
        return out;
    }
    if (kind != "linspace" && kind != "logspace")
        throw ConfigError("grid '" + spec + "': unknown kind '" + kind + "'");
    if (args.size() != 3) throw ConfigError("grid '" + spec + "': expected " + kind + ":lo:hi:count");
    const double lo = parse_number(args[0], spec);
    const double hi = parse_number(args[1], spec);
    const double k = parse_number(args[2], spec);
    if (k < 1 || k != std::floor(k)) throw ConfigError("grid '" + spec + "': count must be a positive integer");
    const auto count = static_cast<std::size_t>(k);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = kind == "logspace" ? std::pow(10.0, t) : t;
    }
    return out;
}

void run_bernoulli_sweep(const BernoulliSweepArgs& args, std::ostream& os) {
    if (args.K < 1) throw ConfigError("bernoulli-sweep: K must be >= 1");
    const auto ns = as_sizes(parse_grid(args.n_grid), "n");
    const auto alphas = parse_grid(args.alpha_grid);
    const std::size_t K = static_cast<std::size_t>(args.K);

    std::vector<double> p1;
    if (args.p1_grid.empty()) {
        for (std::size_t k = 0; k < K; ++k) p1.push_back(K == 1 ? 0.5 : 0.2 + 0.6 * double(k) / double(K - 1));
    } else {
        p1 = parse_grid(args.p1_grid);
        if (p1.size() != K) throw ConfigError("bernoulli-sweep: p1 grid needs exactly K values");
    }
    const std::vector<double> px(K, 1.0 / double(K));
    const std::size_t trials = trials_or(args.common, kBernoulliTrials);

    schema_line(os, "bernoulli-sweep");
    os << "kind,K,n,fK,alpha,mse,std_error,trials\n";
    for (std::size_t n : ns) {
        AnalysisParams ap{args.K, double(n), args.fK};
        ap.validate();
        for (double a : alphas) static_cast<void>(DdlConfig::with_alpha(a).resolve(n));

        // sq[t][a]: squared error of the estimate for trial t at split a.
        std::vector<std::vector<double>> sq(trials, std::vector<double>(alphas.size()));
        parallel_for(trials, worker_count(args.common.threads), [&](std::size_t t) {
            const auto data = gen_bernoulli_k(px, p1, n, trial_seeds(args.common.seed, t).first);
            const double truth = true_generalization_error(px, p1, kt_posterior_predictor(data));
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                const double d = ddl_estimate(data, DdlConfig::with_alpha(alphas[a])) - truth;
                sq[t][a] = d * d;
            }
        });
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            os << "analytic," << args.K << ',' << n << ',' << format_number(args.fK) << ',' << format_number(alphas[a])
               << ',' << format_number(mse_alpha(alphas[a], ap)) << ",0,0\n";
            double mean = 0.0, m2 = 0.0;
            for (std::size_t t = 0; t < trials; ++t) mean += sq[t][a];
            mean /= double(trials);
            for (std::size_t t = 0; t < trials; ++t) m2 += (sq[t][a] - mean) * (sq[t][a] - mean);
            const double se = trials > 1 ? std::sqrt(m2 / double(trials - 1) / double(trials)) : 0.0;
            os << "monte_carlo," << args.K << ',' << n << ',' << format_number(args.fK) << ','
               << format_number(alphas[a]) << ',' << format_number(mean) << ',' << format_number(se) << ',' << trials
               << '\n';
        }
    }
}

void run_model_select(const ModelSelectArgs& args, std::ostream& os) {
    const auto alphas = parse_grid(args.alpha_grid);
    if (args.n < 2) throw ConfigError("model-select: n must be >= 2");
    std::vector<Selector> selectors;
    for (double a : alphas) {
        static_cast<void>(DdlConfig::with_alpha(a).resolve(args.n));
        selectors.push_back(Selector::ddl(a));
    }
    selectors.push_back(Selector::mdl());
    const auto grid = make_param_grid(args.step);
    const auto results = worst_case_regret(selectors, args.n, grid, trials_or(args.common, kModelSelectTrials),
                                           args.common.seed, worker_count(args.common.threads));

    schema_line(os, "model-select");
    os << "alpha,n,method,worst_regret_bits,std_error,p1_given_0,p1_given_1,px1\n";
    for (std::size_t i = 0; i < selectors.size(); ++i) {
        const bool ddl = selectors[i].kind == Selector::Kind::ddl;
        const auto& r = results[i];
        os << (ddl ? format_number(selectors[i].alpha) : std::string()) << ',' << args.n << ','
           << (ddl ? "ddl" : "mdl") << ',' << format_number(r.worst_regret_bits) << ',' << format_number(r.std_error)
           << ',' << format_number(r.argmax.p1_given_0) << ',' << format_number(r.argmax.p1_given_1) << ','
           << format_number(r.argmax.px1) << '\n';
    }
}

void run_regression(const RegressionArgs& args, std::ostream& os) {
    const bool lambda_mode = args.mode == "lambda";
    if (!lambda_mode && args.mode != "order") throw ConfigError("regression: --mode must be lambda or order");
    if (!(args.noise > 0)) throw ConfigError("regression: noise must be positive");
    const double variance = args.noise_is_stddev ? args.noise * args.noise : args.noise;

    std::vector<RegCandidate> grid;
    if (lambda_mode) {
        for (double l : parse_grid(args.grid.empty() ? "logspace:-8:2:21" : args.grid)) grid.push_back({args.order, l});
    } else {
        for (double M : parse_grid(args.grid.empty() ? "range:0:20" : args.grid)) {
            if (M < 0 || M != std::floor(M)) throw ConfigError("regression: orders must be nonnegative integers");
            grid.push_back({static_cast<int>(M), args.lambda});
        }
    }
    std::vector<RegMethod> methods;
    for (const auto& name : split(args.methods.empty() ? (lambda_mode ? "ddl,cv,bayes" : "ddl,cv,mdl") : args.methods, ','))
        methods.push_back(parse_reg_method(name));

    RegressionOptions opts;
    opts.alpha = args.alpha;
    opts.holdout_fraction = args.holdout;
    opts.quadrature_nodes = args.quadrature_nodes;

    const std::size_t trials = trials_or(args.common, kRegressionTrials);
    std::vector<std::string> rows(trials);
    parallel_for(trials, worker_count(args.common.threads), [&](std::size_t t) {
        const auto [data_seed, cv_seed] = trial_seeds(args.common.seed, t);
        RegressionOptions o = opts;
        o.cv_seed = cv_seed;
        SelectionReport report = select(gen_sine(args.n, variance, data_seed), grid, methods, o);
        report.seed = data_seed;
        std::ostringstream s;
        write_selection_csv_rows(s, report, t);
        rows[t] = s.str();
    });

    schema_line(os, lambda_mode ? "regression-lambda" : "regression-order");
    write_selection_csv_header(os, true);
    for (const auto& r : rows) os << r;
}

void run_nn_toy(const NnToyArgs& args, std::ostream& os) {
    const auto grid = parse_grid(args.grid);
    TrainSchedule sched;
    sched.hidden = args.hidden;
    sched.train_lr = args.train_lr;
    sched.train_epochs = args.train_epochs;
    sched.unlearn_high_lr = args.unlearn_high_lr;
    sched.unlearn_high_epochs = args.unlearn_high_epochs;
    sched.unlearn_low_lr = args.unlearn_low_lr;
    sched.unlearn_low_epochs = args.unlearn_low_epochs;
    sched.readd_epochs_per_block = args.readd_epochs;
    sched.batch_size = args.batch_size;
    sched.validate();
    NnSelectOptions opts{args.m_fraction, args.blocks, args.holdout};
    if (args.dims < 1 || args.test_n < 1) throw ConfigError("nn-toy: dims and test-n must be positive");

    const std::size_t trials = trials_or(args.common, kNnTrials);
    std::vector<std::string> rows(trials);
    parallel_for(trials, worker_count(args.common.threads), [&](std::size_t t) {
        const auto [data_seed, train_seed] = trial_seeds(args.common.seed, t);
        const auto data = gen_gaussian_classes(args.n, args.dims, args.separation, data_seed);
        const auto test = gen_gaussian_classes(args.test_n, args.dims, args.separation, ~data_seed);
        const auto report = select_lambda_nn(data, grid, sched, train_seed, test, opts);
        std::ostringstream s;
        for (std::size_t c = 0; c < report.candidates.size(); ++c)
            for (const auto& m : report.methods)
                s << t << ',' << format_number(report.candidates[c]) << ',' << m.method << ','
                  << format_number(m.scores[c]) << ',' << format_number(m.oracle_errors[c]) << ','
                  << format_number(m.regret_bits) << ',' << (m.chosen == c ? 1 : 0) << '\n';
        rows[t] = s.str();
    });

    schema_line(os, "nn-toy");
    os << "trial,lambda,method,score_bits,oracle_bits,regret_bits,chosen\n";
    for (const auto& r : rows) os << r;
}

void run_analysis_curves(const AnalysisCurvesArgs& args, std::ostream& os) {
    const auto Ks = parse_grid(args.K_grid);
    const auto ns = parse_grid(args.n_grid);
    const auto alphas = parse_grid(args.alpha_grid);
    for (double a : alphas)
        if (!(a > 0 && a < 1)) throw ConfigError("analysis-curves: alpha must lie in (0, 1)");

    schema_line(os, "analysis-curves");
    os << "K,n,fK,alpha,mse,derivative\n";
    for (double K : Ks) {
        if (K < 1 || K != std::floor(K)) throw ConfigError("analysis-curves: K must be positive integers");
        for (double n : ns) {
            AnalysisParams p{static_cast<int>(K), n, args.fK};
            p.validate();
            for (double a : alphas)
                os << format_number(K) << ',' << format_number(n) << ',' << format_number(args.fK) << ','
                   << format_number(a) << ',' << format_number(mse_alpha(a, p)) << ','
                   << format_number(mse_alpha_derivative(a, p)) << '\n';
        }
    }
}

namespace {

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Base seed")->capture_default_str();
    sub->add_option("--trials", c.trials, "Trials (0: subcommand default)")->capture_default_str();
    sub->add_option("--out", c.out, "Output CSV path (default stdout)");
    sub->add_option("--config", c.config, "JSON config; flags override its values");
    sub->add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str();
}

std::string scalar_text(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw ConfigError("config key '" + key + "': expected a string, number or boolean");
}

// Installs config values as option defaults so that explicit flags still win.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file '" + path + "': top level must be an object");
    for (const auto& [key, value] : j.items()) {
        CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
        if (opt == nullptr) throw ConfigError("config file '" + path + "': unknown key '" + key + "'");
        std::string text;
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) text += (i ? "," : "") + scalar_text(value[i], key);
        } else {
            text = scalar_text(value, key);
        }
        try {
            opt->default_val(text);
        } catch (const CLI::Error& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

void emit(const Common& c, std::ostream& out, const std::function<void(std::ostream&)>& body) {
    std::ostringstream buf;
    buf.imbue(std::locale::classic());
    body(buf);
    if (c.out.empty()) {
        out << buf.str();
        return;
    }
    std::ofstream file(c.out, std::ios::binary);
    if (!file) throw ConfigError("cannot open output file '" + c.out + "'");
    file << buf.str();
    if (!file.flush()) throw ConfigError("failed writing output file '" + c.out + "'");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Differential description length experiments", "ddl_cli"};
    app.require_subcommand(1);

    BernoulliSweepArgs bern;
    auto* s_bern = app.add_subcommand("bernoulli-sweep", "Analytic and Monte-Carlo MSE of the DDL estimate vs alpha");
    add_common(s_bern, bern.common);
    s_bern->add_option("--K", bern.K, "Feature alphabet size")->capture_default_str();
    s_bern->add_option("--n", bern.n_grid, "Sample sizes (grid)")->capture_default_str();
    s_bern->add_option("--alpha", bern.alpha_grid, "Split fractions (grid)")->capture_default_str();
    s_bern->add_option("--fK", bern.fK, "Variance factor of the analytic curve")->capture_default_str();
    s_bern->add_option("--p1", bern.p1_grid, "P(y=1|x) per symbol (grid of K values)");

    ModelSelectArgs ms;
    auto* s_ms = app.add_subcommand("model-select", "Worst-case regret of DDL vs full-codelength model selection");
    add_common(s_ms, ms.common);
    s_ms->add_option("--n", ms.n, "Training set size")->capture_default_str();
    s_ms->add_option("--step", ms.step, "Parameter grid step")->capture_default_str();
    s_ms->add_option("--alpha", ms.alpha_grid, "DDL split fractions (grid)")->capture_default_str();

    RegressionArgs reg;
    auto* s_reg = app.add_subcommand("regression", "Polynomial ridge selection on the sine task");
    add_common(s_reg, reg.common);
    s_reg->add_option("--mode", reg.mode, "lambda or order")->check(CLI::IsMember({"lambda", "order"}))->capture_default_str();
    s_reg->add_option("--n", reg.n, "Training set size")->capture_default_str();
    s_reg->add_option("--noise", reg.noise, "Noise variance")->capture_default_str();
    s_reg->add_flag("--noise-is-stddev", reg.noise_is_stddev, "Read --noise as a standard deviation");
    s_reg->add_option("--grid", reg.grid, "Lambdas (lambda mode) or orders (order mode)");
    s_reg->add_option("--methods", reg.methods, "Comma list of ddl, cv, mdl, bayes");
    s_reg->add_option("--order", reg.order, "Polynomial order in lambda mode")->capture_default_str();
    s_reg->add_option("--lambda", reg.lambda, "Ridge penalty in order mode")->capture_default_str();
    s_reg->add_option("--alpha", reg.alpha, "DDL split fraction")->capture_default_str();
    s_reg->add_option("--holdout", reg.holdout, "Hold-out fraction")->capture_default_str();
    s_reg->add_option("--quadrature-nodes", reg.quadrature_nodes, "Simpson nodes for the oracle")->capture_default_str();

    NnToyArgs nn;
    auto* s_nn = app.add_subcommand("nn-toy", "L2 selection for a small network on two Gaussian classes");
    add_common(s_nn, nn.common);
    s_nn->add_option("--n", nn.n, "Training set size")->capture_default_str();
    s_nn->add_option("--dims", nn.dims, "Input dimension")->capture_default_str();
    s_nn->add_option("--separation", nn.separation, "Distance between class means")->capture_default_str();
    s_nn->add_option("--test-n", nn.test_n, "Oracle test set size")->capture_default_str();
    s_nn->add_option("--grid", nn.grid, "Lambdas (grid)")->capture_default_str();
    s_nn->add_option("--m-fraction", nn.m_fraction, "Prefix fraction")->capture_default_str();
    s_nn->add_option("--blocks", nn.blocks, "Blocks after the prefix")->capture_default_str();
    s_nn->add_option("--holdout", nn.holdout, "Hold-out fraction")->capture_default_str();
    s_nn->add_option("--hidden", nn.hidden, "Hidden units")->capture_default_str();
    s_nn->add_option("--train-lr", nn.train_lr)->capture_default_str();
    s_nn->add_option("--train-epochs", nn.train_epochs)->capture_default_str();
    s_nn->add_option("--unlearn-high-lr", nn.unlearn_high_lr)->capture_default_str();
    s_nn->add_option("--unlearn-high-epochs", nn.unlearn_high_epochs)->capture_default_str();
    s_nn->add_option("--unlearn-low-lr", nn.unlearn_low_lr)->capture_default_str();
    s_nn->add_option("--unlearn-low-epochs", nn.unlearn_low_epochs)->capture_default_str();
    s_nn->add_option("--readd-epochs", nn.readd_epochs, "Epochs per re-added block")->capture_default_str();
    s_nn->add_option("--batch-size", nn.batch_size)->capture_default_str();

    AnalysisCurvesArgs ac;
    auto* s_ac = app.add_subcommand("analysis-curves", "Analytic MSE(alpha) curves");
    add_common(s_ac, ac.common);
    s_ac->add_option("--K", ac.K_grid, "Alphabet sizes (grid)")->capture_default_str();
    s_ac->add_option("--n", ac.n_grid, "Sample sizes (grid)")->capture_default_str();
    s_ac->add_option("--fK", ac.fK)->capture_default_str();
    s_ac->add_option("--alpha", ac.alpha_grid, "Split fractions (grid)")->capture_default_str();

    try {
        // The config file is applied before parsing so explicit flags override it.
        if (!args.empty()) {
            if (CLI::App* sub = app.get_subcommand_no_throw(args.front())) {
                for (std::size_t i = 1; i < args.size(); ++i) {
                    std::string path;
                    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
                    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
                    if (!path.empty()) apply_config(sub, path);
                }
            }
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);

        if (s_bern->parsed()) emit(bern.common, out, [&](std::ostream& os) { run_bernoulli_sweep(bern, os); });
        else if (s_ms->parsed()) emit(ms.common, out, [&](std::ostream& os) { run_model_select(ms, os); });
        else if (s_reg->parsed()) emit(reg.common, out, [&](std::ostream& os) { run_regression(reg, os); });
        else if (s_nn->parsed()) emit(nn.common, out, [&](std::ostream& os) { run_nn_toy(nn, os); });
        else if (s_ac->parsed()) emit(ac.common, out, [&](std::ostream& os) { run_analysis_curves(ac, os); });
        return 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ComputationError& e) {
        err << "computation error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "computation error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace ddl::cli
