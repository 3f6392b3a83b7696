#include "ddl/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "ddl/errors.hpp"

namespace ddl {

double regret(std::span<const double> oracle_errors, std::size_t chosen) {
    if (oracle_errors.empty()) throw ConfigError("regret: empty oracle list");
    if (chosen >= oracle_errors.size()) throw ConfigError("regret: chosen index out of range");
    return oracle_errors[chosen] - *std::min_element(oracle_errors.begin(), oracle_errors.end());
}

std::size_t argmin_tiebreak(std::span<const double> scores) {
    if (scores.empty()) throw ConfigError("argmin_tiebreak: empty score list");
    std::size_t best = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i]))
            throw ComputationError("argmin_tiebreak: score of candidate " + std::to_string(i) + " is NaN");
        if (scores[i] < scores[best]) best = i;
    }
    return best;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ConfigError("spearman: need two equal-length lists of size >= 2");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0 || sbb == 0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

MethodResult& SelectionReport::add_method(std::string name, std::vector<double> scores,
                                          std::vector<double> oracle_errors) {
    if (scores.size() != candidates.size() || oracle_errors.size() != candidates.size())
        throw ConfigError("SelectionReport: method '" + name + "' does not cover the candidate grid");
    if (reference_oracle.size() != candidates.size())
        throw ConfigError("SelectionReport: reference oracle not set");
    MethodResult r;
    r.method = std::move(name);
    r.chosen = argmin_tiebreak(scores);
    r.regret_bits = oracle_errors[r.chosen] - *std::min_element(reference_oracle.begin(), reference_oracle.end());
    r.scores = std::move(scores);
    r.oracle_errors = std::move(oracle_errors);
    methods.push_back(std::move(r));
    return methods.back();
}

const MethodResult& SelectionReport::method(const std::string& name) const {
    for (const auto& m : methods)
        if (m.method == name) return m;
    throw ConfigError("SelectionReport: no method named '" + name + "'");
}

void SelectionReport::validate() const {
    if (reference_oracle.size() != candidates.size()) throw ConfigError("SelectionReport: reference oracle size mismatch");
    for (const auto& m : methods)
        if (m.scores.size() != candidates.size() || m.oracle_errors.size() != candidates.size() ||
            m.chosen >= candidates.size())
            throw ConfigError("SelectionReport: method '" + m.method + "' is inconsistent with the grid");
}

void to_json(nlohmann::json& j, const SelectionReport& report) {
    report.validate();
    j = nlohmann::json::object();
    j["candidate_name"] = report.candidate_name;
    j["candidates"] = report.candidates;
    j["reference_oracle_bits"] = report.reference_oracle;
    j["seed"] = report.seed;
    auto methods = nlohmann::json::array();
    for (const auto& m : report.methods) {
        methods.push_back({{"method", m.method},
                           {"scores", m.scores},
                           {"oracle_error_bits", m.oracle_errors},
                           {"chosen_index", m.chosen},
                           {"chosen_candidate", report.candidates[m.chosen]},
                           {"regret_bits", m.regret_bits}});
    }
    j["methods"] = std::move(methods);
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_selection_csv_header(std::ostream& os, bool with_trial) {
    if (with_trial) os << "trial,";
    os << kSelectionCsvColumns << '\n';
}

void write_selection_csv_rows(std::ostream& os, const SelectionReport& report, std::optional<std::size_t> trial) {
    report.validate();
    for (std::size_t c = 0; c < report.candidates.size(); ++c) {
        for (const auto& m : report.methods) {
            if (trial) os << *trial << ',';
            os << format_number(report.candidates[c]) << ',' << m.method << ',' << format_number(m.scores[c]) << ','
               << format_number(m.oracle_errors[c]) << ',' << (m.chosen == c ? 1 : 0) << ','
               << format_number(m.regret_bits) << ',' << report.seed << '\n';
        }
    }
}

} // namespace ddl
