#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ddl {

/// oracle_errors[chosen] - min(oracle_errors).
double regret(std::span<const double> oracle_errors, std::size_t chosen);

/// Index of the smallest score; ties go to the smallest index. Grids are
/// ordered simplest-first, so ties prefer the simpler model.
std::size_t argmin_tiebreak(std::span<const double> scores);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// One selection method applied to a candidate grid.
///
/// `oracle_errors` is the generalization error (bits) of the predictor the
/// method would deploy for each candidate. For most methods that is the
/// full-data refit; hold-out validation deploys the model fitted on its
/// training split, which is why its regret can go negative.
struct MethodResult {
    std::string method;
    std::vector<double> scores;
    std::vector<double> oracle_errors;
    std::size_t chosen = 0;
    double regret_bits = 0.0;
};

struct SelectionReport {
    std::string candidate_name = "candidate";
    std::vector<double> candidates;
    /// Generalization error of the full-data refit per candidate; regret is measured
    /// against its minimum.
    std::vector<double> reference_oracle;
    std::vector<MethodResult> methods;
    std::uint64_t seed = 0;

    /// Picks argmin of `scores`, computes regret against the reference minimum, and appends.
    MethodResult& add_method(std::string name, std::vector<double> scores, std::vector<double> oracle_errors);
    [[nodiscard]] const MethodResult& method(const std::string& name) const;
    void validate() const;
};

void to_json(nlohmann::json& j, const SelectionReport& report);

inline constexpr const char* kSelectionCsvColumns =
    "candidate,method,score_bits,oracle_error_bits,chosen,regret_bits,seed";

/// Writes "[trial,]candidate,method,..." header.
void write_selection_csv_header(std::ostream& os, bool with_trial);
/// One row per candidate x method, in grid order then method order.
void write_selection_csv_rows(std::ostream& os, const SelectionReport& report,
                              std::optional<std::size_t> trial = std::nullopt);

/// "%.12g" formatting used for every CSV number.
std::string format_number(double v);

} // namespace ddl
