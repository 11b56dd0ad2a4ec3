#pragma once

#include "stabsel/error_control.hpp"
#include "stabsel/harness.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace stabsel {

inline constexpr int kSchemaVersion = 1;

/// Configuration of a `select` run on user data.
struct RunConfig {
    std::string selector = "lasso";       // lasso | randomised_lasso | omp | romp
    std::optional<double> alpha;          // weakness; selector default when unset
    double p_w = kDefaultWeightProbability;
    QPolicy q_policy = QPolicy::average;
    Index resamples = 100;
    std::optional<double> pi_thr;
    std::optional<double> target_ev;
    std::optional<double> q;
    GridSpec grid;
    bool full_path = false;               // fit the whole grid, not just the window
    bool normalize = true;
    std::uint64_t seed = 1;
    Index threads = 1;
    std::string input;
    std::string output_dir;
    bool has_header = true;
    std::string response_column = "y";

    void validate() const;
    /// Two of (q, pi_thr, target_ev), defaulting to pi_thr = 0.9 and E(V) <= 1.
    ControlSpec control(Index p) const;
    double resolved_alpha() const;
};

/// Parsers for the JSON config files. Every object must carry
/// "schema_version": 1; unknown keys are rejected with their path.
RunConfig run_config_from_json(const std::string& text);
ExperimentConfig experiment_config_from_json(const std::string& text, ExperimentConfig base = {});
SeparationConfig separation_config_from_json(const std::string& text);
GraphConfig graph_config_from_json(const std::string& text);

std::string to_json(const RunConfig& config);
std::string to_json(const SeparationConfig& config);
std::string to_json(const GraphConfig& config);

std::string to_string(QPolicy policy);
QPolicy q_policy_from_string(const std::string& name);
std::string to_string(BetaDist dist);
BetaDist beta_dist_from_string(const std::string& name);

}  // namespace stabsel
