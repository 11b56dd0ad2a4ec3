#pragma once

#include "stabsel/error_control.hpp"
#include "stabsel/simgen.hpp"
#include "stabsel/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stabsel {

enum class Method {
    lasso,                       // plain Lasso path on the full data
    lasso_stability,
    randomised_lasso_stability,
    omp,                         // plain OMP path on the full data
    omp_stability,
    romp_stability,
};

std::string to_string(Method method);
Method method_from_string(const std::string& name);
bool is_stability(Method method);

struct GridSpec {
    Index size = 100;
    double ratio = 1e-3;
};

struct ExperimentConfig {
    std::string preset = "A-desk";
    Index s = 5;
    double snr = 2.0;
    BetaDist beta_dist = BetaDist::uniform01;
    std::vector<Method> methods{Method::lasso, Method::lasso_stability};
    std::vector<double> gammas{0.1, 0.4};
    Index replicates = 20;
    Index resamples = 100;
    std::vector<double> pi_thrs{0.9};
    std::optional<double> q;                 // default sqrt(0.8 p)
    QPolicy q_policy = QPolicy::average;
    double lasso_alpha = kDefaultLassoWeakness;
    double omp_alpha = kDefaultOmpWeakness;
    double p_w = kDefaultWeightProbability;
    GridSpec grid;
    std::uint64_t seed = 1;
    Index threads = 1;

    void validate() const;
    double resolved_q(Index p) const;
};

struct MethodOutcome {
    Method method = Method::lasso;
    std::vector<bool> success;            // one per gamma
    // stability methods only
    double q_hat = 0.0;
    double lambda_min = 0.0;
    Index lambda_min_index = 0;
    std::vector<Index> false_selected;    // V, one per pi_thr
    std::vector<Index> true_selected;     // |S-hat stable n S|, one per pi_thr
};

struct ReplicateRecord {
    Index replicate = 0;
    std::uint64_t seed = 0;
    std::vector<Index> support;
    double sigma = 0.0;
    double realized_snr = 0.0;
    double irc_value = 0.0;
    Index irc_violations = 0;
    double max_cor = 0.0;
    std::vector<MethodOutcome> outcomes;  // same order as config.methods
};

struct ThresholdSummary {
    double pi_thr = 0.0;
    double mean_v = 0.0;
    double se_v = 0.0;
    double bound_configured = 0.0;  // ev_bound(q, p, pi_thr)
    double bound_realized = 0.0;    // ev_bound(mean q-hat, p, pi_thr)
    double mean_tp_proportion = 0.0;
};

struct MethodSummary {
    Method method = Method::lasso;
    std::vector<double> success;     // per gamma
    std::vector<double> success_se;
    double mean_q_hat = 0.0;
    std::vector<ThresholdSummary> thresholds;  // stability methods only
};

struct ExperimentReport {
    std::string kind;                // "recovery" or "error_control"
    ExperimentConfig config;
    Index p = 0;
    Index n = 0;
    double q = 0.0;
    std::vector<ReplicateRecord> replicates;
    std::vector<MethodSummary> methods;
    double median_irc_violations = 0.0;
    double mean_max_cor = 0.0;
};

/// Success of a plain path: some grid point holds at least `need` true and
/// no false variables.
bool path_recovers(const std::vector<SelectionSet>& path, const SelectionSet& truth, Index need);

/// Success of a ranking: the `need` highest scores all belong to the truth.
/// Ties at the cut count against the method: every variable scoring at least
/// the need-th highest value must be true.
bool ranking_recovers(const std::vector<double>& score, const SelectionSet& truth, Index need);

ExperimentReport recovery_experiment(const ExperimentConfig& config);

/// Same protocol with the error-control defaults filled in where the config
/// leaves them (stability Lasso, pi_thr = 0.6).
ExperimentReport error_control_experiment(ExperimentConfig config);

ExperimentConfig error_control_defaults();

/// Scenario grid over designs, snr in {0.5, 2} and sparsity. Desk scale uses
/// the five desk presets with s = 5; paper scale the ten p = 1000 presets with
/// s in {4, 20} (long-running). Each scenario gets its own derived seed.
std::vector<ExperimentConfig> scenario_matrix(bool paper_scale, const ExperimentConfig& base);

// ---------------------------------------------------------------------------

struct SeparationConfig {
    double rho = 0.7;
    Index n = 200;
    Index p = 200;
    double noise_sd = 0.5;
    std::vector<double> alphas{0.2, 1.0};
    double p_w = kDefaultWeightProbability;
    Index resamples = 100;
    Index replicates = 20;
    GridSpec grid{50, 1e-3};
    double tail_fraction = 0.25;   // last fraction of the grid counted as small lambda
    double relevant_min = 0.9;     // target for the tail minimum of variables 1, 2
    double irrelevant_max = 0.8;   // target for the maximum of variable 3
    std::uint64_t seed = 1;
    Index threads = 1;

    void validate() const;
};

struct SeparationCurves {
    double alpha = 1.0;
    // per replicate, then summarized by the median
    std::vector<double> tail_min_relevant;  // min over tail of min(pi_1, pi_2)
    std::vector<double> max_irrelevant;     // max over grid of pi_3
    double median_tail_min_relevant = 0.0;
    double median_max_irrelevant = 0.0;
    // replicate-averaged curves over the grid index
    std::vector<double> mean_pi1, mean_pi2, mean_pi3, mean_pi_rest;
    bool separated = false;
};

struct SeparationReport {
    SeparationConfig config;
    double irc_population = 0.0;   // 2 rho
    Index tail_first = 0;
    std::vector<SeparationCurves> curves;  // one per alpha
};

SeparationReport separation_experiment(const SeparationConfig& config);

// ---------------------------------------------------------------------------

struct GraphConfig {
    Index d = 20;
    Index n = 100;
    Index band = 1;                 // banded precision, 0 gives Theta = I
    double band_value = 0.4;
    bool null_permuted = true;      // per-column permutation, true graph empty
    std::vector<double> lambdas{0.8, 0.7, 0.6, 0.5};
    double target_ev = 3.0;
    Index resamples = 100;
    Index replicates = 50;
    double drift_tolerance = 0.5;   // allowed relative spread of stable-set sizes
    std::uint64_t seed = 1;
    Index threads = 1;

    void validate() const;
    Index edge_slots() const { return d * (d - 1) / 2; }
};

struct GraphLambdaSummary {
    double lambda = 0.0;
    Index feasible = 0;             // replicates where a threshold in (0.5, 1] exists
    Index infeasible = 0;
    double mean_q_hat = 0.0;
    double mean_pi_thr = 0.0;       // over feasible replicates
    double mean_false_edges = 0.0;  // over feasible replicates
    double se_false_edges = 0.0;
    double mean_true_edges = 0.0;
    double mean_stable_size = 0.0;
};

struct GraphReport {
    GraphConfig config;
    Index true_edges = 0;
    std::vector<GraphLambdaSummary> lambdas;
    double worst_kkt = 0.0;
    long fits = 0;
    double stable_size_drift = 0.0;   // (max - min) / max(1, max) of mean stable-set size over feasible lambdas
    bool drift_within_tolerance = true;
    /// Per replicate and lambda: false edges, or -1 when infeasible.
    std::vector<std::vector<long>> false_edges;
};

GraphReport graph_experiment(const GraphConfig& config);

// ---------------------------------------------------------------------------
// Serialization: deterministic JSON text and TSV tables.

std::string to_json(const ExperimentConfig& config);
std::string to_json(const ExperimentReport& report);
std::string to_json(const SeparationReport& report);
std::string to_json(const GraphReport& report);

std::string summary_tsv(const ExperimentReport& report);
std::string replicate_tsv(const ExperimentReport& report);
std::string curves_tsv(const SeparationReport& report);
std::string graph_tsv(const GraphReport& report);

}  // namespace stabsel
