#pragma once

#include "stabsel/data.hpp"
#include "stabsel/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stabsel {

/// Sorted distinct row indices, a subsample without replacement.
using SubsampleIndex = std::vector<Index>;

/// Uniform draw of floor(n/2) distinct rows out of n.
SubsampleIndex subsample(Index n, Rng& rng);

/// A base selection procedure evaluated on a (sub)dataset: one selection set
/// per grid point. `seed` feeds any internal randomisation (weights, ROMP
/// draws); deterministic selectors ignore it. Sets usually range over the p
/// columns, but any fixed universe works (graph edges); frequency matrices
/// take their size from the returned sets.
using Selector = std::function<std::vector<SelectionSet>(const Dataset&, const LambdaGrid&, std::uint64_t seed)>;

struct EngineOptions {
    Index threads = 1;  // 0 = hardware concurrency
};

/// Selection counts over resamples, with the per-resample selection bits kept
/// so that union sizes over any lambda window can be recomputed.
class FrequencyMatrix {
public:
    FrequencyMatrix(LambdaGrid grid, Index p, std::uint64_t seed);

    const LambdaGrid& grid() const { return grid_; }
    Index p() const { return p_; }
    Index resamples() const { return selections_.size(); }
    std::uint64_t seed() const { return seed_; }

    Index count(Index k, Index g) const { return counts_[k * grid_.size() + g]; }
    double pi(Index k, Index g) const;
    Matrix pi_matrix() const;

    bool selected(Index b, Index k, Index g) const { return selections_[b][k * grid_.size() + g]; }

    /// Mean and maximum over resamples of |union of S^lambda_g, g in [first, last]|.
    double mean_union(Index first, Index last) const;
    Index max_union(Index first, Index last) const;
    /// Cumulative mean union size for windows [0, g], for every g.
    std::vector<double> mean_union_prefix() const;
    std::vector<Index> max_union_prefix() const;

    /// Per-variable max of pi over grid indices [first, last].
    std::vector<double> max_pi(Index first, Index last) const;

    /// Appends one resample's selection sets (one per grid point).
    void add(const std::vector<SelectionSet>& sets);

private:
    LambdaGrid grid_;
    Index p_;
    std::uint64_t seed_;
    std::vector<Index> counts_;
    std::vector<std::vector<bool>> selections_;
};

/// Inclusive range of grid indices.
struct LambdaWindow {
    Index first = 0;
    Index last = 0;
    static LambdaWindow all(const LambdaGrid& grid) { return {0, grid.size() - 1}; }
    static LambdaWindow down_to(Index g) { return {0, g}; }
};

struct StabilityResult {
    SelectionSet stable_set;
    std::vector<double> max_frequency;  // per variable, over the window
    double pi_thr = 0.9;
    double q = 0.0;                     // mean |union of selections| over the window
    LambdaWindow window;
    double lambda_min = 0.0;
    double ev_bound = 0.0;
    std::uint64_t seed = 0;
    Index resamples = 0;
};

/// pi[k, g] = fraction of B random half-samples in which k is selected at grid g.
FrequencyMatrix selection_frequencies(const Selector& selector, const Dataset& data, const LambdaGrid& grid, Index B,
                                      std::uint64_t seed, const EngineOptions& options = {});

/// Same, over an explicit list of subsamples (exhaustive enumeration, replay).
FrequencyMatrix frequencies_over(const Selector& selector, const Dataset& data, const LambdaGrid& grid,
                                 const std::vector<SubsampleIndex>& subsamples, std::uint64_t seed,
                                 const EngineOptions& options = {});

/// Computes frequencies on successive chunks of the grid, stopping as soon as
/// `done` holds for the prefix computed so far; the returned matrix covers
/// that prefix only. Each chunk is fitted afresh from its first grid point,
/// so a chunked run matches the full run up to solver tolerance.
FrequencyMatrix frequencies_until(const Selector& selector, const Dataset& data, const LambdaGrid& grid, Index B,
                                  std::uint64_t seed, const std::function<bool(const FrequencyMatrix&)>& done,
                                  Index chunk = 32, const EngineOptions& options = {});

/// Frequencies of whole sets K being contained in the selection, one row per K.
Matrix set_frequencies(const FrequencyMatrix& freq, const std::vector<std::vector<Index>>& sets);

/// Thresholds max over `window` of pi at pi_thr, 0.5 < pi_thr <= 1.
StabilityResult stable_set(const FrequencyMatrix& freq, double pi_thr, LambdaWindow window);

struct SimultaneousFrequencyMatrix {
    LambdaGrid grid;
    Index p = 0;
    Index pairs = 0;
    std::vector<Index> counts;        // k * G + g: selected in both halves
    std::vector<Index> single_counts; // k * G + g: selected in the first half

    double pi_simult(Index k, Index g) const { return static_cast<double>(counts[k * grid.size() + g]) / static_cast<double>(pairs); }
    double pi_single(Index k, Index g) const { return static_cast<double>(single_counts[k * grid.size() + g]) / static_cast<double>(pairs); }
};

using SplitPair = std::pair<SubsampleIndex, SubsampleIndex>;

/// Random disjoint half-sample pairs; counts k in S(I1) and S(I2).
SimultaneousFrequencyMatrix simultaneous_frequencies(const Selector& selector, const Dataset& data,
                                                     const LambdaGrid& grid, Index pairs, std::uint64_t seed,
                                                     const EngineOptions& options = {});

SimultaneousFrequencyMatrix simultaneous_over(const Selector& selector, const Dataset& data, const LambdaGrid& grid,
                                              const std::vector<SplitPair>& splits, std::uint64_t seed,
                                              const EngineOptions& options = {});

/// Stability selection at a single lambda; q is the mean |S^lambda(I_b)|.
StabilityResult pointwise_stability(const Selector& selector, const Dataset& data, double lambda, Index B,
                                    double pi_thr, std::uint64_t seed, const EngineOptions& options = {});

/// Pointwise variant computed from an existing single-point frequency matrix.
StabilityResult pointwise_from(const FrequencyMatrix& freq, Index g, double pi_thr);

/// Frequency matrix as TSV: header row of lambda values, one row per variable.
std::string frequency_tsv(const FrequencyMatrix& freq, const std::vector<std::string>& names);

/// Subsample seed and selector seed for resample b of a run seeded `seed`.
std::uint64_t resample_seed(std::uint64_t seed, Index b);
std::uint64_t selector_seed(std::uint64_t seed, Index b);

}  // namespace stabsel
