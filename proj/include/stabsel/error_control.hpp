#pragma once

#include "stabsel/stability.hpp"

#include <optional>

namespace stabsel {

/// Upper bound on the expected number of false selections,
/// q^2 / ((2 pi_thr - 1) p). Requires 0.5 < pi_thr <= 1.
double ev_bound(double q, Index p, double pi_thr);

/// q such that ev_bound(q, p, pi_thr) == target_ev.
double calibrate_q(Index p, double pi_thr, double target_ev);

/// pi_thr such that ev_bound(q, p, pi_thr) == target_ev. Throws ConfigError
/// when the answer falls outside (0.5, 1].
double calibrate_threshold(Index p, double q, double target_ev);

enum class QPolicy {
    average,           // mean union size over resamples <= q
    per_resample_cap,  // every resample's union size <= q
};

struct LambdaMin {
    Index index = 0;       // last grid index of the window [0, index]
    double lambda = 0.0;
    double q_hat = 0.0;    // realized mean union size over the window
};

/// Largest window [lambda_min, lambda_max] on the grid whose union size stays
/// within q. Throws ConfigError if lambda_max alone already exceeds it.
LambdaMin lambda_min_from(const FrequencyMatrix& freq, double q, QPolicy policy = QPolicy::average);

LambdaMin lambda_min_for_q(const Selector& selector, const Dataset& data, const LambdaGrid& grid, Index B, double q,
                           std::uint64_t seed, QPolicy policy = QPolicy::average, const EngineOptions& options = {});

/// lambda_min together with the frequencies over the grid prefix [0, index + 1]
/// (or the whole grid). Only the part of the path needed to locate lambda_min
/// is fitted.
struct CalibratedFrequencies {
    FrequencyMatrix freq;
    LambdaMin lambda_min;
};

CalibratedFrequencies calibrated_frequencies(const Selector& selector, const Dataset& data, const LambdaGrid& grid,
                                             Index B, double q, std::uint64_t seed, QPolicy policy = QPolicy::average,
                                             const EngineOptions& options = {}, Index chunk = 32);

/// Any two of {q, pi_thr, target_ev} determine the third.
struct ControlSpec {
    Index p = 0;
    std::optional<double> pi_thr;
    std::optional<double> q;
    std::optional<double> target_ev;
    std::optional<double> lambda_min;

    /// Fills in the missing member. Throws ConfigError unless exactly two are set.
    ControlSpec resolved() const;
};

}  // namespace stabsel
