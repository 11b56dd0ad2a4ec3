#include "stabsel/error_control.hpp"

#include "stabsel/errors.hpp"

#include <cmath>
#include <sstream>

namespace stabsel {

namespace {

void check_threshold(double pi_thr) {
    if (!(pi_thr > 0.5 && pi_thr <= 1.0))
        throw ConfigError("pi_thr must lie in (0.5, 1] for the error bound to be defined; got " + std::to_string(pi_thr));
}

void check_p(Index p) {
    if (p < 1) throw ConfigError("p must be at least 1");
}

// Evaluated in extended precision so exact calibrations round-trip exactly.
using Wide = long double;

}  // namespace

double ev_bound(double q, Index p, double pi_thr) {
    check_threshold(pi_thr);
    check_p(p);
    if (!(q >= 0.0)) throw ConfigError("q must be non-negative");
    const Wide qq = static_cast<Wide>(q) * static_cast<Wide>(q);
    return static_cast<double>(qq / ((2.0L * static_cast<Wide>(pi_thr) - 1.0L) * static_cast<Wide>(p)));
}

double calibrate_q(Index p, double pi_thr, double target_ev) {
    check_threshold(pi_thr);
    check_p(p);
    if (!(target_ev > 0.0)) throw ConfigError("target E(V) must be positive");
    return static_cast<double>(
        std::sqrt(static_cast<Wide>(target_ev) * (2.0L * static_cast<Wide>(pi_thr) - 1.0L) * static_cast<Wide>(p)));
}

double calibrate_threshold(Index p, double q, double target_ev) {
    check_p(p);
    if (!(target_ev > 0.0)) throw ConfigError("target E(V) must be positive");
    if (!(q >= 0.0)) throw ConfigError("q must be non-negative");
    const Wide ratio = static_cast<Wide>(q) * static_cast<Wide>(q) / (static_cast<Wide>(p) * static_cast<Wide>(target_ev));
    const double pi_thr = static_cast<double>((ratio + 1.0L) / 2.0L);
    if (!(pi_thr > 0.5 && pi_thr <= 1.0)) {
        std::ostringstream msg;
        msg << "no threshold in (0.5, 1] achieves E(V) <= " << target_ev << " with q = " << q << ", p = " << p
            << " (would need pi_thr = " << pi_thr << "); attainable E(V) is at least " << ev_bound(q, p, 1.0)
            << ", or reduce q to at most " << calibrate_q(p, 1.0, target_ev);
        throw ConfigError(msg.str());
    }
    return pi_thr;
}

LambdaMin lambda_min_from(const FrequencyMatrix& freq, double q, QPolicy policy) {
    if (!(q >= 0.0)) throw ConfigError("q must be non-negative");
    const Index G = freq.grid().size();
    const auto mean = freq.mean_union_prefix();
    const auto worst = freq.max_union_prefix();
    auto within = [&](Index g) {
        return policy == QPolicy::average ? mean[g] <= q : static_cast<double>(worst[g]) <= q;
    };
    if (!within(0)) {
        std::ostringstream msg;
        msg << "even lambda_max selects more than q = " << q << " variables ("
            << (policy == QPolicy::average ? "mean " : "max ") << "union size "
            << (policy == QPolicy::average ? mean[0] : static_cast<double>(worst[0])) << ")";
        throw ConfigError(msg.str());
    }
    // union sizes only grow along the grid, so the admissible windows form a prefix
    Index g = 0;
    while (g + 1 < G && within(g + 1)) ++g;
    return LambdaMin{g, freq.grid()[g], mean[g]};
}

LambdaMin lambda_min_for_q(const Selector& selector, const Dataset& data, const LambdaGrid& grid, Index B, double q,
                           std::uint64_t seed, QPolicy policy, const EngineOptions& options) {
    if (!(q >= 1.0)) throw ConfigError("q must be at least 1");
    return lambda_min_from(selection_frequencies(selector, data, grid, B, seed, options), q, policy);
}

CalibratedFrequencies calibrated_frequencies(const Selector& selector, const Dataset& data, const LambdaGrid& grid,
                                             Index B, double q, std::uint64_t seed, QPolicy policy,
                                             const EngineOptions& options, Index chunk) {
    if (!(q >= 1.0)) throw ConfigError("q must be at least 1");
    auto exceeded = [&](const FrequencyMatrix& f) {
        const Index last = f.grid().size() - 1;
        return policy == QPolicy::average ? f.mean_union(0, last) > q
                                          : static_cast<double>(f.max_union(0, last)) > q;
    };
    FrequencyMatrix freq = frequencies_until(selector, data, grid, B, seed, exceeded, chunk, options);
    const LambdaMin lm = lambda_min_from(freq, q, policy);
    return CalibratedFrequencies{std::move(freq), lm};
}

ControlSpec ControlSpec::resolved() const {
    const int given = static_cast<int>(pi_thr.has_value()) + static_cast<int>(q.has_value()) +
                      static_cast<int>(target_ev.has_value());
    if (given != 2) throw ConfigError("exactly two of q, pi_thr and target E(V) must be given");
    ControlSpec out = *this;
    if (!q) out.q = calibrate_q(p, *pi_thr, *target_ev);
    if (!pi_thr) out.pi_thr = calibrate_threshold(p, *q, *target_ev);
    if (!target_ev) out.target_ev = ev_bound(*q, p, *pi_thr);
    return out;
}

}  // namespace stabsel
