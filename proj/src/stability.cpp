#include "stabsel/stability.hpp"

#include "stabsel/error_control.hpp"
#include "stabsel/errors.hpp"
#include "stabsel/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace stabsel {

std::uint64_t resample_seed(std::uint64_t seed, Index b) { return derive_seed(seed, streams::subsample, b); }
std::uint64_t selector_seed(std::uint64_t seed, Index b) { return derive_seed(seed, streams::selector, b); }

SubsampleIndex subsample(Index n, Rng& rng) {
    if (n < 2) throw ConfigError("subsampling needs n >= 2, got " + std::to_string(n));
    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});
    SubsampleIndex out;
    out.reserve(n / 2);
    std::sample(all.begin(), all.end(), std::back_inserter(out), n / 2, rng);
    return out;
}

// ---------------------------------------------------------------------------
// FrequencyMatrix

FrequencyMatrix::FrequencyMatrix(LambdaGrid grid, Index p, std::uint64_t seed)
    : grid_(std::move(grid)), p_(p), seed_(seed), counts_(p * grid_.size(), 0) {}

double FrequencyMatrix::pi(Index k, Index g) const {
    if (selections_.empty()) return 0.0;
    return static_cast<double>(count(k, g)) / static_cast<double>(selections_.size());
}

Matrix FrequencyMatrix::pi_matrix() const {
    Matrix m(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(grid_.size()));
    for (Index k = 0; k < p_; ++k)
        for (Index g = 0; g < grid_.size(); ++g) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(g)) = pi(k, g);
    return m;
}

void FrequencyMatrix::add(const std::vector<SelectionSet>& sets) {
    const Index G = grid_.size();
    if (sets.size() != G)
        throw ConfigError("selector returned " + std::to_string(sets.size()) + " sets for a grid of " + std::to_string(G));
    std::vector<bool> bits(p_ * G, false);
    for (Index g = 0; g < G; ++g) {
        if (sets[g].universe() != p_)
            throw ConfigError("selector returned a set over " + std::to_string(sets[g].universe()) +
                              " variables, expected " + std::to_string(p_));
        for (Index k : sets[g].members()) {
            bits[k * G + g] = true;
            ++counts_[k * G + g];
        }
    }
    selections_.push_back(std::move(bits));
}

namespace {

Index union_size(const std::vector<bool>& bits, Index p, Index G, Index first, Index last) {
    Index n = 0;
    for (Index k = 0; k < p; ++k)
        for (Index g = first; g <= last; ++g)
            if (bits[k * G + g]) {
                ++n;
                break;
            }
    return n;
}

void check_window(const LambdaGrid& grid, Index first, Index last) {
    if (first > last || last >= grid.size())
        throw ConfigError("lambda window [" + std::to_string(first) + ", " + std::to_string(last) +
                          "] outside grid of size " + std::to_string(grid.size()));
}

}  // namespace

double FrequencyMatrix::mean_union(Index first, Index last) const {
    check_window(grid_, first, last);
    if (selections_.empty()) return 0.0;
    Index total = 0;
    for (const auto& bits : selections_) total += union_size(bits, p_, grid_.size(), first, last);
    return static_cast<double>(total) / static_cast<double>(selections_.size());
}

Index FrequencyMatrix::max_union(Index first, Index last) const {
    check_window(grid_, first, last);
    Index worst = 0;
    for (const auto& bits : selections_) worst = std::max(worst, union_size(bits, p_, grid_.size(), first, last));
    return worst;
}

namespace {

// Per resample: number of variables first selected at each grid index.
std::vector<Index> entry_histogram(const std::vector<bool>& bits, Index p, Index G) {
    std::vector<Index> entries(G, 0);
    for (Index k = 0; k < p; ++k)
        for (Index g = 0; g < G; ++g)
            if (bits[k * G + g]) {
                ++entries[g];
                break;
            }
    return entries;
}

}  // namespace

std::vector<double> FrequencyMatrix::mean_union_prefix() const {
    const Index G = grid_.size();
    std::vector<Index> total(G, 0);
    for (const auto& bits : selections_) {
        const auto entries = entry_histogram(bits, p_, G);
        Index running = 0;
        for (Index g = 0; g < G; ++g) total[g] += (running += entries[g]);
    }
    std::vector<double> out(G, 0.0);
    if (!selections_.empty())
        for (Index g = 0; g < G; ++g) out[g] = static_cast<double>(total[g]) / static_cast<double>(selections_.size());
    return out;
}

std::vector<Index> FrequencyMatrix::max_union_prefix() const {
    const Index G = grid_.size();
    std::vector<Index> worst(G, 0);
    for (const auto& bits : selections_) {
        const auto entries = entry_histogram(bits, p_, G);
        Index running = 0;
        for (Index g = 0; g < G; ++g) worst[g] = std::max(worst[g], running += entries[g]);
    }
    return worst;
}

std::vector<double> FrequencyMatrix::max_pi(Index first, Index last) const {
    check_window(grid_, first, last);
    std::vector<double> out(p_, 0.0);
    for (Index k = 0; k < p_; ++k) {
        Index best = 0;
        for (Index g = first; g <= last; ++g) best = std::max(best, count(k, g));
        out[k] = selections_.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(selections_.size());
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<SelectionSet> run_selector(const Selector& selector, const Dataset& data, const LambdaGrid& grid,
                                       const SubsampleIndex& rows, std::uint64_t seed, Index b) {
    try {
        return selector(data.rows(rows), grid, seed);
    } catch (const Error& e) {
        throw e.with_context("resample " + std::to_string(b));
    } catch (const std::exception& e) {
        throw NumericalError("resample " + std::to_string(b) + ": " + e.what());
    }
}

// Selections may live on a universe other than the columns (graph edges).
Index universe_of(const std::vector<std::vector<SelectionSet>>& results, Index fallback) {
    for (const auto& sets : results)
        if (!sets.empty()) return sets.front().universe();
    return fallback;
}

}  // namespace

FrequencyMatrix frequencies_over(const Selector& selector, const Dataset& data, const LambdaGrid& grid,
                                 const std::vector<SubsampleIndex>& subsamples, std::uint64_t seed,
                                 const EngineOptions& options) {
    if (subsamples.empty()) throw ConfigError("need at least one resample");
    std::vector<std::vector<SelectionSet>> results(subsamples.size());
    parallel_for(subsamples.size(), options.threads, [&](Index b) {
        results[b] = run_selector(selector, data, grid, subsamples[b], selector_seed(seed, b), b);
    });
    FrequencyMatrix freq(grid, universe_of(results, data.p()), seed);
    for (const auto& sets : results) freq.add(sets);
    return freq;
}

FrequencyMatrix selection_frequencies(const Selector& selector, const Dataset& data, const LambdaGrid& grid, Index B,
                                      std::uint64_t seed, const EngineOptions& options) {
    if (B < 1) throw ConfigError("number of resamples B must be at least 1");
    std::vector<SubsampleIndex> subsamples(B);
    for (Index b = 0; b < B; ++b) {
        Rng rng = make_rng(resample_seed(seed, b));
        subsamples[b] = subsample(data.n(), rng);
    }
    return frequencies_over(selector, data, grid, subsamples, seed, options);
}

FrequencyMatrix frequencies_until(const Selector& selector, const Dataset& data, const LambdaGrid& grid, Index B,
                                  std::uint64_t seed, const std::function<bool(const FrequencyMatrix&)>& done,
                                  Index chunk, const EngineOptions& options) {
    if (B < 1) throw ConfigError("number of resamples B must be at least 1");
    if (chunk < 1) throw ConfigError("grid chunk must be at least 1");
    std::vector<SubsampleIndex> subsamples(B);
    for (Index b = 0; b < B; ++b) {
        Rng rng = make_rng(resample_seed(seed, b));
        subsamples[b] = subsample(data.n(), rng);
    }
    std::vector<std::vector<SelectionSet>> results(B);
    const auto& all = grid.values();
    for (Index start = 0;;) {
        const Index end = std::min(grid.size(), start + chunk);
        const LambdaGrid part(std::vector<double>(all.begin() + static_cast<std::ptrdiff_t>(start),
                                                  all.begin() + static_cast<std::ptrdiff_t>(end)));
        parallel_for(B, options.threads, [&](Index b) {
            auto sets = run_selector(selector, data, part, subsamples[b], selector_seed(seed, b), b);
            if (sets.size() != part.size()) throw ConfigError("selector returned the wrong number of sets");
            results[b].insert(results[b].end(), std::make_move_iterator(sets.begin()), std::make_move_iterator(sets.end()));
        });
        FrequencyMatrix freq(LambdaGrid(std::vector<double>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(end))),
                             universe_of(results, data.p()), seed);
        for (const auto& sets : results) freq.add(sets);
        if (end == grid.size() || done(freq)) return freq;
        start = end;
    }
}

Matrix set_frequencies(const FrequencyMatrix& freq, const std::vector<std::vector<Index>>& sets) {
    const Index G = freq.grid().size();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(sets.size()), static_cast<Eigen::Index>(G));
    if (freq.resamples() == 0) return out;
    for (Index s = 0; s < sets.size(); ++s) {
        for (Index k : sets[s])
            if (k >= freq.p()) throw ConfigError("set member " + std::to_string(k) + " out of range");
        for (Index g = 0; g < G; ++g) {
            Index hits = 0;
            for (Index b = 0; b < freq.resamples(); ++b)
                if (std::all_of(sets[s].begin(), sets[s].end(), [&](Index k) { return freq.selected(b, k, g); })) ++hits;
            out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(g)) =
                static_cast<double>(hits) / static_cast<double>(freq.resamples());
        }
    }
    return out;
}

StabilityResult stable_set(const FrequencyMatrix& freq, double pi_thr, LambdaWindow window) {
    if (!(pi_thr > 0.5 && pi_thr <= 1.0))
        throw ConfigError("pi_thr must lie in (0.5, 1]; got " + std::to_string(pi_thr));
    check_window(freq.grid(), window.first, window.last);

    StabilityResult out;
    out.pi_thr = pi_thr;
    out.window = window;
    out.lambda_min = freq.grid()[window.last];
    out.seed = freq.seed();
    out.resamples = freq.resamples();
    out.max_frequency = freq.max_pi(window.first, window.last);
    out.stable_set = SelectionSet(freq.p());
    // compare on integer counts so that pi_thr = 1 means "every resample"
    const double B = static_cast<double>(freq.resamples());
    for (Index k = 0; k < freq.p(); ++k) {
        Index best = 0;
        for (Index g = window.first; g <= window.last; ++g) best = std::max(best, freq.count(k, g));
        if (freq.resamples() > 0 && static_cast<double>(best) >= pi_thr * B - 1e-9) out.stable_set.insert(k);
    }
    out.q = freq.mean_union(window.first, window.last);
    out.ev_bound = ev_bound(out.q, freq.p(), pi_thr);
    return out;
}

// ---------------------------------------------------------------------------
// Complementary pairs

SimultaneousFrequencyMatrix simultaneous_over(const Selector& selector, const Dataset& data, const LambdaGrid& grid,
                                              const std::vector<SplitPair>& splits, std::uint64_t seed,
                                              const EngineOptions& options) {
    if (splits.empty()) throw ConfigError("need at least one split pair");
    const Index G = grid.size();
    std::vector<std::pair<std::vector<SelectionSet>, std::vector<SelectionSet>>> results(splits.size());
    parallel_for(splits.size(), options.threads, [&](Index b) {
        const auto& [first, second] = splits[b];
        for (Index i : first)
            if (std::binary_search(second.begin(), second.end(), i))
                throw ConfigError("split pair " + std::to_string(b) + " halves overlap");
        results[b].first = run_selector(selector, data, grid, first, selector_seed(seed, 2 * b), b);
        results[b].second = run_selector(selector, data, grid, second, selector_seed(seed, 2 * b + 1), b);
    });

    Index p = data.p();
    if (!results.empty() && !results.front().first.empty()) p = results.front().first.front().universe();
    SimultaneousFrequencyMatrix out{grid, p, splits.size(), std::vector<Index>(p * G, 0), std::vector<Index>(p * G, 0)};
    for (const auto& [a, b] : results) {
        if (a.size() != G || b.size() != G) throw ConfigError("selector returned the wrong number of sets");
        for (Index g = 0; g < G; ++g)
            if (a[g].universe() != p || b[g].universe() != p) throw ConfigError("selector universes disagree");
        for (Index g = 0; g < G; ++g)
            for (Index k : a[g].members()) {
                ++out.single_counts[k * G + g];
                if (b[g].contains(k)) ++out.counts[k * G + g];
            }
    }
    return out;
}

SimultaneousFrequencyMatrix simultaneous_frequencies(const Selector& selector, const Dataset& data,
                                                     const LambdaGrid& grid, Index pairs, std::uint64_t seed,
                                                     const EngineOptions& options) {
    if (data.n() < 4) throw ConfigError("complementary pairs need n >= 4, got " + std::to_string(data.n()));
    if (pairs < 1) throw ConfigError("need at least one split pair");
    const Index half = data.n() / 2;
    std::vector<SplitPair> splits(pairs);
    for (Index b = 0; b < pairs; ++b) {
        Rng rng = make_rng(derive_seed(seed, streams::split, b));
        std::vector<Index> perm(data.n());
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        SubsampleIndex first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
        SubsampleIndex second(perm.begin() + static_cast<std::ptrdiff_t>(half),
                              perm.begin() + static_cast<std::ptrdiff_t>(2 * half));
        std::sort(first.begin(), first.end());
        std::sort(second.begin(), second.end());
        splits[b] = {std::move(first), std::move(second)};
    }
    return simultaneous_over(selector, data, grid, splits, seed, options);
}

// ---------------------------------------------------------------------------

StabilityResult pointwise_from(const FrequencyMatrix& freq, Index g, double pi_thr) {
    return stable_set(freq, pi_thr, LambdaWindow{g, g});
}

StabilityResult pointwise_stability(const Selector& selector, const Dataset& data, double lambda, Index B,
                                    double pi_thr, std::uint64_t seed, const EngineOptions& options) {
    const LambdaGrid single({lambda});
    return pointwise_from(selection_frequencies(selector, data, single, B, seed, options), 0, pi_thr);
}

std::string frequency_tsv(const FrequencyMatrix& freq, const std::vector<std::string>& names) {
    if (names.size() != freq.p()) throw ConfigError("need one name per variable");
    std::ostringstream out;
    out.precision(17);
    out << "variable";
    for (double l : freq.grid().values()) out << '\t' << l;
    out << '\n';
    for (Index k = 0; k < freq.p(); ++k) {
        out << names[k];
        for (Index g = 0; g < freq.grid().size(); ++g) out << '\t' << freq.pi(k, g);
        out << '\n';
    }
    return out.str();
}

}  // namespace stabsel
