#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabsel/error_control.hpp"
#include "stabsel/selectors.hpp"
#include "stabsel/simgen.hpp"

#include <map>
#include <random>
#include <sstream>

using namespace stabsel;

namespace {

Dataset toy_data(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    Matrix x(6, 5);
    for (Index i = 0; i < 6; ++i)
        for (Index k = 0; k < 5; ++k) x(i, k) = z(gen);
    Vector y(6);
    for (Index i = 0; i < 6; ++i) y(i) = z(gen);
    return Dataset(x, y);
}

// variable k enters at grid point g when the subsample mean of column k
// exceeds 1 - 0.5 g; deterministic and nested in g
std::vector<SelectionSet> toy_sets(const Dataset& d, const LambdaGrid& grid) {
    std::vector<SelectionSet> out;
    for (Index g = 0; g < grid.size(); ++g) {
        SelectionSet s(d.p());
        for (Index k = 0; k < d.p(); ++k)
            if (d.x().col(static_cast<Eigen::Index>(k)).mean() > 1.0 - 0.5 * static_cast<double>(g)) s.insert(k);
        out.push_back(s);
    }
    return out;
}

Selector toy_selector() {
    return [](const Dataset& d, const LambdaGrid& grid, std::uint64_t) { return toy_sets(d, grid); };
}

std::vector<SubsampleIndex> all_halves(Index n) {
    std::vector<SubsampleIndex> out;
    const Index m = n / 2;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<Index>(__builtin_popcount(mask)) != m) continue;
        SubsampleIndex s;
        for (Index i = 0; i < n; ++i)
            if (mask >> i & 1u) s.push_back(i);
        out.push_back(s);
    }
    return out;
}

SubsampleIndex complement(const SubsampleIndex& s, Index n) {
    SubsampleIndex out;
    for (Index i = 0; i < n; ++i)
        if (std::find(s.begin(), s.end(), i) == s.end()) out.push_back(i);
    return out;
}

Dataset desk(std::uint64_t seed) {
    Rng rng = make_rng(seed);
    const Dataset d = gen_design(design_preset("A-desk"), rng);
    SimTruth t = gen_beta(d.p(), 5, BetaDist::uniform01, rng);
    return gen_response(d, t, 2.0, rng);
}

FrequencyMatrix from_counts(const std::vector<std::vector<int>>& bits, Index p, Index g) {
    // bits[b] lists, per resample, selected (k, grid) flattened as k * g + j
    FrequencyMatrix f(LambdaGrid::steps(g), p, 0);
    for (const auto& row : bits) {
        std::vector<SelectionSet> sets(g, SelectionSet(p));
        for (int code : row) sets[static_cast<Index>(code) % g].insert(static_cast<Index>(code) / g);
        f.add(sets);
    }
    return f;
}

}  // namespace

TEST_CASE("subsample sizes and replay") {
    Rng a = make_rng(3);
    Rng b = make_rng(3);
    const SubsampleIndex s = subsample(5, a);
    CHECK(s.size() == 2);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(s == subsample(5, b));
}

TEST_CASE("subsample is uniform over the C(4,2) subsets") {
    Rng rng = make_rng(12);
    std::map<SubsampleIndex, int> counts;
    for (int i = 0; i < 6000; ++i) ++counts[subsample(4, rng)];
    CHECK(counts.size() == 6);
    for (const auto& [s, c] : counts) {
        CHECK(c >= 850);
        CHECK(c <= 1150);
    }
}

TEST_CASE("constant selector gives frequency one on its set") {
    const Dataset d = desk(1);
    const LambdaGrid grid = LambdaGrid::geometric(1.0, 5, 0.1);
    const FrequencyMatrix f = selection_frequencies(constant_selector(SelectionSet(d.p(), {1, 2})), d, grid, 20, 9);
    for (Index k = 0; k < d.p(); ++k)
        for (Index g = 0; g < grid.size(); ++g) CHECK(f.pi(k, g) == (k == 1 || k == 2 ? 1.0 : 0.0));
    const Matrix pair = set_frequencies(f, {{1, 2}, {1, 3}});
    CHECK(pair(0, 0) == 1.0);
    CHECK(pair(1, 0) == 0.0);
}

TEST_CASE("one resample gives zero-one frequencies") {
    const Dataset d = desk(2);
    const LambdaGrid grid = LambdaGrid::geometric(lasso_lambda_max(d), 20, 0.05);
    const FrequencyMatrix f = selection_frequencies(lasso_selector(), d, grid, 1, 4);
    for (Index k = 0; k < d.p(); ++k)
        for (Index g = 0; g < grid.size(); ++g) CHECK((f.pi(k, g) == 0.0 || f.pi(k, g) == 1.0));
}

TEST_CASE("exhaustive subsamples match a brute-force count") {
    const Dataset d = toy_data(5);
    const LambdaGrid grid = LambdaGrid::steps(4);
    const auto halves = all_halves(6);
    REQUIRE(halves.size() == 20);
    const FrequencyMatrix f = frequencies_over(toy_selector(), d, grid, halves, 1);
    std::vector<std::vector<int>> expect(5, std::vector<int>(4, 0));
    for (const auto& h : halves) {
        const auto sets = toy_sets(d.rows(h), grid);
        for (Index g = 0; g < 4; ++g)
            for (Index k : sets[g].members()) ++expect[k][g];
    }
    for (Index k = 0; k < 5; ++k)
        for (Index g = 0; g < 4; ++g) CHECK(f.count(k, g) == static_cast<Index>(expect[k][g]));
}

TEST_CASE("complementary pairs satisfy the simultaneous lower bound exactly") {
    for (std::uint64_t seed : {5u, 6u, 7u, 8u}) {
        const Dataset d = toy_data(seed);
        const LambdaGrid grid = LambdaGrid::steps(4);
        const auto halves = all_halves(6);
        std::vector<SplitPair> splits;
        for (const auto& h : halves) splits.emplace_back(h, complement(h, 6));
        const FrequencyMatrix f = frequencies_over(toy_selector(), d, grid, halves, 1);
        const SimultaneousFrequencyMatrix s = simultaneous_over(toy_selector(), d, grid, splits, 1);
        REQUIRE(s.pairs == 20);
        for (Index k = 0; k < 5; ++k)
            for (Index g = 0; g < 4; ++g) {
                // pi_simult >= 2 pi - 1 in integers: 20 c_s >= (2 c - 20) pairs
                const long cs = static_cast<long>(s.counts[k * 4 + g]);
                const long c = static_cast<long>(f.count(k, g));
                CHECK(20 * cs >= (2 * c - 20) * static_cast<long>(s.pairs));
                // the first halves run over every subsample once
                CHECK(s.single_counts[k * 4 + g] == f.count(k, g));
            }
    }
}

TEST_CASE("half-probability selector keeps the bound vacuous") {
    const Dataset d = toy_data(3);
    const Selector row0 = [](const Dataset& sub, const LambdaGrid& grid, std::uint64_t) {
        // the subsample keeps row order, so row 0 is present iff its value survives
        SelectionSet s(sub.p());
        for (Index i = 0; i < sub.n(); ++i)
            if (sub.y()(static_cast<Eigen::Index>(i)) == 0.0) s.insert(0);
        return std::vector<SelectionSet>(grid.size(), s);
    };
    Vector y = d.y();
    y(0) = 0.0;
    const Dataset marked = d.with_response(y);
    const auto halves = all_halves(6);
    std::vector<SplitPair> splits;
    for (const auto& h : halves) splits.emplace_back(h, complement(h, 6));
    const FrequencyMatrix f = frequencies_over(row0, marked, LambdaGrid::steps(1), halves, 1);
    const SimultaneousFrequencyMatrix s = simultaneous_over(row0, marked, LambdaGrid::steps(1), splits, 1);
    CHECK(f.pi(0, 0) == 0.5);
    CHECK(s.pi_simult(0, 0) == 0.0);
    CHECK(s.pi_simult(0, 0) >= 2 * f.pi(0, 0) - 1);
}

TEST_CASE("constant selector on complementary pairs") {
    const Dataset d = desk(3);
    const SimultaneousFrequencyMatrix s =
        simultaneous_frequencies(constant_selector(SelectionSet(d.p(), {4})), d, LambdaGrid::steps(2), 15, 2);
    CHECK(s.pi_simult(4, 1) == 1.0);
    CHECK(s.pi_single(4, 1) == 1.0);
    CHECK(s.pi_simult(3, 1) == 0.0);
}

TEST_CASE("results do not depend on the thread count") {
    const Dataset d = desk(4);
    const LambdaGrid grid = LambdaGrid::geometric(lasso_lambda_max(d), 30, 0.01);
    const Selector sel = randomised_lasso_selector(0.5);
    const FrequencyMatrix a = selection_frequencies(sel, d, grid, 24, 77, {1});
    const FrequencyMatrix b = selection_frequencies(sel, d, grid, 24, 77, {4});
    CHECK(a.pi_matrix() == b.pi_matrix());
    for (Index r = 0; r < 24; ++r)
        for (Index k = 0; k < d.p(); k += 13) CHECK(a.selected(r, k, 20) == b.selected(r, k, 20));
}

TEST_CASE("nested selectors give frequencies increasing as lambda falls") {
    const Dataset d = desk(5);
    const FrequencyMatrix f = selection_frequencies(omp_selector(), d, LambdaGrid::steps(20), 30, 1);
    for (Index k = 0; k < d.p(); ++k)
        for (Index g = 1; g < 20; ++g) CHECK(f.pi(k, g) >= f.pi(k, g - 1));
}

TEST_CASE("stable_set thresholds the window maximum") {
    // 20 resamples, 2 variables, 3 grid points
    std::vector<std::vector<int>> bits(20);
    for (int b = 0; b < 20; ++b) {
        if (b < 19) bits[b].push_back(0 * 3 + 1);  // variable 0 at g = 1: 0.95
        bits[b].push_back(1 * 3 + 2);               // variable 1 at g = 2: 1.0
    }
    const FrequencyMatrix f = from_counts(bits, 2, 3);
    CHECK(stable_set(f, 0.9, {0, 2}).stable_set.members() == std::vector<Index>{0, 1});
    CHECK(stable_set(f, 0.9, {0, 1}).stable_set.members() == std::vector<Index>{0});
    CHECK(stable_set(f, 1.0, {0, 2}).stable_set.members() == std::vector<Index>{1});
    CHECK(stable_set(f, 0.9, {0, 0}).stable_set.empty());
    CHECK(stable_set(f, 0.9, {0, 2}).max_frequency == std::vector<double>{0.95, 1.0});
    CHECK_THROWS(stable_set(f, 0.5, {0, 2}));
}

TEST_CASE("pointwise stability of a constant selector") {
    const Dataset d(Matrix::Identity(100, 100), Vector::LinSpaced(100, 0, 1));
    const StabilityResult r = pointwise_stability(constant_selector(SelectionSet(100, {0, 1, 2})), d, 0.5, 10, 0.9, 3);
    CHECK(r.q == 3.0);
    CHECK(r.ev_bound == doctest::Approx(9.0 / (0.8 * 100.0)).epsilon(1e-14));
    CHECK(r.stable_set.members() == std::vector<Index>{0, 1, 2});
}

TEST_CASE("pointwise stability with one resample") {
    const Dataset d = desk(6);
    const double lambda = 0.3 * lasso_lambda_max(d);
    const StabilityResult r = pointwise_stability(lasso_selector(), d, lambda, 1, 0.9, 8);
    for (double m : r.max_frequency) CHECK((m == 0.0 || m == 1.0));
    CHECK(r.q == static_cast<double>(r.stable_set.count()));
}

TEST_CASE("pointwise equals the window down to the same point for nested selectors") {
    const Dataset d = desk(7);
    const FrequencyMatrix f = selection_frequencies(omp_selector(), d, LambdaGrid::steps(15), 40, 2);
    for (Index g : {0u, 4u, 14u}) {
        const StabilityResult point = pointwise_from(f, g, 0.7);
        const StabilityResult window = stable_set(f, 0.7, LambdaWindow::down_to(g));
        CHECK(point.stable_set == window.stable_set);
    }
}

TEST_CASE("chunked fitting reproduces the full path prefix") {
    const Dataset d = desk(8);
    const LambdaGrid grid = LambdaGrid::geometric(lasso_lambda_max(d), 100, 1e-3);
    const FrequencyMatrix full = selection_frequencies(lasso_selector(), d, grid, 10, 5);
    const FrequencyMatrix part = frequencies_until(
        lasso_selector(), d, grid, 10, 5, [](const FrequencyMatrix& f) { return f.mean_union(0, f.grid().size() - 1) > 8.0; },
        16);
    REQUIRE(part.grid().size() < grid.size());
    REQUIRE(part.grid().size() % 16 == 0);
    for (Index k = 0; k < d.p(); ++k)
        for (Index g = 0; g < part.grid().size(); ++g) CHECK(part.count(k, g) == full.count(k, g));
}

TEST_CASE("union sizes over windows") {
    std::vector<std::vector<int>> bits{{0 * 2 + 0, 1 * 2 + 1}, {2 * 2 + 1}};
    const FrequencyMatrix f = from_counts(bits, 3, 2);
    CHECK(f.mean_union(0, 0) == 0.5);
    CHECK(f.mean_union(0, 1) == 1.5);
    CHECK(f.max_union(0, 1) == 2);
    CHECK(f.mean_union_prefix() == std::vector<double>{0.5, 1.5});
}

TEST_CASE("frequency TSV layout") {
    std::vector<std::vector<int>> bits{{0 * 2 + 1}, {}};
    const FrequencyMatrix f = from_counts(bits, 2, 2);
    const std::string tsv = frequency_tsv(f, {"a", "b"});
    std::istringstream in(tsv);
    std::string header, first, second, extra;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    CHECK(header.rfind("variable\t", 0) == 0);
    CHECK(first == "a\t0\t0.5");
    CHECK(second == "b\t0\t0");
    CHECK_FALSE(std::getline(in, extra));
}

TEST_CASE("resample seeds are distinct streams") {
    CHECK(resample_seed(1, 0) != resample_seed(1, 1));
    CHECK(resample_seed(1, 0) != selector_seed(1, 0));
    CHECK(resample_seed(1, 3) == resample_seed(1, 3));
}
