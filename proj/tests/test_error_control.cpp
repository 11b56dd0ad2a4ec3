#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabsel/error_control.hpp"
#include "stabsel/errors.hpp"
#include "stabsel/selectors.hpp"
#include "stabsel/simgen.hpp"

#include <cmath>

using namespace stabsel;

namespace {

double bound_oracle(double q, double p, double pi) { return q * q / ((2.0 * pi - 1.0) * p); }

// ceil(g / 10) variables, always the lowest indices, where g is the position
// of lambda on the 100-point grid from 1 down to 1e-3 (a function of lambda,
// so chunked evaluation sees the same sets)
Selector staircase(Index p) {
    return [p](const Dataset&, const LambdaGrid& grid, std::uint64_t) {
        std::vector<SelectionSet> out;
        for (Index i = 0; i < grid.size(); ++i) {
            const auto g = static_cast<Index>(std::lround(std::log(grid[i]) / std::log(1e-3) * 99.0));
            SelectionSet s(p);
            for (Index k = 0; k < (g + 9) / 10 && k < p; ++k) s.insert(k);
            out.push_back(s);
        }
        return out;
    };
}

Dataset dummy(Index p) { return Dataset(Matrix::Identity(20, static_cast<Eigen::Index>(p)), Vector::LinSpaced(20, 0, 1)); }

}  // namespace

TEST_CASE("bound at the calibration point") {
    CHECK(ev_bound(std::sqrt(0.8 * 1000), 1000, 0.9) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ev_bound(0.0, 1000, 0.9) == 0.0);
    for (double a : {0.05, 0.1, 0.5}) CHECK(ev_bound(std::sqrt(0.8 * a * 1000), 1000, 0.9) == doctest::Approx(a).epsilon(1e-14));
    CHECK(ev_bound(7.0, 300, 0.75) == doctest::Approx(bound_oracle(7.0, 300, 0.75)).epsilon(1e-15));
    CHECK_THROWS_AS(ev_bound(3.0, 100, 0.5), ConfigError);
    CHECK_THROWS_AS(ev_bound(3.0, 100, 1.01), ConfigError);
}

TEST_CASE("bound is monotone in q, pi_thr and p") {
    for (double q = 1; q < 20; q += 1.5) {
        CHECK(ev_bound(q + 0.5, 200, 0.8) > ev_bound(q, 200, 0.8));
        CHECK(ev_bound(q, 200, 0.85) < ev_bound(q, 200, 0.8));
        CHECK(ev_bound(q, 250, 0.8) < ev_bound(q, 200, 0.8));
    }
}

TEST_CASE("q calibration") {
    CHECK(calibrate_q(1000, 0.9, 1.0) == doctest::Approx(28.2842712474619).epsilon(1e-13));
    CHECK(calibrate_q(1000, 0.9, 0.1) == doctest::Approx(std::sqrt(0.8 * 0.1 * 1000)).epsilon(1e-14));
    for (Index p : {50u, 200u, 1000u})
        for (double pi : {0.55, 0.6, 0.75, 0.9, 1.0})
            for (double ev : {0.05, 1.0, 4.0}) CHECK(std::abs(ev_bound(calibrate_q(p, pi, ev), p, pi) - ev) <= 1e-12 * ev);
}

TEST_CASE("threshold calibration") {
    const double q = std::sqrt(0.8 * 500);
    CHECK(calibrate_threshold(500, q, 4.0) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(calibrate_threshold(500, q, 0.8) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(calibrate_threshold(500, std::sqrt(2.0 * 500), 1.0), ConfigError);
    for (double pi : {0.55, 0.7, 0.95}) {
        const double ev = ev_bound(q, 500, pi);
        CHECK(std::abs(calibrate_threshold(500, q, ev) - pi) <= 1e-12);
    }
}

TEST_CASE("ControlSpec fills in the third value") {
    ControlSpec s;
    s.p = 1000;
    s.pi_thr = 0.9;
    s.target_ev = 1.0;
    CHECK(*s.resolved().q == doctest::Approx(std::sqrt(800.0)));
    ControlSpec t;
    t.p = 1000;
    t.q = std::sqrt(800.0);
    t.target_ev = 1.0;
    CHECK(*t.resolved().pi_thr == doctest::Approx(0.9));
    ControlSpec u;
    u.p = 1000;
    u.q = std::sqrt(800.0);
    u.pi_thr = 0.9;
    CHECK(*u.resolved().target_ev == doctest::Approx(1.0));
    ControlSpec one;
    one.p = 10;
    one.q = 2.0;
    CHECK_THROWS_AS(one.resolved(), ConfigError);
    u.target_ev = 1.0;
    CHECK_THROWS_AS(u.resolved(), ConfigError);
}

TEST_CASE("lambda_min of a staircase selector") {
    const LambdaGrid grid = LambdaGrid::geometric(1.0, 100, 1e-3);
    const LambdaMin lm = lambda_min_for_q(staircase(20), dummy(20), grid, 5, 5.0, 1);
    CHECK(lm.index == 50);
    CHECK(lm.lambda == grid[50]);
    CHECK(lm.q_hat == 5.0);
    CHECK(lambda_min_for_q(staircase(20), dummy(20), grid, 5, 20.0, 1).index == 99);
    const CalibratedFrequencies cf = calibrated_frequencies(staircase(20), dummy(20), grid, 5, 5.0, 1);
    CHECK(cf.lambda_min.index == 50);
    CHECK(cf.freq.grid().size() >= 51);
}

TEST_CASE("lambda_min of the empty selector is the last grid point") {
    const LambdaGrid grid = LambdaGrid::geometric(1.0, 30, 1e-2);
    const LambdaMin lm = lambda_min_for_q(constant_selector(SelectionSet(8)), dummy(8), grid, 4, 2.0, 1);
    CHECK(lm.index == 29);
    CHECK(lm.q_hat == 0.0);
}

TEST_CASE("q below the first grid point is rejected") {
    const LambdaGrid grid = LambdaGrid::geometric(1.0, 10, 1e-2);
    CHECK_THROWS_AS(lambda_min_for_q(constant_selector(SelectionSet(8, {0, 1, 2})), dummy(8), grid, 4, 2.0, 1),
                    ConfigError);
}

TEST_CASE("average and per-resample policies") {
    // resample 0 selects 2 variables at g = 1, resample 1 selects 4
    FrequencyMatrix f(LambdaGrid::steps(3), 6, 0);
    f.add({SelectionSet(6, {0}), SelectionSet(6, {0, 1}), SelectionSet(6, {0, 1, 2})});
    f.add({SelectionSet(6, {3}), SelectionSet(6, {3, 4, 5, 0}), SelectionSet(6, {3, 4, 5, 0})});
    CHECK(lambda_min_from(f, 3.0, QPolicy::average).index == 1);
    CHECK(lambda_min_from(f, 3.0, QPolicy::per_resample_cap).index == 0);
    CHECK(lambda_min_from(f, 3.5, QPolicy::average).index == 2);
}

TEST_CASE("calibrated frequencies agree with the full path") {
    Rng rng = make_rng(4);
    const Dataset design = gen_design(design_preset("B-desk"), rng);
    SimTruth t = gen_beta(design.p(), 5, BetaDist::uniform01, rng);
    const Dataset d = gen_response(design, t, 2.0, rng);
    const LambdaGrid grid = LambdaGrid::geometric(lasso_lambda_max(d));
    const double q = std::sqrt(0.8 * 200);
    const CalibratedFrequencies cf = calibrated_frequencies(lasso_selector(), d, grid, 20, q, 9);
    const LambdaMin full = lambda_min_for_q(lasso_selector(), d, grid, 20, q, 9);
    CHECK(cf.lambda_min.index == full.index);
    CHECK(cf.lambda_min.q_hat == doctest::Approx(full.q_hat));
}
