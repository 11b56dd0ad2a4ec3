#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabsel/config.hpp"
#include "stabsel/errors.hpp"
#include "stabsel/harness.hpp"

#include <cmath>
#include <random>

using namespace stabsel;

namespace {

ExperimentConfig small_recovery() {
    ExperimentConfig c;
    c.methods = {Method::lasso, Method::lasso_stability, Method::randomised_lasso_stability, Method::omp,
                 Method::omp_stability, Method::romp_stability};
    c.replicates = 3;
    c.resamples = 12;
    c.pi_thrs = {0.6, 0.9};
    c.grid = {40, 1e-2};
    c.seed = 5;
    return c;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("recovery rules") {
    TEST_CASE("path recovery needs a clean set with enough true variables") {
        const SelectionSet truth(10, {1, 2, 3, 4, 5});
        std::vector<SelectionSet> path{SelectionSet(10), SelectionSet(10, {1}), SelectionSet(10, {1, 2, 7})};
        CHECK(path_recovers(path, truth, 1));
        CHECK_FALSE(path_recovers(path, truth, 2));
        path.push_back(SelectionSet(10, {1, 2}));
        CHECK(path_recovers(path, truth, 2));
        CHECK(path_recovers(path, truth, 0));
    }

    TEST_CASE("ranking recovery counts ties against the method") {
        const SelectionSet truth(5, {0, 1});
        CHECK(ranking_recovers({0.9, 0.8, 0.1, 0.0, 0.0}, truth, 2));
        CHECK_FALSE(ranking_recovers({0.9, 0.1, 0.8, 0.0, 0.0}, truth, 2));
        // variable 2 ties with the second true variable
        CHECK_FALSE(ranking_recovers({0.9, 0.8, 0.8, 0.0, 0.0}, truth, 2));
        CHECK(ranking_recovers({0.9, 0.8, 0.8, 0.0, 0.0}, truth, 1));
        CHECK_FALSE(ranking_recovers({0.0, 0.0, 0.0, 0.0, 0.0}, truth, 1));
        CHECK(ranking_recovers({0.0, 0.0, 0.0, 0.0, 0.0}, truth, 0));
    }

    TEST_CASE("noiseless orthonormal paths always recover") {
        // soft-thresholding of X'y = beta drops the smallest coefficient last
        const Index n = 30, p = 8;
        std::mt19937_64 gen(3);
        std::normal_distribution<double> z;
        Matrix a(n, p + 1);
        a.col(0).setOnes();
        for (Index i = 0; i < n; ++i)
            for (Index k = 1; k <= p; ++k) a(i, k) = z(gen);
        const Matrix x = Matrix(Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(n, p + 1)).rightCols(p);
        Vector beta = Vector::Zero(p);
        beta(2) = 0.7;
        beta(5) = 0.3;
        const Dataset d(x, Vector(x * beta));
        const auto path = lasso_path(d, LambdaGrid::geometric(lasso_lambda_max(d))).supports();
        CHECK(path_recovers(path, SelectionSet(p, {2, 5}), 1));
        CHECK(path_recovers(path, SelectionSet(p, {2, 5}), 2));
    }
}

TEST_SUITE("experiments") {
    TEST_CASE("recovery report structure") {
        const ExperimentConfig c = small_recovery();
        const ExperimentReport r = recovery_experiment(c);
        CHECK(r.kind == "recovery");
        CHECK(r.p == 200);
        CHECK(r.n == 100);
        CHECK(r.q == doctest::Approx(std::sqrt(160.0)));
        REQUIRE(r.replicates.size() == 3);
        REQUIRE(r.methods.size() == 6);
        for (const auto& rec : r.replicates) {
            CHECK(rec.support.size() == 5);
            CHECK(rec.outcomes.size() == 6);
            for (const auto& o : rec.outcomes) {
                CHECK(o.success.size() == 2);
                if (is_stability(o.method)) {
                    CHECK(o.q_hat <= r.q);
                    CHECK(o.false_selected.size() == 2);
                    // a higher threshold never selects more
                    CHECK(o.false_selected[1] + o.true_selected[1] <= o.false_selected[0] + o.true_selected[0]);
                }
            }
        }
        for (const auto& m : r.methods) {
            for (double s : m.success) CHECK((s >= 0.0 && s <= 1.0));
            CHECK(m.thresholds.size() == (is_stability(m.method) ? 2u : 0u));
        }
        const auto& t = r.methods[1].thresholds[0];
        CHECK(t.bound_configured == doctest::Approx(160.0 / (0.2 * 200)));
    }

    TEST_CASE("reports are identical for any thread count") {
        ExperimentConfig c = small_recovery();
        c.threads = 1;
        const std::string one = to_json(recovery_experiment(c));
        c.threads = 3;
        const std::string three = to_json(recovery_experiment(c));
        CHECK(one == three);
        CHECK(one.find("threads") == std::string::npos);
    }

    TEST_CASE("global null keeps false selections low") {
        ExperimentConfig c = error_control_defaults();
        c.s = 0;
        c.pi_thrs = {0.9};
        c.replicates = 8;
        c.resamples = 30;
        c.grid = {60, 1e-2};
        const ExperimentReport r = error_control_experiment(c);
        const auto& t = r.methods[0].thresholds[0];
        CHECK(t.bound_configured == doctest::Approx(1.0));
        CHECK(t.mean_v <= 1.0 + 2.0 * t.se_v + 1e-12);
    }

    TEST_CASE("error-control defaults") {
        const ExperimentConfig c = error_control_defaults();
        CHECK(c.methods == std::vector<Method>{Method::lasso_stability});
        CHECK(c.pi_thrs == std::vector<double>{0.6});
        CHECK(c.beta_dist == BetaDist::std_normal);
    }

    TEST_CASE("separation report structure") {
        SeparationConfig c;
        c.replicates = 1;
        c.resamples = 10;
        c.grid = {12, 1e-2};
        c.n = 60;
        c.p = 40;
        const SeparationReport r = separation_experiment(c);
        CHECK(r.irc_population == doctest::Approx(1.4));
        REQUIRE(r.curves.size() == 2);
        CHECK(r.curves[0].alpha == 0.2);
        CHECK(r.curves[0].mean_pi1.size() == 12);
        CHECK(r.tail_first == 9);
    }

    TEST_CASE("graph null run") {
        GraphConfig c;
        c.d = 8;
        c.n = 60;
        c.replicates = 3;
        c.resamples = 20;
        c.lambdas = {0.6, 0.4};
        c.target_ev = 1.0;
        const GraphReport r = graph_experiment(c);
        CHECK(c.edge_slots() == 28);
        CHECK(r.true_edges == 0);
        CHECK(r.lambdas.size() == 2);
        CHECK(r.false_edges.size() == 3);
        CHECK(r.worst_kkt <= 1e-5);
        CHECK(r.fits == 3 * 20 * 2);  // one fit per lambda
        GraphConfig big;
        big.d = 160;
        CHECK(big.edge_slots() == 12720);
    }

    TEST_CASE("scenario matrices") {
        const auto desk = scenario_matrix(false, ExperimentConfig{});
        CHECK(desk.size() == 10);
        const auto paper = scenario_matrix(true, ExperimentConfig{});
        CHECK(paper.size() == 40);
        CHECK(paper.front().preset == "A");
        CHECK(desk[0].seed != desk[1].seed);
    }

    TEST_CASE("invalid configurations") {
        ExperimentConfig c;
        c.s = 500;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = ExperimentConfig{};
        c.pi_thrs = {0.5};
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = ExperimentConfig{};
        c.p_w = 1.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        GraphConfig g;
        g.lambdas = {0.4, 0.6};
        CHECK_THROWS_AS(g.validate(), ConfigError);
    }
}

TEST_SUITE("config files") {
    TEST_CASE("experiment config round trip") {
        ExperimentConfig c = small_recovery();
        c.q = 9.5;
        c.q_policy = QPolicy::per_resample_cap;
        const ExperimentConfig back = experiment_config_from_json(to_json(c));
        CHECK(to_json(back) == to_json(c));
    }

    TEST_CASE("run config round trip and control defaults") {
        RunConfig c;
        c.selector = "romp";
        c.pi_thr = 0.75;
        c.input = "data.csv";
        const RunConfig back = run_config_from_json(to_json(c));
        CHECK(back.selector == "romp");
        CHECK(*back.pi_thr == 0.75);
        CHECK(back.resolved_alpha() == 0.9);
        const ControlSpec spec = RunConfig{}.control(1000);
        CHECK(*spec.pi_thr == 0.9);
        CHECK(*spec.target_ev == 1.0);
        CHECK(*spec.q == doctest::Approx(std::sqrt(800.0)));
    }

    TEST_CASE("unknown keys are rejected with their path") {
        CHECK(message_of([] { run_config_from_json(R"({"schema_version": 1, "selecter": "lasso"})"); })
                  .find("selecter") != std::string::npos);
        CHECK(message_of([] { run_config_from_json(R"({"schema_version": 1, "grid": {"size": 10, "step": 2}})"); })
                  .find("grid.step") != std::string::npos);
    }

    TEST_CASE("schema version and types are checked") {
        CHECK_THROWS_AS(run_config_from_json(R"({"selector": "lasso"})"), ConfigError);
        CHECK_THROWS_AS(run_config_from_json(R"({"schema_version": 2})"), ConfigError);
        CHECK_THROWS_AS(run_config_from_json(R"({"schema_version": 1, "resamples": "many"})"), ConfigError);
        CHECK_THROWS_AS(run_config_from_json("{not json"), ConfigError);
        CHECK_THROWS_AS(run_config_from_json(R"({"schema_version": 1, "selector": "ridge"})"), ConfigError);
        CHECK_THROWS_AS(run_config_from_json(R"({"schema_version": 1, "pi_thr": 0.9, "q": 3, "target_ev": 1})"),
                        ConfigError);
    }

    TEST_CASE("separation and graph configs") {
        const SeparationConfig s = separation_config_from_json(R"({"schema_version": 1, "rho": 0.3, "alphas": [0.5]})");
        CHECK(s.rho == 0.3);
        CHECK(s.alphas == std::vector<double>{0.5});
        const GraphConfig g = graph_config_from_json(R"({"schema_version": 1, "d": 10, "lambdas": [0.9, 0.3]})");
        CHECK(g.d == 10);
        CHECK(g.lambdas.size() == 2);
        CHECK_THROWS_AS(graph_config_from_json(R"({"schema_version": 1, "dim": 10})"), ConfigError);
    }
}

TEST_SUITE("report tables") {
    TEST_CASE("summary and replicate TSV") {
        ExperimentConfig c = small_recovery();
        c.methods = {Method::lasso, Method::lasso_stability};
        c.replicates = 2;
        const ExperimentReport r = recovery_experiment(c);
        const std::string summary = summary_tsv(r);
        CHECK(summary.rfind("method\tgamma\tsuccess", 0) == 0);
        // lasso: one row per gamma; stability: one per gamma and threshold
        CHECK(std::count(summary.begin(), summary.end(), '\n') == 1 + 2 + 4);
        const std::string reps = replicate_tsv(r);
        CHECK(std::count(reps.begin(), reps.end(), '\n') == 1 + 2 * 2 * 2);
    }
}
