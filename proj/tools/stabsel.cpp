#include "stabsel/config.hpp"
#include "stabsel/diagnostics.hpp"
#include "stabsel/errors.hpp"
#include "stabsel/harness.hpp"
#include "stabsel/io.hpp"
#include "stabsel/selectors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace stabsel;
using Json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, data_error = 3, numerical_error = 4 };

int exit_code(const Error& e) {
    switch (e.category()) {
        case Error::Category::config: return config_error;
        case Error::Category::data: return data_error;
        case Error::Category::numerical: return numerical_error;
    }
    return failure;
}

template <class T>
void override_with(T& target, const std::optional<T>& value) {
    if (value) target = *value;
}

// ---------------------------------------------------------------------------
// select

struct SelectArgs {
    std::string config;
    std::optional<std::string> input, output_dir, selector, q_policy, response;
    std::optional<double> alpha, p_w, pi, ev, q, grid_ratio;
    std::optional<Index> resamples, grid_size, threads;
    std::optional<std::uint64_t> seed;
    bool full_path = false, no_normalize = false, no_header = false;
};

RunConfig resolve(const SelectArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : [&] {
        try {
            return run_config_from_json(read_file(a.config));
        } catch (const Error& e) {
            throw e.with_context(a.config);
        }
    }();
    override_with(cfg.input, a.input);
    override_with(cfg.output_dir, a.output_dir);
    override_with(cfg.selector, a.selector);
    override_with(cfg.response_column, a.response);
    if (a.q_policy) cfg.q_policy = q_policy_from_string(*a.q_policy);
    if (a.alpha) cfg.alpha = a.alpha;
    override_with(cfg.p_w, a.p_w);
    // flags replace whatever pair of control values the file fixed
    if (a.pi || a.ev || a.q) {
        cfg.pi_thr = a.pi;
        cfg.target_ev = a.ev;
        cfg.q = a.q;
    }
    override_with(cfg.resamples, a.resamples);
    override_with(cfg.grid.size, a.grid_size);
    override_with(cfg.grid.ratio, a.grid_ratio);
    override_with(cfg.threads, a.threads);
    override_with(cfg.seed, a.seed);
    if (a.full_path) cfg.full_path = true;
    if (a.no_normalize) cfg.normalize = false;
    if (a.no_header) cfg.has_header = false;
    if (cfg.input.empty()) throw ConfigError("no input CSV given (--input or \"input\")");
    if (cfg.output_dir.empty()) throw ConfigError("no output directory given (--output-dir or \"output_dir\")");
    cfg.validate();
    return cfg;
}

int cmd_select(const SelectArgs& args) {
    const RunConfig cfg = resolve(args);
    CsvOptions csv;
    csv.has_header = cfg.has_header;
    csv.response_column = cfg.response_column;
    Dataset data = load_csv(cfg.input, csv);
    if (!data.has_response()) throw DataError(cfg.input + ": no response column '" + cfg.response_column + "'");
    if (cfg.normalize) data = normalize_columns(data);

    const ControlSpec control = cfg.control(data.p());
    const double q = *control.q;
    const double pi_thr = *control.pi_thr;
    const EngineOptions engine{cfg.threads};

    std::optional<FrequencyMatrix> freq;
    LambdaMin lm;
    if (cfg.selector == "lasso" || cfg.selector == "randomised_lasso") {
        const Selector sel = cfg.selector == "lasso" ? lasso_selector()
                                                     : randomised_lasso_selector(cfg.resolved_alpha(), cfg.p_w);
        const LambdaGrid grid = LambdaGrid::geometric(lasso_lambda_max(data), cfg.grid.size, cfg.grid.ratio);
        if (cfg.full_path) {
            freq.emplace(selection_frequencies(sel, data, grid, cfg.resamples, cfg.seed, engine));
            lm = lambda_min_from(*freq, q, cfg.q_policy);
        } else {
            auto cf = calibrated_frequencies(sel, data, grid, cfg.resamples, q, cfg.seed, cfg.q_policy, engine);
            freq.emplace(std::move(cf.freq));
            lm = cf.lambda_min;
        }
    } else {
        const Index n_sub = data.n() / 2;
        if (n_sub < 2) throw DataError("need at least 4 rows for greedy selection on half-samples");
        Index cap = std::min(n_sub - 1, data.p());
        if (!cfg.full_path) cap = std::min(cap, static_cast<Index>(std::floor(q)) + 1);
        const Selector sel = cfg.selector == "omp" ? omp_selector() : romp_selector(cfg.resolved_alpha());
        freq.emplace(selection_frequencies(sel, data, LambdaGrid::steps(cap), cfg.resamples, cfg.seed, engine));
        lm = lambda_min_from(*freq, q, cfg.q_policy);
    }

    StabilityResult result = stable_set(*freq, pi_thr, LambdaWindow::down_to(lm.index));
    result.lambda_min = lm.lambda;

    Json stable = Json::array();
    for (Index k : result.stable_set.members()) stable.push_back(data.names()[k]);
    Json out{{"config", Json::parse(to_json(cfg))},
             {"n", data.n()},
             {"p", data.p()},
             {"control",
              {{"q", q}, {"pi_thr", pi_thr}, {"target_ev", *control.target_ev}, {"ev_bound", ev_bound(q, data.p(), pi_thr)}}},
             {"lambda_min", lm.lambda},
             {"lambda_min_index", lm.index},
             {"q_hat", lm.q_hat},
             {"ev_bound_realized", result.ev_bound},
             {"stable_set", stable}};

    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    write_files({{dir / "frequencies.tsv", frequency_tsv(*freq, data.names())},
                 {dir / "stable_set.tsv", stable_set_tsv(result, data.names())},
                 {dir / "control.json", out.dump(2) + "\n"},
                 {dir / "stability_paths.svg", stability_svg(*freq, result, data.names())}});

    std::cout << "stable set (" << stable.size() << "):";
    for (const auto& name : stable) std::cout << ' ' << name.get<std::string>();
    std::cout << "\nq = " << q << ", pi_thr = " << pi_thr << ", lambda_min = " << lm.lambda << '\n';
    return ok;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string preset = "A-desk";
    std::uint64_t seed = 1;
    Index s = 5;
    double snr = 2.0;
    std::string beta_dist = "uniform01";
    std::string output;
    std::string truth;
};

int cmd_simulate(const SimulateArgs& a) {
    const DesignSpec spec = design_preset(a.preset);
    if (a.s > spec.p) throw ConfigError("s exceeds p = " + std::to_string(spec.p));
    if (!(a.snr > 0.0)) throw ConfigError("snr must be positive");
    const BetaDist dist = beta_dist_from_string(a.beta_dist);

    Rng drng = make_rng(derive_seed(a.seed, streams::design));
    const Dataset design = gen_design(spec, drng);
    Rng brng = make_rng(derive_seed(a.seed, streams::beta));
    SimTruth truth = gen_beta(design.p(), a.s, dist, brng);
    Rng nrng = make_rng(derive_seed(a.seed, streams::noise));
    const Dataset data = gen_response(design, truth, a.snr, nrng);

    std::vector<std::pair<fs::path, std::string>> files;
    const std::string csv = to_csv(data);
    if (!a.output.empty()) files.emplace_back(a.output, csv);
    if (!a.truth.empty()) {
        std::vector<Index> support;
        std::vector<double> beta;
        for (Index k : truth.support) {
            support.push_back(k + 1);
            beta.push_back(truth.beta(static_cast<Eigen::Index>(k)));
        }
        Json j{{"preset", a.preset}, {"seed", a.seed},   {"s", a.s},
               {"snr", a.snr},       {"beta_dist", a.beta_dist},
               {"support", support}, {"beta", beta},     {"sigma", truth.sigma},
               {"realized_snr", truth.realized_snr}};
        files.emplace_back(a.truth, j.dump(2) + "\n");
    }
    write_files(files);
    if (a.output.empty()) std::cout << csv;
    return ok;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
    std::optional<std::string> design;
    double rho = 0.5;
    Index p = 5;
    std::optional<std::string> input;
    bool no_header = false;
    std::vector<Index> support;   // 1-based
    std::vector<int> signs;
    std::vector<double> k;
    bool greedy = false;
    std::uint64_t seed = 1;
};

int cmd_diagnose(const DiagnoseArgs& a) {
    if (a.design.has_value() == a.input.has_value()) throw ConfigError("give exactly one of --design and --input");
    Matrix x;
    std::vector<Index> support;
    for (Index k : a.support) {
        if (k == 0) throw ConfigError("--support is 1-based");
        support.push_back(k - 1);
    }
    std::optional<std::vector<int>> signs;
    if (!a.signs.empty()) signs = a.signs;

    if (a.design) {
        DesignSpec spec;
        spec.kind = design_kind_from_string(*a.design);
        spec.p = a.p;
        spec.n = a.p;
        spec.rho = a.rho;
        spec.validate();
        x = population_design(spec);
        if (spec.kind == DesignKind::two_correlated && support.empty()) {
            support = {0, 1};
            if (!signs) signs = std::vector<int>{1, 1};
        }
    } else {
        CsvOptions csv;
        csv.has_header = !a.no_header;
        x = normalize_columns(load_csv(*a.input, csv)).x();
    }
    if (support.empty()) throw ConfigError("--support is required for this design");
    for (Index k : support)
        if (k >= static_cast<Index>(x.cols())) throw ConfigError("support index " + std::to_string(k + 1) + " exceeds p");
    if (signs && signs->size() != support.size()) throw ConfigError("--signs needs one entry per support variable");

    const auto report = condition_report(x, support, signs, a.k, a.seed, a.greedy ? EigenMode::greedy : EigenMode::exact);
    std::cout << to_text(report);
    return ok;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
    Index p = 0;
    std::optional<double> pi, ev, q;
};

int cmd_calibrate(const CalibrateArgs& a) {
    ControlSpec spec;
    spec.p = a.p;
    spec.pi_thr = a.pi;
    spec.target_ev = a.ev;
    spec.q = a.q;
    const ControlSpec r = spec.resolved();
    std::ostringstream out;
    out.precision(15);
    out << "q = " << *r.q << "\npi_thr = " << *r.pi_thr << "\nev_bound = " << ev_bound(*r.q, a.p, *r.pi_thr) << '\n';
    std::cout << out.str();
    return ok;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
    std::string kind;
    std::string config;
    std::string output;
    std::string tsv;
    std::optional<Index> threads, replicates, resamples, s;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset;
    std::optional<double> snr;
    bool scenarios = false;
    bool paper_scale = false;
};

template <class Cfg>
void apply_common(Cfg& cfg, const ExperimentArgs& a) {
    override_with(cfg.threads, a.threads);
    override_with(cfg.replicates, a.replicates);
    override_with(cfg.resamples, a.resamples);
    override_with(cfg.seed, a.seed);
}

std::string config_text(const ExperimentArgs& a) {
    if (a.config.empty()) return {};
    return read_file(a.config);
}

int cmd_experiment(const ExperimentArgs& a) {
    const auto start = std::chrono::steady_clock::now();
    std::string json, tsv;
    try {
        const std::string text = config_text(a);
        if (a.kind == "recovery" || a.kind == "error-control") {
            ExperimentConfig base = a.kind == "recovery" ? ExperimentConfig{} : error_control_defaults();
            ExperimentConfig cfg = text.empty() ? base : experiment_config_from_json(text, base);
            apply_common(cfg, a);
            override_with(cfg.preset, a.preset);
            override_with(cfg.s, a.s);
            override_with(cfg.snr, a.snr);
            if (a.scenarios || a.paper_scale) {
                if (a.kind != "recovery") throw ConfigError("--scenarios applies to recovery experiments only");
                if (text.empty())
                    cfg.methods = {Method::lasso, Method::lasso_stability, Method::randomised_lasso_stability,
                                   Method::omp, Method::omp_stability, Method::romp_stability};
                Json all = Json::array();
                for (const auto& sc : scenario_matrix(a.paper_scale, cfg)) {
                    const ExperimentReport report = recovery_experiment(sc);
                    all.push_back(Json::parse(to_json(report)));
                    std::ostringstream head;
                    head << "# preset=" << sc.preset << " s=" << sc.s << " snr=" << sc.snr << '\n';
                    tsv += head.str() + summary_tsv(report);
                }
                json = all.dump(2) + "\n";
            } else {
                const ExperimentReport report =
                    a.kind == "recovery" ? recovery_experiment(cfg) : error_control_experiment(cfg);
                json = to_json(report);
                tsv = summary_tsv(report);
            }
        } else if (a.kind == "separation") {
            SeparationConfig cfg = text.empty() ? SeparationConfig{} : separation_config_from_json(text);
            apply_common(cfg, a);
            const SeparationReport report = separation_experiment(cfg);
            json = to_json(report);
            tsv = curves_tsv(report);
        } else {
            GraphConfig cfg = text.empty() ? GraphConfig{} : graph_config_from_json(text);
            apply_common(cfg, a);
            const GraphReport report = graph_experiment(cfg);
            json = to_json(report);
            tsv = graph_tsv(report);
        }
    } catch (const Error& e) {
        if (a.config.empty()) throw;
        throw e.with_context(a.config);
    }

    std::vector<std::pair<fs::path, std::string>> files;
    if (!a.output.empty()) files.emplace_back(a.output, json);
    if (!a.tsv.empty()) files.emplace_back(a.tsv, tsv);
    write_files(files);
    if (a.output.empty()) std::cout << json;

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::cerr << "runtime " << elapsed.count() << " s\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability selection with error control"};
    app.require_subcommand(1);

    SelectArgs sel;
    auto* select = app.add_subcommand("select", "Stability selection on a CSV file");
    select->add_option("--config", sel.config, "JSON run config")->check(CLI::ExistingFile);
    select->add_option("--input", sel.input, "CSV with predictors and response");
    select->add_option("--output-dir", sel.output_dir);
    select->add_option("--selector", sel.selector, "lasso, randomised_lasso, omp or romp");
    select->add_option("--alpha", sel.alpha, "weakness of the randomised selectors");
    select->add_option("--p-w", sel.p_w, "probability of the weak penalty weight");
    select->add_option("-B,--resamples", sel.resamples);
    select->add_option("--pi", sel.pi, "threshold pi_thr");
    select->add_option("--ev", sel.ev, "target bound on E(V)");
    select->add_option("--q", sel.q, "average number of selected variables");
    select->add_option("--q-policy", sel.q_policy, "average or per_resample_cap");
    select->add_option("--grid-size", sel.grid_size);
    select->add_option("--grid-ratio", sel.grid_ratio);
    select->add_flag("--full-path", sel.full_path, "fit the whole grid");
    select->add_flag("--no-normalize", sel.no_normalize);
    select->add_option("--seed", sel.seed);
    select->add_option("--threads", sel.threads, "0 uses every core");
    select->add_flag("--no-header", sel.no_header);
    select->add_option("--response", sel.response, "name of the response column");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write one simulated regression data set as CSV");
    simulate->add_option("--preset", sim.preset)->capture_default_str();
    simulate->add_option("--seed", sim.seed)->capture_default_str();
    simulate->add_option("--s", sim.s, "number of nonzero coefficients")->capture_default_str();
    simulate->add_option("--snr", sim.snr)->capture_default_str();
    simulate->add_option("--beta-dist", sim.beta_dist, "uniform01 or std_normal")->capture_default_str();
    simulate->add_option("--output", sim.output, "CSV path, stdout when omitted");
    simulate->add_option("--truth", sim.truth, "JSON path for the true coefficients (1-based support)");

    DiagnoseArgs dia;
    auto* diagnose = app.add_subcommand("diagnose", "Design conditions for a support");
    diagnose->add_option("--design", dia.design, "population design kind");
    diagnose->add_option("--rho", dia.rho)->capture_default_str();
    diagnose->add_option("--p", dia.p)->capture_default_str();
    diagnose->add_option("--input", dia.input, "CSV design instead of a population design");
    diagnose->add_flag("--no-header", dia.no_header);
    diagnose->add_option("--support", dia.support, "1-based variable indices")->delimiter(',');
    diagnose->add_option("--signs", dia.signs, "+1/-1 per support variable")->delimiter(',');
    diagnose->add_option("--k", dia.k, "sparse eigenvalue sizes")->delimiter(',');
    diagnose->add_flag("--greedy", dia.greedy, "greedy sparse eigenvalue bounds");
    diagnose->add_option("--seed", dia.seed)->capture_default_str();

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Solve for the third of q, pi_thr and the E(V) bound");
    calibrate->add_option("--p", cal.p)->required();
    calibrate->add_option("--pi", cal.pi);
    calibrate->add_option("--ev", cal.ev);
    calibrate->add_option("--q", cal.q);

    ExperimentArgs exp;
    auto* experiment = app.add_subcommand("experiment", "Simulation experiments");
    experiment->add_option("kind", exp.kind)
        ->required()
        ->check(CLI::IsMember({"recovery", "error-control", "separation", "graph"}));
    experiment->add_option("--config", exp.config)->check(CLI::ExistingFile);
    experiment->add_option("--output", exp.output, "JSON report path, stdout when omitted");
    experiment->add_option("--tsv", exp.tsv, "summary table path");
    experiment->add_option("--threads", exp.threads);
    experiment->add_option("--seed", exp.seed);
    experiment->add_option("--replicates", exp.replicates);
    experiment->add_option("--resamples", exp.resamples);
    experiment->add_option("--preset", exp.preset);
    experiment->add_option("--s", exp.s);
    experiment->add_option("--snr", exp.snr);
    experiment->add_flag("--scenarios", exp.scenarios, "desk scenario matrix");
    experiment->add_flag("--paper-scale", exp.paper_scale, "p = 1000 scenario matrix (hours)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*select) return cmd_select(sel);
        if (*simulate) return cmd_simulate(sim);
        if (*diagnose) return cmd_diagnose(dia);
        if (*calibrate) return cmd_calibrate(cal);
        return cmd_experiment(exp);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}
