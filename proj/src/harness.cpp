#include "stabsel/harness.hpp"

#include "stabsel/diagnostics.hpp"
#include "stabsel/errors.hpp"
#include "stabsel/parallel.hpp"
#include "stabsel/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stabsel {

namespace {

constexpr std::pair<Method, const char*> kMethodNames[] = {
    {Method::lasso, "lasso"},
    {Method::lasso_stability, "lasso_stability"},
    {Method::randomised_lasso_stability, "randomised_lasso_stability"},
    {Method::omp, "omp"},
    {Method::omp_stability, "omp_stability"},
    {Method::romp_stability, "romp_stability"},
};

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// standard error of the mean, sample standard deviation with R - 1
double se_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Index needed(double gamma, Index s) {
    return static_cast<Index>(std::ceil(gamma * static_cast<double>(s) - 1e-12));
}

}  // namespace

std::string to_string(Method method) {
    for (const auto& [m, name] : kMethodNames)
        if (m == method) return name;
    return "unknown";
}

Method method_from_string(const std::string& name) {
    for (const auto& [m, n] : kMethodNames)
        if (name == n) return m;
    throw ConfigError("unknown method '" + name +
                      "' (expected lasso, lasso_stability, randomised_lasso_stability, omp, omp_stability or "
                      "romp_stability)");
}

bool is_stability(Method method) { return method != Method::lasso && method != Method::omp; }

void ExperimentConfig::validate() const {
    const DesignSpec spec = design_preset(preset);
    if (s > spec.p) throw ConfigError("s = " + std::to_string(s) + " exceeds p = " + std::to_string(spec.p));
    if (!(snr > 0.0)) throw ConfigError("snr must be positive");
    if (methods.empty()) throw ConfigError("at least one method is required");
    if (replicates < 1) throw ConfigError("replicates R must be at least 1");
    if (resamples < 1) throw ConfigError("resamples B must be at least 1");
    for (double g : gammas)
        if (!(g > 0.0 && g <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    for (double pi : pi_thrs)
        if (!(pi > 0.5 && pi <= 1.0)) throw ConfigError("pi_thr must lie in (0.5, 1]");
    if (q && !(*q >= 1.0)) throw ConfigError("q must be at least 1");
    for (double a : {lasso_alpha, omp_alpha})
        if (!(a > 0.0 && a <= 1.0)) throw ConfigError("weakness alpha must lie in (0, 1]");
    if (!(p_w > 0.0 && p_w < 1.0)) throw ConfigError("p_w must lie in (0, 1)");
    if (grid.size < 1 || !(grid.ratio > 0.0 && grid.ratio < 1.0)) throw ConfigError("grid needs size >= 1 and ratio in (0, 1)");
}

double ExperimentConfig::resolved_q(Index p) const { return q ? *q : std::sqrt(0.8 * static_cast<double>(p)); }

bool path_recovers(const std::vector<SelectionSet>& path, const SelectionSet& truth, Index need) {
    for (const auto& set : path) {
        Index hits = 0;
        bool clean = true;
        for (Index k : set.members()) {
            if (truth.contains(k)) {
                ++hits;
            } else {
                clean = false;
                break;
            }
        }
        if (clean && hits >= need) return true;
    }
    return false;
}

bool ranking_recovers(const std::vector<double>& score, const SelectionSet& truth, Index need) {
    if (need == 0) return true;
    if (need > score.size()) return false;
    std::vector<double> sorted = score;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(need - 1), sorted.end(),
                     std::greater<>());
    const double cut = sorted[need - 1];
    for (Index k = 0; k < score.size(); ++k)
        if (score[k] >= cut && !truth.contains(k)) return false;
    return true;
}

namespace {

ReplicateRecord run_replicate(const ExperimentConfig& cfg, Index r, double q) {
    ReplicateRecord rec;
    rec.replicate = r;
    rec.seed = derive_seed(cfg.seed, streams::replicate, r);

    const DesignSpec spec = design_preset(cfg.preset);
    Rng drng = make_rng(derive_seed(rec.seed, streams::design));
    const Dataset design = gen_design(spec, drng);
    Rng brng = make_rng(derive_seed(rec.seed, streams::beta));
    SimTruth truth = gen_beta(design.p(), cfg.s, cfg.beta_dist, brng);
    Rng nrng = make_rng(derive_seed(rec.seed, streams::noise));
    const Dataset data = cfg.s == 0 ? gen_response_fixed_noise(design, truth.beta, 1.0 / std::sqrt(design.n()), nrng)
                                    : gen_response(design, truth, cfg.snr, nrng);
    rec.support = truth.support;
    rec.sigma = cfg.s == 0 ? 1.0 : truth.sigma;
    rec.realized_snr = cfg.s == 0 ? 0.0 : truth.realized_snr;

    if (!truth.support.empty()) {
        std::vector<int> signs;
        for (Index k : truth.support) signs.push_back(truth.beta(static_cast<Eigen::Index>(k)) > 0 ? 1 : -1);
        const auto irc = irrepresentable(data.x(), truth.support, signs);
        rec.irc_value = irc.value;
        rec.irc_violations = irc.violating.size();
    }
    if (data.p() >= 2) rec.max_cor = max_correlation(data.x(), derive_seed(rec.seed, streams::design, 1)).value;

    const SelectionSet truth_set(data.p(), truth.support);
    const LambdaGrid grid = LambdaGrid::geometric(lasso_lambda_max(data), cfg.grid.size, cfg.grid.ratio);
    const std::uint64_t stab_seed = derive_seed(rec.seed, streams::subsample);
    const Index n_sub = data.n() / 2;

    for (Method method : cfg.methods) {
        MethodOutcome out;
        out.method = method;
        if (method == Method::lasso || method == Method::omp) {
            std::vector<SelectionSet> path;
            if (method == Method::lasso) {
                path = lasso_path(data, grid).supports();
            } else {
                const OmpTrace trace = omp(data, std::min(data.n() - 1, data.p()));
                path.push_back(SelectionSet(data.p()));
                for (Index m = 1; m <= trace.steps(); ++m) path.push_back(trace.selected(m));
            }
            for (double g : cfg.gammas) out.success.push_back(path_recovers(path, truth_set, needed(g, cfg.s)));
            rec.outcomes.push_back(std::move(out));
            continue;
        }

        std::optional<FrequencyMatrix> freq;
        LambdaMin lm;
        if (method == Method::lasso_stability || method == Method::randomised_lasso_stability) {
            const Selector sel = method == Method::lasso_stability
                                     ? lasso_selector()
                                     : randomised_lasso_selector(cfg.lasso_alpha, cfg.p_w);
            auto cf = calibrated_frequencies(sel, data, grid, cfg.resamples, q, stab_seed, cfg.q_policy);
            freq.emplace(std::move(cf.freq));
            lm = cf.lambda_min;
        } else {
            // nested selections: the union after m steps is exactly m variables
            const Index cap = std::min({n_sub - 1, data.p(), static_cast<Index>(std::floor(q)) + 1});
            const Selector sel = method == Method::omp_stability ? omp_selector() : romp_selector(cfg.omp_alpha);
            freq.emplace(selection_frequencies(sel, data, LambdaGrid::steps(cap), cfg.resamples, stab_seed));
            lm = lambda_min_from(*freq, q, cfg.q_policy);
        }
        out.q_hat = lm.q_hat;
        out.lambda_min = lm.lambda;
        out.lambda_min_index = lm.index;
        const auto score = freq->max_pi(0, lm.index);
        for (double g : cfg.gammas) out.success.push_back(ranking_recovers(score, truth_set, needed(g, cfg.s)));
        for (double pi : cfg.pi_thrs) {
            const StabilityResult res = stable_set(*freq, pi, LambdaWindow::down_to(lm.index));
            Index tp = 0;
            for (Index k : res.stable_set.members()) tp += truth_set.contains(k) ? 1 : 0;
            out.true_selected.push_back(tp);
            out.false_selected.push_back(res.stable_set.count() - tp);
        }
        rec.outcomes.push_back(std::move(out));
    }
    return rec;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::string kind) {
    cfg.validate();
    const DesignSpec spec = design_preset(cfg.preset);
    ExperimentReport report;
    report.kind = std::move(kind);
    report.config = cfg;
    report.p = spec.p;
    report.n = spec.n;
    report.q = cfg.resolved_q(spec.p);

    report.replicates.resize(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](Index r) {
        try {
            report.replicates[r] = run_replicate(cfg, r, report.q);
        } catch (const Error& e) {
            throw e.with_context("preset " + cfg.preset + ", replicate " + std::to_string(r));
        }
    });

    const double R = static_cast<double>(cfg.replicates);
    for (Index m = 0; m < cfg.methods.size(); ++m) {
        MethodSummary sum;
        sum.method = cfg.methods[m];
        for (Index g = 0; g < cfg.gammas.size(); ++g) {
            double hits = 0;
            for (const auto& rec : report.replicates) hits += rec.outcomes[m].success[g] ? 1.0 : 0.0;
            const double prob = hits / R;
            sum.success.push_back(prob);
            sum.success_se.push_back(std::sqrt(prob * (1.0 - prob) / R));
        }
        if (is_stability(sum.method)) {
            std::vector<double> qs;
            for (const auto& rec : report.replicates) qs.push_back(rec.outcomes[m].q_hat);
            sum.mean_q_hat = mean_of(qs);
            for (Index t = 0; t < cfg.pi_thrs.size(); ++t) {
                std::vector<double> v, tp;
                for (const auto& rec : report.replicates) {
                    v.push_back(static_cast<double>(rec.outcomes[m].false_selected[t]));
                    tp.push_back(cfg.s == 0 ? 0.0
                                            : static_cast<double>(rec.outcomes[m].true_selected[t]) /
                                                  static_cast<double>(cfg.s));
                }
                const double pi = cfg.pi_thrs[t];
                sum.thresholds.push_back(ThresholdSummary{pi, mean_of(v), se_of(v), ev_bound(report.q, report.p, pi),
                                                          ev_bound(sum.mean_q_hat, report.p, pi), mean_of(tp)});
            }
        }
        report.methods.push_back(std::move(sum));
    }
    std::vector<double> viol, cor;
    for (const auto& rec : report.replicates) {
        viol.push_back(static_cast<double>(rec.irc_violations));
        cor.push_back(rec.max_cor);
    }
    report.median_irc_violations = median_of(viol);
    report.mean_max_cor = mean_of(cor);
    return report;
}

}  // namespace

ExperimentReport recovery_experiment(const ExperimentConfig& config) { return run_experiment(config, "recovery"); }

ExperimentConfig error_control_defaults() {
    ExperimentConfig cfg;
    cfg.methods = {Method::lasso_stability};
    cfg.pi_thrs = {0.6};
    cfg.beta_dist = BetaDist::std_normal;
    cfg.replicates = 100;
    return cfg;
}

ExperimentReport error_control_experiment(ExperimentConfig config) {
    return run_experiment(config, "error_control");
}

std::vector<ExperimentConfig> scenario_matrix(bool paper_scale, const ExperimentConfig& base) {
    const std::vector<std::string> presets =
        paper_scale ? std::vector<std::string>{"A", "A-n1000", "B", "B-n1000", "C", "C-n1000", "D", "D-n1000", "E", "E-n1000"}
                    : std::vector<std::string>{"A-desk", "B-desk", "C-desk", "D-desk", "E-desk"};
    const std::vector<Index> sizes = paper_scale ? std::vector<Index>{4, 20} : std::vector<Index>{5};
    std::vector<ExperimentConfig> out;
    for (const auto& preset : presets)
        for (double snr : {0.5, 2.0})
            for (Index s : sizes) {
                ExperimentConfig c = base;
                c.preset = preset;
                c.snr = snr;
                c.s = s;
                c.seed = derive_seed(base.seed, streams::replicate, out.size() + 1);
                out.push_back(std::move(c));
            }
    return out;
}

// ---------------------------------------------------------------------------

void SeparationConfig::validate() const {
    DesignSpec{DesignKind::two_correlated, n, p, rho, 0}.validate();
    if (!(noise_sd >= 0.0)) throw ConfigError("noise sd must be non-negative");
    if (alphas.empty()) throw ConfigError("at least one alpha is required");
    for (double a : alphas)
        if (!(a > 0.0 && a <= 1.0)) throw ConfigError("weakness alpha must lie in (0, 1]");
    if (!(p_w > 0.0 && p_w < 1.0)) throw ConfigError("p_w must lie in (0, 1)");
    if (resamples < 1 || replicates < 1) throw ConfigError("B and R must be at least 1");
    if (grid.size < 1 || !(grid.ratio > 0.0 && grid.ratio < 1.0)) throw ConfigError("grid needs size >= 1 and ratio in (0, 1)");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ConfigError("tail fraction must lie in (0, 1]");
}

SeparationReport separation_experiment(const SeparationConfig& cfg) {
    cfg.validate();
    SeparationReport report;
    report.config = cfg;
    report.irc_population = 2.0 * std::abs(cfg.rho);
    const Index G = cfg.grid.size;
    report.tail_first = std::min(G - 1, static_cast<Index>(std::floor(static_cast<double>(G) * (1.0 - cfg.tail_fraction))));

    const Index A = cfg.alphas.size();
    // per replicate, per alpha: four curves
    std::vector<std::vector<std::array<std::vector<double>, 4>>> curves(cfg.replicates,
                                                                        std::vector<std::array<std::vector<double>, 4>>(A));
    parallel_for(cfg.replicates, cfg.threads, [&](Index r) {
        const std::uint64_t seed = derive_seed(cfg.seed, streams::replicate, r);
        const DesignSpec spec{DesignKind::two_correlated, cfg.n, cfg.p, cfg.rho, 0};
        Rng drng = make_rng(derive_seed(seed, streams::design));
        const Matrix raw = gen_design_raw(spec, drng);
        Vector beta = Vector::Zero(static_cast<Eigen::Index>(cfg.p));
        beta(0) = beta(1) = 1.0;
        Rng nrng = make_rng(derive_seed(seed, streams::noise));
        const Dataset noisy = gen_response_fixed_noise(Dataset(raw), beta, cfg.noise_sd, nrng);
        const Dataset data = normalize_columns(noisy);
        const LambdaGrid grid = LambdaGrid::geometric(lasso_lambda_max(data), G, cfg.grid.ratio);
        for (Index a = 0; a < A; ++a) {
            const FrequencyMatrix freq =
                selection_frequencies(randomised_lasso_selector(cfg.alphas[a], cfg.p_w), data, grid, cfg.resamples,
                                      derive_seed(seed, streams::subsample));
            auto& c = curves[r][a];
            for (auto& v : c) v.assign(G, 0.0);
            for (Index g = 0; g < G; ++g) {
                c[0][g] = freq.pi(0, g);
                c[1][g] = freq.pi(1, g);
                c[2][g] = freq.pi(2, g);
                double rest = 0.0;
                for (Index k = 3; k < cfg.p; ++k) rest = std::max(rest, freq.pi(k, g));
                c[3][g] = rest;
            }
        }
    });

    for (Index a = 0; a < A; ++a) {
        SeparationCurves out;
        out.alpha = cfg.alphas[a];
        std::array<std::vector<double>*, 4> means{&out.mean_pi1, &out.mean_pi2, &out.mean_pi3, &out.mean_pi_rest};
        for (auto* m : means) m->assign(G, 0.0);
        for (Index r = 0; r < cfg.replicates; ++r) {
            const auto& c = curves[r][a];
            double tail = 1.0;
            for (Index g = report.tail_first; g < G; ++g) tail = std::min({tail, c[0][g], c[1][g]});
            out.tail_min_relevant.push_back(tail);
            out.max_irrelevant.push_back(*std::max_element(c[2].begin(), c[2].end()));
            for (Index j = 0; j < 4; ++j)
                for (Index g = 0; g < G; ++g) (*means[j])[g] += c[j][g] / static_cast<double>(cfg.replicates);
        }
        out.median_tail_min_relevant = median_of(out.tail_min_relevant);
        out.median_max_irrelevant = median_of(out.max_irrelevant);
        out.separated = out.median_tail_min_relevant >= cfg.relevant_min && out.median_max_irrelevant <= cfg.irrelevant_max;
        report.curves.push_back(std::move(out));
    }
    return report;
}

// ---------------------------------------------------------------------------

void GraphConfig::validate() const {
    if (d < 2) throw ConfigError("graph experiment needs d >= 2");
    if (n < 4) throw ConfigError("graph experiment needs n >= 4");
    if (lambdas.empty()) throw ConfigError("at least one lambda is required");
    for (Index i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw ConfigError("lambdas must be positive");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw ConfigError("lambdas must be strictly decreasing");
    }
    if (!(target_ev > 0.0)) throw ConfigError("target E(V) must be positive");
    if (resamples < 1 || replicates < 1) throw ConfigError("B and R must be at least 1");
    if (!(drift_tolerance >= 0.0)) throw ConfigError("drift tolerance must be non-negative");
}

GraphReport graph_experiment(const GraphConfig& cfg) {
    cfg.validate();
    GraphReport report;
    report.config = cfg;
    const Matrix theta = banded_precision(cfg.d, cfg.band, cfg.band_value);
    const Index slots = cfg.edge_slots();
    SelectionSet truth(slots);
    if (!cfg.null_permuted)
        for (Index j = 0; j < cfg.d; ++j)
            for (Index k = j + 1; k < cfg.d; ++k)
                if (theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) != 0.0) truth.insert(edge_index(j, k, cfg.d));
    report.true_edges = truth.count();

    const LambdaGrid grid(cfg.lambdas);
    const Index L = grid.size();
    auto monitor = std::make_shared<KktMonitor>();
    const Selector sel = glasso_selector({}, monitor);

    struct Cell {
        bool feasible = false;
        double q_hat = 0.0, pi_thr = 0.0;
        Index false_edges = 0, true_edges = 0, stable = 0;
    };
    std::vector<std::vector<Cell>> cells(cfg.replicates, std::vector<Cell>(L));
    parallel_for(cfg.replicates, cfg.threads, [&](Index r) {
        const std::uint64_t seed = derive_seed(cfg.seed, streams::replicate, r);
        Rng drng = make_rng(derive_seed(seed, streams::design));
        Dataset data = gen_ggm(theta, cfg.n, drng);
        if (cfg.null_permuted) {
            Rng prng = make_rng(derive_seed(seed, streams::permute));
            data = permute_null(data, PermuteMode::per_column, {}, prng);
        }
        const FrequencyMatrix freq = selection_frequencies(sel, data, grid, cfg.resamples, derive_seed(seed, streams::subsample));
        for (Index g = 0; g < L; ++g) {
            Cell& c = cells[r][g];
            c.q_hat = freq.mean_union(g, g);
            if (c.q_hat == 0.0) {
                // nothing selected anywhere: every threshold gives the empty set
                c.feasible = true;
                c.pi_thr = 0.5;
                continue;
            }
            try {
                c.pi_thr = calibrate_threshold(slots, c.q_hat, cfg.target_ev);
            } catch (const ConfigError&) {
                continue;
            }
            c.feasible = true;
            const StabilityResult res = pointwise_from(freq, g, c.pi_thr);
            c.stable = res.stable_set.count();
            for (Index e : res.stable_set.members()) (truth.contains(e) ? c.true_edges : c.false_edges) += 1;
        }
    });

    report.false_edges.assign(cfg.replicates, std::vector<long>(L, -1));
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Index g = 0; g < L; ++g) {
        GraphLambdaSummary s;
        s.lambda = grid[g];
        std::vector<double> q, pi, fe, te, size;
        for (Index r = 0; r < cfg.replicates; ++r) {
            const Cell& c = cells[r][g];
            q.push_back(c.q_hat);
            if (!c.feasible) {
                ++s.infeasible;
                continue;
            }
            ++s.feasible;
            report.false_edges[r][g] = static_cast<long>(c.false_edges);
            pi.push_back(c.pi_thr);
            fe.push_back(static_cast<double>(c.false_edges));
            te.push_back(static_cast<double>(c.true_edges));
            size.push_back(static_cast<double>(c.stable));
        }
        s.mean_q_hat = mean_of(q);
        s.mean_pi_thr = mean_of(pi);
        s.mean_false_edges = mean_of(fe);
        s.se_false_edges = se_of(fe);
        s.mean_true_edges = mean_of(te);
        s.mean_stable_size = mean_of(size);
        if (s.feasible > 0) {
            lo = std::min(lo, s.mean_stable_size);
            hi = std::max(hi, s.mean_stable_size);
        }
        report.lambdas.push_back(s);
    }
    report.stable_size_drift = hi > 0.0 ? (hi - lo) / std::max(1.0, hi) : 0.0;
    report.drift_within_tolerance = report.stable_size_drift <= cfg.drift_tolerance;
    report.worst_kkt = monitor->worst.load();
    report.fits = monitor->fits.load();
    return report;
}

}  // namespace stabsel
