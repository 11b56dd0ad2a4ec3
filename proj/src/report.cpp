#include "json_fields.hpp"
#include "stabsel/harness.hpp"

#include <cmath>
#include <sstream>

namespace stabsel {

using detail::Json;

namespace {

// JSON has no infinity; keep reports parseable
Json num(double x) {
    if (std::isinf(x)) return x > 0 ? Json("inf") : Json("-inf");
    if (std::isnan(x)) return Json(nullptr);
    return Json(x);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::ostringstream tsv_stream() {
    std::ostringstream out;
    out.precision(10);
    return out;
}

}  // namespace

std::string to_json(const ExperimentReport& r) {
    Json reps = Json::array();
    for (const auto& rec : r.replicates) {
        Json outcomes = Json::array();
        for (const auto& o : rec.outcomes) {
            Json jo{{"method", to_string(o.method)}, {"success", o.success}};
            if (is_stability(o.method)) {
                jo["q_hat"] = o.q_hat;
                jo["lambda_min"] = o.lambda_min;
                jo["lambda_min_index"] = o.lambda_min_index;
                jo["false_selected"] = o.false_selected;
                jo["true_selected"] = o.true_selected;
            }
            outcomes.push_back(std::move(jo));
        }
        reps.push_back(Json{{"replicate", rec.replicate},
                            {"seed", rec.seed},
                            {"support", rec.support},
                            {"sigma", num(rec.sigma)},
                            {"realized_snr", num(rec.realized_snr)},
                            {"irc_value", rec.irc_value},
                            {"irc_violations", rec.irc_violations},
                            {"max_cor", rec.max_cor},
                            {"outcomes", outcomes}});
    }
    Json methods = Json::array();
    for (const auto& m : r.methods) {
        Json jm{{"method", to_string(m.method)}, {"gammas", r.config.gammas}, {"success", m.success},
                {"success_se", m.success_se}};
        if (is_stability(m.method)) {
            jm["mean_q_hat"] = m.mean_q_hat;
            Json th = Json::array();
            for (const auto& t : m.thresholds)
                th.push_back(Json{{"pi_thr", t.pi_thr},
                                  {"mean_v", t.mean_v},
                                  {"se_v", t.se_v},
                                  {"bound_configured", t.bound_configured},
                                  {"bound_realized", t.bound_realized},
                                  {"mean_tp_proportion", t.mean_tp_proportion}});
            jm["thresholds"] = th;
        }
        methods.push_back(std::move(jm));
    }
    return dump(Json{{"kind", r.kind},
                     {"config", detail::config_json(r.config)},
                     {"n", r.n},
                     {"p", r.p},
                     {"q", r.q},
                     {"median_irc_violations", r.median_irc_violations},
                     {"mean_max_cor", r.mean_max_cor},
                     {"methods", methods},
                     {"replicates", reps}});
}

std::string to_json(const SeparationReport& r) {
    Json curves = Json::array();
    for (const auto& c : r.curves)
        curves.push_back(Json{{"alpha", c.alpha},
                              {"median_tail_min_relevant", c.median_tail_min_relevant},
                              {"median_max_irrelevant", c.median_max_irrelevant},
                              {"separated", c.separated},
                              {"tail_min_relevant", c.tail_min_relevant},
                              {"max_irrelevant", c.max_irrelevant},
                              {"mean_pi1", c.mean_pi1},
                              {"mean_pi2", c.mean_pi2},
                              {"mean_pi3", c.mean_pi3},
                              {"mean_pi_rest", c.mean_pi_rest}});
    return dump(Json{{"kind", "separation"},
                     {"config", detail::config_json(r.config)},
                     {"irc_population", r.irc_population},
                     {"tail_first", r.tail_first},
                     {"curves", curves}});
}

std::string to_json(const GraphReport& r) {
    Json lambdas = Json::array();
    for (const auto& s : r.lambdas)
        lambdas.push_back(Json{{"lambda", s.lambda},
                               {"feasible", s.feasible},
                               {"infeasible", s.infeasible},
                               {"mean_q_hat", s.mean_q_hat},
                               {"mean_pi_thr", s.mean_pi_thr},
                               {"mean_false_edges", s.mean_false_edges},
                               {"se_false_edges", s.se_false_edges},
                               {"mean_true_edges", s.mean_true_edges},
                               {"mean_stable_size", s.mean_stable_size}});
    return dump(Json{{"kind", "graph"},
                     {"config", detail::config_json(r.config)},
                     {"edge_slots", r.config.edge_slots()},
                     {"true_edges", r.true_edges},
                     {"worst_kkt", r.worst_kkt},
                     {"fits", r.fits},
                     {"stable_size_drift", r.stable_size_drift},
                     {"drift_within_tolerance", r.drift_within_tolerance},
                     {"lambdas", lambdas},
                     {"false_edges", r.false_edges}});
}

std::string summary_tsv(const ExperimentReport& r) {
    auto out = tsv_stream();
    out << "method\tgamma\tsuccess\tsuccess_se\tpi_thr\tmean_v\tse_v\tbound\tbound_realized\tmean_tp\tmean_q_hat\n";
    for (const auto& m : r.methods) {
        for (std::size_t g = 0; g < m.success.size(); ++g) {
            auto row = [&](const ThresholdSummary* t) {
                out << to_string(m.method) << '\t' << r.config.gammas[g] << '\t' << m.success[g] << '\t'
                    << m.success_se[g] << '\t';
                if (t)
                    out << t->pi_thr << '\t' << t->mean_v << '\t' << t->se_v << '\t' << t->bound_configured << '\t'
                        << t->bound_realized << '\t' << t->mean_tp_proportion << '\t' << m.mean_q_hat;
                else
                    out << "NA\tNA\tNA\tNA\tNA\tNA\tNA";
                out << '\n';
            };
            if (m.thresholds.empty()) {
                row(nullptr);
            } else {
                for (const auto& t : m.thresholds) row(&t);
            }
        }
    }
    return out.str();
}

std::string replicate_tsv(const ExperimentReport& r) {
    auto out = tsv_stream();
    out << "replicate\tseed\tirc_value\tirc_violations\tmax_cor\tmethod\tgamma\tsuccess\n";
    for (const auto& rec : r.replicates)
        for (const auto& o : rec.outcomes)
            for (std::size_t g = 0; g < o.success.size(); ++g)
                out << rec.replicate << '\t' << rec.seed << '\t' << rec.irc_value << '\t' << rec.irc_violations << '\t'
                    << rec.max_cor << '\t' << to_string(o.method) << '\t' << r.config.gammas[g] << '\t'
                    << (o.success[g] ? 1 : 0) << '\n';
    return out.str();
}

std::string curves_tsv(const SeparationReport& r) {
    auto out = tsv_stream();
    out << "alpha\tgrid_index\tpi1\tpi2\tpi3\tpi_rest_max\n";
    for (const auto& c : r.curves)
        for (std::size_t g = 0; g < c.mean_pi1.size(); ++g)
            out << c.alpha << '\t' << g << '\t' << c.mean_pi1[g] << '\t' << c.mean_pi2[g] << '\t' << c.mean_pi3[g]
                << '\t' << c.mean_pi_rest[g] << '\n';
    return out.str();
}

std::string graph_tsv(const GraphReport& r) {
    auto out = tsv_stream();
    out << "lambda\tfeasible\tinfeasible\tmean_q_hat\tmean_pi_thr\tmean_false_edges\tse_false_edges\tmean_true_edges"
           "\tmean_stable_size\n";
    for (const auto& s : r.lambdas)
        out << s.lambda << '\t' << s.feasible << '\t' << s.infeasible << '\t' << s.mean_q_hat << '\t' << s.mean_pi_thr
            << '\t' << s.mean_false_edges << '\t' << s.se_false_edges << '\t' << s.mean_true_edges << '\t'
            << s.mean_stable_size << '\n';
    return out.str();
}

}  // namespace stabsel
