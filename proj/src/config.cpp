#include "stabsel/config.hpp"

#include "json_fields.hpp"
#include "stabsel/errors.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace stabsel {

std::string to_string(QPolicy policy) { return policy == QPolicy::average ? "average" : "per_resample_cap"; }

QPolicy q_policy_from_string(const std::string& name) {
    if (name == "average") return QPolicy::average;
    if (name == "per_resample_cap") return QPolicy::per_resample_cap;
    throw ConfigError("unknown q policy '" + name + "' (expected average or per_resample_cap)");
}

std::string to_string(BetaDist dist) { return dist == BetaDist::uniform01 ? "uniform01" : "std_normal"; }

BetaDist beta_dist_from_string(const std::string& name) {
    if (name == "uniform01") return BetaDist::uniform01;
    if (name == "std_normal") return BetaDist::std_normal;
    throw ConfigError("unknown beta distribution '" + name + "' (expected uniform01 or std_normal)");
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    if (selector != "lasso" && selector != "randomised_lasso" && selector != "omp" && selector != "romp")
        throw ConfigError("unknown selector '" + selector + "' (expected lasso, randomised_lasso, omp or romp)");
    if (alpha && !(*alpha > 0.0 && *alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    if (!(p_w > 0.0 && p_w < 1.0)) throw ConfigError("p_w must lie in (0, 1)");
    if (resamples < 1) throw ConfigError("resamples must be at least 1");
    if (grid.size < 1 || !(grid.ratio > 0.0 && grid.ratio < 1.0)) throw ConfigError("grid needs size >= 1 and ratio in (0, 1)");
    const int given = static_cast<int>(pi_thr.has_value()) + static_cast<int>(q.has_value()) +
                      static_cast<int>(target_ev.has_value());
    if (given > 2) throw ConfigError("give at most two of q, pi_thr and target_ev");
}

double RunConfig::resolved_alpha() const {
    if (alpha) return *alpha;
    return selector == "romp" ? kDefaultOmpWeakness : kDefaultLassoWeakness;
}

ControlSpec RunConfig::control(Index p) const {
    ControlSpec spec;
    spec.p = p;
    spec.pi_thr = pi_thr;
    spec.q = q;
    spec.target_ev = target_ev;
    // fill in defaults until two of the three are fixed
    if (!spec.pi_thr && !(spec.q && spec.target_ev)) spec.pi_thr = 0.9;
    if (!spec.q && !spec.target_ev) spec.target_ev = 1.0;
    return spec.resolved();
}

// ---------------------------------------------------------------------------

namespace {

using detail::Json;

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Fields {
public:
    Fields(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    }

    const Json* find(const char* key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        used_.insert(key);
        return &*it;
    }

    bool number(const char* key, double& out) {
        const Json* v = find(key);
        if (!v) return false;
        if (v->is_string() && (*v == "inf" || *v == "infinity")) {
            out = std::numeric_limits<double>::infinity();
        } else if (v->is_number()) {
            out = v->get<double>();
        } else {
            throw ConfigError(path(key) + ": expected a number");
        }
        return true;
    }

    bool number(const char* key, std::optional<double>& out) {
        const Json* v = find(key);
        if (!v) return false;
        if (v->is_null()) {
            out.reset();
            return true;
        }
        double x = 0;
        used_.erase(key);
        number(key, x);
        out = x;
        return true;
    }

    bool count(const char* key, Index& out) {
        const Json* v = find(key);
        if (!v) return false;
        if (v->is_number_unsigned()) {
            out = v->get<Index>();
        } else if (v->is_number_integer() && v->get<long long>() >= 0) {
            out = static_cast<Index>(v->get<long long>());
        } else {
            throw ConfigError(path(key) + ": expected a non-negative integer");
        }
        return true;
    }

    bool seed(const char* key, std::uint64_t& out) {
        Index x = 0;
        if (!count(key, x)) return false;
        out = static_cast<std::uint64_t>(x);
        return true;
    }

    bool flag(const char* key, bool& out) {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
        out = v->get<bool>();
        return true;
    }

    bool text(const char* key, std::string& out) {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
        out = v->get<std::string>();
        return true;
    }

    bool numbers(const char* key, std::vector<double>& out) {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
        out.clear();
        for (const auto& e : *v) {
            if (!e.is_number()) throw ConfigError(path(key) + ": expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return true;
    }

    bool texts(const char* key, std::vector<std::string>& out) {
        const Json* v = find(key);
        if (!v) return false;
        if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of strings");
        out.clear();
        for (const auto& e : *v) {
            if (!e.is_string()) throw ConfigError(path(key) + ": expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return true;
    }

    bool grid(const char* key, GridSpec& out) {
        const Json* v = find(key);
        if (!v) return false;
        Fields sub(*v, path(key));
        sub.count("size", out.size);
        sub.number("ratio", out.ratio);
        sub.finish();
        return true;
    }

    void schema() {
        const Json* v = find("schema_version");
        if (!v) throw ConfigError(where_ + ": missing schema_version");
        if (!v->is_number_integer() || v->get<long long>() != kSchemaVersion)
            throw ConfigError(where_ + ": unsupported schema_version " + v->dump() + " (expected " +
                              std::to_string(kSchemaVersion) + ")");
    }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!used_.count(item.key())) throw ConfigError(path(item.key().c_str()) + ": unknown key");
    }

private:
    std::string path(const char* key) const { return where_ + "." + key; }

    const Json& obj_;
    std::string where_;
    std::set<std::string> used_;
};

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

Json number_json(double x) {
    if (std::isinf(x)) return x > 0 ? Json("inf") : Json("-inf");
    return Json(x);
}

Json opt_json(const std::optional<double>& x) { return x ? number_json(*x) : Json(nullptr); }

Json grid_json(const GridSpec& g) { return Json{{"size", g.size}, {"ratio", g.ratio}}; }

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
    const Json j = parse(text);
    Fields f(j, "config");
    f.schema();
    RunConfig c;
    f.text("selector", c.selector);
    f.number("alpha", c.alpha);
    f.number("p_w", c.p_w);
    std::string policy;
    if (f.text("q_policy", policy)) c.q_policy = q_policy_from_string(policy);
    f.count("resamples", c.resamples);
    f.number("pi_thr", c.pi_thr);
    f.number("target_ev", c.target_ev);
    f.number("q", c.q);
    f.grid("grid", c.grid);
    f.flag("full_path", c.full_path);
    f.flag("normalize", c.normalize);
    f.seed("seed", c.seed);
    f.count("threads", c.threads);
    f.text("input", c.input);
    f.text("output_dir", c.output_dir);
    f.flag("has_header", c.has_header);
    f.text("response_column", c.response_column);
    f.finish();
    c.validate();
    return c;
}

ExperimentConfig experiment_config_from_json(const std::string& text, ExperimentConfig c) {
    const Json j = parse(text);
    Fields f(j, "config");
    f.schema();
    f.text("preset", c.preset);
    f.count("s", c.s);
    f.number("snr", c.snr);
    std::string dist;
    if (f.text("beta_dist", dist)) c.beta_dist = beta_dist_from_string(dist);
    std::vector<std::string> methods;
    if (f.texts("methods", methods)) {
        c.methods.clear();
        for (const auto& m : methods) c.methods.push_back(method_from_string(m));
    }
    f.numbers("gammas", c.gammas);
    f.count("replicates", c.replicates);
    f.count("resamples", c.resamples);
    f.numbers("pi_thrs", c.pi_thrs);
    f.number("q", c.q);
    std::string policy;
    if (f.text("q_policy", policy)) c.q_policy = q_policy_from_string(policy);
    f.number("lasso_alpha", c.lasso_alpha);
    f.number("omp_alpha", c.omp_alpha);
    f.number("p_w", c.p_w);
    f.grid("grid", c.grid);
    f.seed("seed", c.seed);
    f.count("threads", c.threads);
    f.finish();
    c.validate();
    return c;
}

SeparationConfig separation_config_from_json(const std::string& text) {
    const Json j = parse(text);
    Fields f(j, "config");
    f.schema();
    SeparationConfig c;
    f.number("rho", c.rho);
    f.count("n", c.n);
    f.count("p", c.p);
    f.number("noise_sd", c.noise_sd);
    f.numbers("alphas", c.alphas);
    f.number("p_w", c.p_w);
    f.count("resamples", c.resamples);
    f.count("replicates", c.replicates);
    f.grid("grid", c.grid);
    f.number("tail_fraction", c.tail_fraction);
    f.number("relevant_min", c.relevant_min);
    f.number("irrelevant_max", c.irrelevant_max);
    f.seed("seed", c.seed);
    f.count("threads", c.threads);
    f.finish();
    c.validate();
    return c;
}

GraphConfig graph_config_from_json(const std::string& text) {
    const Json j = parse(text);
    Fields f(j, "config");
    f.schema();
    GraphConfig c;
    f.count("d", c.d);
    f.count("n", c.n);
    f.count("band", c.band);
    f.number("band_value", c.band_value);
    f.flag("null_permuted", c.null_permuted);
    f.numbers("lambdas", c.lambdas);
    f.number("target_ev", c.target_ev);
    f.count("resamples", c.resamples);
    f.count("replicates", c.replicates);
    f.number("drift_tolerance", c.drift_tolerance);
    f.seed("seed", c.seed);
    f.count("threads", c.threads);
    f.finish();
    c.validate();
    return c;
}

// Echoed configs leave out the thread count: it must not change any output.
namespace detail {

Json config_json(const ExperimentConfig& c) {
    Json methods = Json::array();
    for (Method m : c.methods) methods.push_back(to_string(m));
    return Json{{"schema_version", kSchemaVersion},
                {"preset", c.preset},
                {"s", c.s},
                {"snr", number_json(c.snr)},
                {"beta_dist", to_string(c.beta_dist)},
                {"methods", methods},
                {"gammas", c.gammas},
                {"replicates", c.replicates},
                {"resamples", c.resamples},
                {"pi_thrs", c.pi_thrs},
                {"q", opt_json(c.q)},
                {"q_policy", to_string(c.q_policy)},
                {"lasso_alpha", c.lasso_alpha},
                {"omp_alpha", c.omp_alpha},
                {"p_w", c.p_w},
                {"grid", grid_json(c.grid)},
                {"seed", c.seed}};
}

Json config_json(const SeparationConfig& c) {
    return Json{{"schema_version", kSchemaVersion},
                {"rho", c.rho},
                {"n", c.n},
                {"p", c.p},
                {"noise_sd", c.noise_sd},
                {"alphas", c.alphas},
                {"p_w", c.p_w},
                {"resamples", c.resamples},
                {"replicates", c.replicates},
                {"grid", grid_json(c.grid)},
                {"tail_fraction", c.tail_fraction},
                {"relevant_min", c.relevant_min},
                {"irrelevant_max", c.irrelevant_max},
                {"seed", c.seed}};
}

Json config_json(const GraphConfig& c) {
    return Json{{"schema_version", kSchemaVersion},
                {"d", c.d},
                {"n", c.n},
                {"band", c.band},
                {"band_value", c.band_value},
                {"null_permuted", c.null_permuted},
                {"lambdas", c.lambdas},
                {"target_ev", c.target_ev},
                {"resamples", c.resamples},
                {"replicates", c.replicates},
                {"drift_tolerance", c.drift_tolerance},
                {"seed", c.seed}};
}

Json config_json(const RunConfig& c) {
    return Json{{"schema_version", kSchemaVersion},
                {"selector", c.selector},
                {"alpha", c.resolved_alpha()},
                {"p_w", c.p_w},
                {"q_policy", to_string(c.q_policy)},
                {"resamples", c.resamples},
                {"pi_thr", opt_json(c.pi_thr)},
                {"target_ev", opt_json(c.target_ev)},
                {"q", opt_json(c.q)},
                {"grid", grid_json(c.grid)},
                {"full_path", c.full_path},
                {"normalize", c.normalize},
                {"seed", c.seed},
                {"input", c.input},
                {"output_dir", c.output_dir},
                {"has_header", c.has_header},
                {"response_column", c.response_column}};
}

}  // namespace detail

std::string to_json(const ExperimentConfig& config) { return detail::config_json(config).dump(2) + "\n"; }
std::string to_json(const RunConfig& config) { return detail::config_json(config).dump(2) + "\n"; }
std::string to_json(const SeparationConfig& config) { return detail::config_json(config).dump(2) + "\n"; }
std::string to_json(const GraphConfig& config) { return detail::config_json(config).dump(2) + "\n"; }

}  // namespace stabsel
