#include "pincor/config.hpp"

#include <cmath>
#include <set>

namespace pincor {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!j.is_object()) throw usage_error("config block '" + where + "' must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw usage_error("unknown config key '" + where + "." + key + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::resolve(const nlohmann::json& user) {
    check_keys(user, {"law", "spec", "params", "run", "check"}, "(top)");

    nlohmann::json doc;
    const nlohmann::json law = user.value("law", nlohmann::json::object());
    check_keys(law, {"alpha", "slow_var", "n_max"}, "law");
    doc["law"]["alpha"] = law.value("alpha", 0.5);
    doc["law"]["n_max"] = law.value("n_max", std::int64_t{1} << 17);
    const nlohmann::json sv = law.value("slow_var", nlohmann::json::object());
    check_keys(sv, {"kind", "gamma"}, "law.slow_var");
    doc["law"]["slow_var"]["kind"] = sv.value("kind", "constant");
    doc["law"]["slow_var"]["gamma"] = sv.value("gamma", 0.0);

    const nlohmann::json spec = user.value("spec", nlohmann::json::object());
    check_keys(spec, {"family", "a", "m"}, "spec");
    doc["spec"]["family"] = spec.value("family", "iid");
    doc["spec"]["a"] = spec.value("a", 2.0);
    doc["spec"]["m"] = spec.value("m", std::int64_t{12});

    const nlohmann::json params = user.value("params", nlohmann::json::object());
    check_keys(params, {"beta", "h", "h_grid"}, "params");
    doc["params"]["beta"] = params.value("beta", 0.0);
    doc["params"]["h"] = params.value("h", 0.0);
    if (params.contains("h_grid")) doc["params"]["h_grid"] = params["h_grid"];

    const nlohmann::json run = user.value("run", nlohmann::json::object());
    check_keys(run, {"N", "replicas", "seed", "budget", "burn", "threads", "trace"}, "run");
    doc["run"]["N"] = run.value("N", std::int64_t{2048});
    doc["run"]["replicas"] = run.value("replicas", 16);
    doc["run"]["seed"] = run.value("seed", std::uint64_t{1});
    doc["run"]["budget"] = run.value("budget", std::int64_t{20000});
    doc["run"]["burn"] = run.value("burn", std::int64_t{0});
    doc["run"]["threads"] = run.value("threads", 0);
    doc["run"]["trace"] = run.value("trace", false);

    const nlohmann::json check = user.value("check", nlohmann::json::object());
    check_keys(check, {"suite", "l_list", "h_list", "u_grid", "lambda_grid", "n_list", "tolerance"},
               "check");
    doc["check"] = check;
    if (!doc["check"].contains("suite")) doc["check"]["suite"] = "entropy";

    ExperimentConfig cfg;
    cfg.doc = std::move(doc);
    // eager validation of the numeric blocks
    cfg.params().validate();
    if (cfg.doc["law"]["alpha"].get<double>() < 0.0) throw usage_error("law.alpha must be >= 0");
    return cfg;
}

LawPtr ExperimentConfig::law() const {
    const auto& l = doc["law"];
    SlowVar sv;
    const std::string kind = l["slow_var"]["kind"].get<std::string>();
    if (kind == "constant")
        sv = SlowVar::constant();
    else if (kind == "log_power")
        sv = SlowVar::log_power(l["slow_var"]["gamma"].get<double>());
    else
        throw usage_error("law.slow_var.kind must be 'constant' or 'log_power'");
    return build_law(l["alpha"].get<double>(), sv, l["n_max"].get<std::int64_t>());
}

CorrelationSpec ExperimentConfig::spec() const {
    const auto& s = doc["spec"];
    const std::string fam = s["family"].get<std::string>();
    if (fam == "iid") return CorrelationSpec::iid();
    if (fam == "shifted_power") return CorrelationSpec::shifted_power(s["a"].get<double>());
    if (fam == "truncated_power")
        return CorrelationSpec::truncated_power(s["a"].get<double>(), s["m"].get<std::int64_t>());
    throw usage_error("spec.family must be iid, shifted_power or truncated_power");
}

ModelParams ExperimentConfig::params() const {
    ModelParams p;
    p.beta = doc["params"]["beta"].get<double>();
    p.h = doc["params"]["h"].get<double>();
    return p;
}

std::vector<double> ExperimentConfig::h_grid() const {
    if (!has_h_grid()) throw usage_error("config has no params.h_grid");
    const auto& g = doc["params"]["h_grid"];
    if (!g.is_array() || g.size() != 3) throw usage_error("params.h_grid must be [lo, hi, step]");
    const double lo = g[0].get<double>(), hi = g[1].get<double>(), step = g[2].get<double>();
    if (!(step > 0.0) || hi < lo) throw usage_error("malformed h_grid: need lo <= hi, step > 0");
    std::vector<double> out;
    for (double h = lo; h <= hi + 0.5 * step; h += step) out.push_back(h);
    return out;
}

std::vector<double> parse_grid_spec(const std::string& text) {
    const auto p1 = text.find(':');
    const auto p2 = text.find(':', p1 == std::string::npos ? p1 : p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos)
        throw usage_error("malformed grid '" + text + "': expected lo:hi:step");
    try {
        std::size_t used = 0;
        const std::string s_lo = text.substr(0, p1);
        const std::string s_hi = text.substr(p1 + 1, p2 - p1 - 1);
        const std::string s_st = text.substr(p2 + 1);
        const double lo = std::stod(s_lo, &used);
        if (used != s_lo.size()) throw usage_error("malformed grid '" + text + "'");
        const double hi = std::stod(s_hi, &used);
        if (used != s_hi.size()) throw usage_error("malformed grid '" + text + "'");
        const double step = std::stod(s_st, &used);
        if (used != s_st.size()) throw usage_error("malformed grid '" + text + "'");
        if (!(step > 0.0) || hi < lo)
            throw usage_error("malformed grid '" + text + "': need lo <= hi, step > 0");
        return {lo, hi, step};
    } catch (const std::invalid_argument&) {
        throw usage_error("malformed grid '" + text + "': expected lo:hi:step");
    } catch (const std::out_of_range&) {
        throw usage_error("malformed grid '" + text + "': value out of range");
    }
}

}  // namespace pincor
