#include "probesched/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace probesched {

namespace {

using nlohmann::json;

RateModel parse_rate_model(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("rate_model must be an object");
    const std::string kind = j.value("kind", "exponential");
    if (kind == "exponential") return RateModel::exponential();
    if (kind == "uniform") return RateModel::uniform_0_2();
    if (kind == "discrete") {
        if (!j.contains("atoms") || !j["atoms"].is_array())
            throw std::invalid_argument("discrete rate_model needs an atoms array");
        std::vector<DiscreteAtom> atoms;
        for (const auto& a : j["atoms"]) {
            if (!a.is_array() || a.size() != 2)
                throw std::invalid_argument("each atom must be a [value, probability] pair");
            atoms.push_back({a[0].get<double>(), a[1].get<double>()});
        }
        return RateModel::discrete(std::move(atoms));
    }
    throw std::invalid_argument("unknown rate_model kind: " + kind);
}

KappaMode kappa_mode_from_name(const std::string& name) {
    if (name == "bootstrap") return KappaMode::bootstrap;
    if (name == "theorem4") return KappaMode::theorem4;
    if (name == "fixed") return KappaMode::fixed;
    throw std::invalid_argument("unknown kappa_mode: " + name);
}

SweepVariable sweep_variable_from_name(const std::string& name) {
    if (name == "users" || name == "K") return SweepVariable::users;
    if (name == "beta") return SweepVariable::beta;
    if (name == "n_slots") return SweepVariable::n_slots;
    throw std::invalid_argument("unknown sweep variable: " + name);
}

}  // namespace

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::jps_dynamic: return "jps_dynamic";
        case PolicyKind::jps_static: return "jps_static";
        case PolicyKind::jlps: return "jlps";
        case PolicyKind::round_robin: return "round_robin";
        case PolicyKind::genie_pf: return "genie_pf";
        case PolicyKind::probe_all_pf: return "probe_all_pf";
    }
    throw std::logic_error("unreachable policy kind");
}

PolicyKind policy_from_name(const std::string& name) {
    if (name == "jps_dynamic") return PolicyKind::jps_dynamic;
    if (name == "jps_static") return PolicyKind::jps_static;
    if (name == "jlps") return PolicyKind::jlps;
    if (name == "round_robin") return PolicyKind::round_robin;
    if (name == "genie_pf") return PolicyKind::genie_pf;
    if (name == "probe_all_pf") return PolicyKind::probe_all_pf;
    throw std::invalid_argument("unknown policy: " + name);
}

ToolConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config root must be an object");

    ToolConfig cfg{
        .experiment =
            ExperimentConfig{.pop = UserPopulation({1.0}, RateModel::exponential())}};
    ExperimentConfig& exp = cfg.experiment;

    const RateModel model =
        doc.contains("rate_model") ? parse_rate_model(doc["rate_model"]) : RateModel::exponential();

    const auto users = doc.value("users", std::size_t{20});
    std::vector<double> explicit_rates;
    if (doc.contains("mean_rates")) {
        explicit_rates = doc["mean_rates"].get<std::vector<double>>();
        cfg.mean_rate_rule = MeanRateRule::explicit_list;
    } else {
        const std::string rule = doc.value("mean_rate_rule", "index");
        if (rule == "index") cfg.mean_rate_rule = MeanRateRule::index;
        else if (rule == "equal") cfg.mean_rate_rule = MeanRateRule::equal;
        else throw std::invalid_argument("unknown mean_rate_rule: " + rule);
    }
    exp.pop = make_population(users, cfg.mean_rate_rule, explicit_rates, model);

    exp.beta = doc.value("beta", 0.1);
    exp.n_slots = doc.value("n_slots", std::int64_t{10000});
    exp.n_replications = doc.value("n_replications", std::size_t{1});
    exp.seed = doc.value("seed", std::uint64_t{1});
    exp.burn_in_fraction = doc.value("burn_in_fraction", 0.1);
    exp.record_interval = doc.value("record_interval", std::int64_t{0});

    PolicySpec base_spec;
    if (doc.contains("static")) {
        const json& st = doc["static"];
        base_spec.kappa_mode = kappa_mode_from_name(st.value("kappa_mode", "bootstrap"));
        base_spec.kappa = st.value("kappa", 1.0);
        base_spec.burn_in_slots = st.value("burn_in_slots", std::int64_t{2000});
        base_spec.mc_samples = st.value("mc_samples", std::size_t{400000});
    }

    std::vector<std::string> names;
    if (doc.contains("policies")) {
        names = doc["policies"].get<std::vector<std::string>>();
        if (names.empty()) throw std::invalid_argument("policies must not be empty");
    } else {
        names.push_back(doc.value("policy", "jps_dynamic"));
    }
    for (const auto& name : names) {
        PolicySpec spec = base_spec;
        spec.kind = policy_from_name(name);
        cfg.policies.push_back(std::move(spec));
    }
    exp.policy = cfg.policies.front();

    cfg.mc_samples = doc.value("mc_samples", std::size_t{1000000});
    cfg.threads = doc.value("threads", 1u);

    if (doc.contains("sweep")) {
        const json& sw = doc["sweep"];
        cfg.has_sweep = true;
        cfg.sweep_variable = sweep_variable_from_name(sw.value("variable", "users"));
        if (!sw.contains("values") || !sw["values"].is_array() || sw["values"].empty())
            throw std::invalid_argument("sweep needs a nonempty values array");
        cfg.sweep_values = sw["values"].get<std::vector<double>>();
    }

    exp.validate();
    return cfg;
}

ToolConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_hash(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    const std::string canonical = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace probesched
