// config.cpp: Run configuration parsing, presets and serialization.

#include "qhe/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace qhe {

using nlohmann::json;

namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g;
    for (int k = 0; k < points; ++k) {
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1)));
    }
    return g;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(fmt::format("config error at {}: {}", path.empty() ? "/" : path, what));
}

std::string type_name(const json& v) {
    return v.type_name();
}

// Walks one object, consuming known keys, so leftovers can be reported.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            fail(path_, "expected an object, got " + type_name(obj_));
        }
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (!v) {
            fail(at(key), "missing required field");
        }
        return *v;
    }

    std::string at(const std::string& key) const { return path_ + "/" + key; }

    void finish() const {
        for (const auto& [k, v] : obj_.items()) {
            if (!seen_.count(k)) {
                fail(at(k), "unknown field");
            }
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        fail(path, "expected a number, got " + type_name(v));
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        fail(path, "expected a finite number");
    }
    return x;
}

double positive(const json& v, const std::string& path) {
    const double x = as_number(v, path);
    if (!(x > 0)) {
        fail(path, fmt::format("must be positive, got {}", x));
    }
    return x;
}

double non_negative(const json& v, const std::string& path) {
    const double x = as_number(v, path);
    if (x < 0) {
        fail(path, fmt::format("must be non-negative, got {}", x));
    }
    return x;
}

long long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        fail(path, "expected an integer, got " + type_name(v));
    }
    return v.get<long long>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        fail(path, "expected a string, got " + type_name(v));
    }
    return v.get<std::string>();
}

std::string one_of(const json& v, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::string s = as_string(v, path);
    std::string list;
    for (const char* a : allowed) {
        if (s == a) {
            return s;
        }
        list += list.empty() ? a : std::string(", ") + a;
    }
    fail(path, fmt::format("'{}' is not one of {}", s, list));
}

std::vector<double> number_list(const json& v, const std::string& path, bool require_positive) {
    if (!v.is_array()) {
        fail(path, "expected an array, got " + type_name(v));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto p = fmt::format("{}/{}", path, i);
        out.push_back(require_positive ? positive(v[i], p) : as_number(v[i], p));
    }
    return out;
}

std::vector<int> index_list(const json& v, const std::string& path) {
    if (!v.is_array()) {
        fail(path, "expected an array, got " + type_name(v));
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(static_cast<int>(as_integer(v[i], fmt::format("{}/{}", path, i))));
    }
    return out;
}

EngineModel model_from_json(const json& j) {
    Fields f(j, "/model");
    EngineModel m;
    const json* dh = f.find("delta_e_hot");
    const json* dc = f.find("delta_e_cold");
    const json* levels = f.find("levels");
    if ((dh || dc) && levels) {
        fail("/model", "give either levels or delta_e_hot/delta_e_cold, not both");
    }
    m.t_hot = positive(f.require("t_hot"), f.at("t_hot"));
    m.t_cold = positive(f.require("t_cold"), f.at("t_cold"));
    m.gamma_hot = non_negative(f.require("gamma_hot"), f.at("gamma_hot"));
    m.gamma_cold = non_negative(f.require("gamma_cold"), f.at("gamma_cold"));
    m.epsilon = non_negative(f.require("epsilon"), f.at("epsilon"));
    if (dh || dc) {
        if (!dh || !dc) {
            fail("/model", "delta_e_hot and delta_e_cold must be given together");
        }
        const double h = positive(*dh, f.at("delta_e_hot"));
        const double c = positive(*dc, f.at("delta_e_cold"));
        if (!(h > c)) {
            fail(f.at("delta_e_hot"), "must exceed delta_e_cold");
        }
        const EngineModel base =
            EngineModel::four_level(h, c, m.t_hot, m.t_cold, m.gamma_hot, m.gamma_cold, m.epsilon);
        m.levels = base.levels;
        m.hot_manifold = base.hot_manifold;
        m.cold_manifold = base.cold_manifold;
        m.drive_pairs = base.drive_pairs;
        m.omega = base.omega;
        for (const char* k : {"hot_manifold", "cold_manifold", "drive_pairs"}) {
            if (f.find(k)) {
                fail(f.at(k), "not allowed with the delta_e shorthand");
            }
        }
        if (const json* w = f.find("omega")) {
            m.omega = positive(*w, f.at("omega"));
        }
    } else {
        m.levels = number_list(f.require("levels"), f.at("levels"), false);
        m.hot_manifold = index_list(f.require("hot_manifold"), f.at("hot_manifold"));
        m.cold_manifold = index_list(f.require("cold_manifold"), f.at("cold_manifold"));
        m.omega = positive(f.require("omega"), f.at("omega"));
        const json& pairs = f.require("drive_pairs");
        if (!pairs.is_array()) {
            fail(f.at("drive_pairs"), "expected an array, got " + type_name(pairs));
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            Fields pf(pairs[i], fmt::format("/model/drive_pairs/{}", i));
            DrivePair p;
            p.lower = static_cast<int>(as_integer(pf.require("lower"), pf.at("lower")));
            p.upper = static_cast<int>(as_integer(pf.require("upper"), pf.at("upper")));
            p.field = static_cast<int>(as_integer(pf.require("field"), pf.at("field")));
            pf.finish();
            m.drive_pairs.push_back(p);
        }
    }
    f.finish();
    try {
        m.validate();
    } catch (const ModelError& e) {
        fail("/model", e.what());
    }
    return m;
}

ScheduleConfig schedule_from_json(const json& j) {
    Fields f(j, "/schedule");
    ScheduleConfig s;
    const json& types = f.require("engine_types");
    if (!types.is_array() || types.empty()) {
        fail(f.at("engine_types"), "expected a non-empty array of engine types");
    }
    for (std::size_t i = 0; i < types.size(); ++i) {
        const auto p = fmt::format("/schedule/engine_types/{}", i);
        const std::string name = as_string(types[i], p);
        try {
            s.engine_types.push_back(engine_type_from_string(name));
        } catch (const ScheduleError& e) {
            fail(p, e.what());
        }
    }
    s.m = positive(f.require("m"), f.at("m"));
    if (const json* t = f.find("tau_cyc")) {
        s.tau_cyc = positive(*t, f.at("tau_cyc"));
    }
    const long long n = as_integer(f.require("n_cycles"), f.at("n_cycles"));
    if (n < 0) {
        fail(f.at("n_cycles"), "must be non-negative");
    }
    s.n_cycles = static_cast<std::size_t>(n);
    f.finish();
    return s;
}

ExperimentConfig experiment_from_json(const json& j) {
    Fields f(j, "/experiment");
    ExperimentConfig e;
    e.dephasing = dephasing_mode_from_string(
        one_of(f.require("dephasing"), f.at("dephasing"), {"none", "rate", "complete"}));
    if (const json* r = f.find("dephasing_rate")) {
        e.dephasing_rate = non_negative(*r, f.at("dephasing_rate"));
    }
    e.axis = one_of(f.require("axis"), f.at("axis"), {"action", "gamma"});
    e.actions = number_list(f.require("actions"), f.at("actions"), true);
    e.gammas = number_list(f.require("gammas"), f.at("gammas"), true);
    e.m_values = number_list(f.require("m_values"), f.at("m_values"), true);
    e.initial_state = one_of(f.require("initial_state"), f.at("initial_state"),
                             {"excited", "ground", "mixed", "steady"});
    const json& seed = f.require("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
        fail(f.at("seed"), "expected a non-negative integer");
    }
    e.seed = seed.get<std::uint64_t>();
    const long long perms = as_integer(f.require("permutations"), f.at("permutations"));
    if (perms < 0) {
        fail(f.at("permutations"), "must be non-negative");
    }
    e.permutations = static_cast<std::size_t>(perms);
    e.inject_fault =
        one_of(f.require("inject_fault"), f.at("inject_fault"), {"none", "trace_violation"});
    f.finish();
    return e;
}

OutputConfig output_from_json(const json& j) {
    Fields f(j, "/output");
    OutputConfig o;
    if (const json* v = f.find("format")) {
        o.format = one_of(*v, f.at("format"), {"csv", "json"});
    }
    if (const json* v = f.find("directory")) {
        o.directory = as_string(*v, f.at("directory"));
    }
    const long long jobs = as_integer(f.require("jobs"), f.at("jobs"));
    if (jobs < 1 || jobs > 1024) {
        fail(f.at("jobs"), "must be between 1 and 1024");
    }
    o.jobs = static_cast<int>(jobs);
    f.finish();
    return o;
}

}  // namespace

double RunConfig::tau() const {
    return schedule.tau_cyc ? *schedule.tau_cyc : cycle_time(model, schedule.m);
}

double RunConfig::dephasing_rate() const {
    return experiment.dephasing_rate ? *experiment.dephasing_rate
                                     : 1.0 / (100.0 * model.drive_period());
}

Dephasing RunConfig::dephasing() const {
    return {experiment.dephasing, dephasing_rate()};
}

json default_config_json() {
    json types = json::array();
    for (auto t : all_engine_types()) {
        types.push_back(to_string(t));
    }
    return {
        {"model",
         {{"delta_e_hot", 4.0},
          {"delta_e_cold", 1.0},
          {"t_hot", 5.0},
          {"t_cold", 1.0},
          {"gamma_hot", 5e-4},
          {"gamma_cold", 5e-4},
          {"epsilon", 5e-4}}},
        {"schedule", {{"engine_types", types}, {"m", 1.0}, {"n_cycles", 10}}},
        {"experiment",
         {{"dephasing", "none"},
          {"axis", "action"},
          {"actions", log_grid(1e-3, 0.3, 17)},
          {"gammas", log_grid(1e-6, 1e-1, 21)},
          {"m_values", log_grid(0.1, 10.0, 21)},
          {"initial_state", "excited"},
          {"seed", 20240601},
          {"permutations", 20},
          {"inject_fault", "none"}}},
        {"output", {{"jobs", 1}}},
    };
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig6a", "fig6b", "fig7", "fig9", "fig10"};
    return names;
}

json preset_patch(const std::string& name) {
    if (name == "fig6a" || name == "fig6b") {
        const double x = name == "fig6a" ? 1e-4 : 5e-3;
        return {{"model", {{"epsilon", x}, {"gamma_hot", x}, {"gamma_cold", x}}},
                {"schedule", {{"m", 4.0}, {"n_cycles", 10}}},
                {"experiment", {{"initial_state", "excited"}}}};
    }
    if (name == "fig7") {
        return {{"experiment", {{"axis", "action"}, {"actions", log_grid(1e-3, 3.0, 25)}}}};
    }
    if (name == "fig9") {
        return {{"experiment", {{"m_values", log_grid(0.1, 10.0, 21)}}}};
    }
    if (name == "fig10") {
        return {{"model", {{"epsilon", 2e-4}, {"gamma_hot", 2e-4}, {"gamma_cold", 2e-4}}},
                {"schedule", {{"m", 600.0}}},
                {"experiment", {{"axis", "gamma"}, {"gammas", log_grid(1e-6, 1e-1, 21)}}}};
    }
    std::string list;
    for (const auto& n : preset_names()) {
        list += (list.empty() ? "" : ", ") + n;
    }
    throw ConfigError(fmt::format("unknown preset '{}' (available: {})", name, list));
}

json parse_config_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        if (const auto p = msg.find("syntax error"); p != std::string::npos) {
            msg = msg.substr(p);
        }
        throw ConfigError(fmt::format("{}:{}:{}: {}", source, line, col, msg));
    }
}

void apply_patch(json& base, const json& patch) {
    if (!patch.is_object()) {
        throw ConfigError("config error at /: expected an object, got " + type_name(patch));
    }
    if (const auto it = patch.find("model"); it != patch.end() && it->is_object() &&
                                             base.contains("model")) {
        auto& model = base["model"];
        if (it->contains("levels")) {
            model.erase("delta_e_hot");
            model.erase("delta_e_cold");
        }
        if (it->contains("delta_e_hot") || it->contains("delta_e_cold")) {
            for (const char* k : {"levels", "hot_manifold", "cold_manifold", "drive_pairs", "omega"}) {
                model.erase(k);
            }
        }
    }
    base.merge_patch(patch);
}

RunConfig config_from_json(const json& j) {
    Fields f(j, "");
    RunConfig c;
    if (const json* p = f.find("preset")) {
        c.preset = as_string(*p, "/preset");
    }
    c.model = model_from_json(f.require("model"));
    c.schedule = schedule_from_json(f.require("schedule"));
    c.experiment = experiment_from_json(f.require("experiment"));
    c.output = output_from_json(f.require("output"));
    f.finish();
    return c;
}

json config_to_json(const RunConfig& c) {
    const auto& m = c.model;
    json pairs = json::array();
    for (const auto& p : m.drive_pairs) {
        pairs.push_back({{"lower", p.lower}, {"upper", p.upper}, {"field", p.field}});
    }
    json types = json::array();
    for (auto t : c.schedule.engine_types) {
        types.push_back(to_string(t));
    }
    json j = {
        {"preset", c.preset ? json(*c.preset) : json(nullptr)},
        {"model",
         {{"levels", m.levels},
          {"hot_manifold", m.hot_manifold},
          {"cold_manifold", m.cold_manifold},
          {"t_hot", m.t_hot},
          {"t_cold", m.t_cold},
          {"gamma_hot", m.gamma_hot},
          {"gamma_cold", m.gamma_cold},
          {"epsilon", m.epsilon},
          {"omega", m.omega},
          {"drive_pairs", pairs}}},
        {"schedule",
         {{"engine_types", types},
          {"m", c.schedule.m},
          {"tau_cyc", c.schedule.tau_cyc ? json(*c.schedule.tau_cyc) : json(nullptr)},
          {"n_cycles", c.schedule.n_cycles}}},
        {"experiment",
         {{"dephasing", to_string(c.experiment.dephasing)},
          {"dephasing_rate",
           c.experiment.dephasing_rate ? json(*c.experiment.dephasing_rate) : json(nullptr)},
          {"axis", c.experiment.axis},
          {"actions", c.experiment.actions},
          {"gammas", c.experiment.gammas},
          {"m_values", c.experiment.m_values},
          {"initial_state", c.experiment.initial_state},
          {"seed", c.experiment.seed},
          {"permutations", c.experiment.permutations},
          {"inject_fault", c.experiment.inject_fault}}},
        {"output",
         {{"format", c.output.format ? json(*c.output.format) : json(nullptr)},
          {"directory", c.output.directory ? json(*c.output.directory) : json(nullptr)},
          {"jobs", c.output.jobs}}},
    };
    return j;
}

RunConfig load_config(const std::optional<std::string>& preset,
                      const std::optional<std::string>& path) {
    json merged = default_config_json();
    if (preset) {
        apply_patch(merged, preset_patch(*preset));
        merged["preset"] = *preset;
    }
    if (path) {
        std::ifstream in(*path);
        if (!in) {
            throw ConfigError(fmt::format("cannot read config file '{}'", *path));
        }
        std::stringstream ss;
        ss << in.rdbuf();
        apply_patch(merged, parse_config_text(ss.str(), *path));
    }
    return config_from_json(merged);
}

}  // namespace qhe
