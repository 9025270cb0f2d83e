#include "carl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace carl {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "nu",          "gamma",        "kappa",       "rho",         "a2",
        "delta20",     "delta21",      "n_atoms",     "theta_span",  "p_mean",
        "p_sigma",     "a1_0",         "seed",        "theta_loading", "dtau",
        "tau_end",     "record_stride", "snapshot_times", "motion",   "out_dir",
        "predict_at",  "n_max",        "delta21_min", "delta21_max", "points",
        "seed_policy"};
    return keys;
}

double get_number(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
    return v.get<double>();
}

template <class Int>
Int get_unsigned(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
    return v.get<Int>();
}

std::string get_string(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
    return v.get<std::string>();
}

void line_column(const std::string& text, std::size_t byte, std::size_t& line,
                 std::size_t& col) {
    line = 1;
    col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

} // namespace

std::string to_string(MotionMode m) { return m == MotionMode::Full ? "full" : "motionless"; }
std::string to_string(SeedPolicy p) { return p == SeedPolicy::Shared ? "shared" : "per_point"; }
std::string to_string(ThetaLoading l) { return l == ThetaLoading::Lattice ? "lattice" : "random"; }

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& item : j.items())
        if (!known_keys().contains(item.key()))
            throw ConfigError("unknown config key '" + item.key() + "'");

    RunConfig c;
    auto num = [&](const char* key, double& dst) {
        if (j.contains(key)) dst = get_number(j, key);
    };
    num("nu", c.params.nu);
    num("gamma", c.params.gamma);
    num("kappa", c.params.kappa);
    num("rho", c.params.rho);
    num("a2", c.params.a2);
    num("delta20", c.params.delta20);
    num("delta21", c.params.delta21);
    if (j.contains("n_atoms")) c.params.n_atoms = get_unsigned<std::size_t>(j, "n_atoms");

    num("theta_span", c.initial.theta_span);
    num("p_mean", c.initial.p_mean);
    num("p_sigma", c.initial.p_sigma);
    if (j.contains("a1_0")) {
        const auto& a = j.at("a1_0");
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
            throw ConfigError("config key 'a1_0' must be [re, im]");
        c.initial.a1_0 = {a[0].get<double>(), a[1].get<double>()};
    }
    if (j.contains("seed")) c.initial.seed = get_unsigned<std::uint64_t>(j, "seed");
    if (j.contains("theta_loading")) {
        const auto v = get_string(j, "theta_loading");
        if (v == "lattice") c.initial.loading = ThetaLoading::Lattice;
        else if (v == "random") c.initial.loading = ThetaLoading::Random;
        else throw ConfigError("theta_loading must be \"lattice\" or \"random\"");
    }

    num("dtau", c.schedule.dtau);
    num("tau_end", c.schedule.tau_end);
    if (j.contains("record_stride"))
        c.schedule.record_stride = get_unsigned<std::size_t>(j, "record_stride");
    if (j.contains("snapshot_times")) {
        const auto& a = j.at("snapshot_times");
        if (!a.is_array()) throw ConfigError("snapshot_times must be an array of numbers");
        c.schedule.snapshot_times.clear();
        for (const auto& t : a) {
            if (!t.is_number()) throw ConfigError("snapshot_times must be an array of numbers");
            c.schedule.snapshot_times.push_back(t.get<double>());
        }
    }
    if (j.contains("motion")) {
        const auto v = get_string(j, "motion");
        if (v == "full") c.motion = MotionMode::Full;
        else if (v == "motionless") c.motion = MotionMode::Motionless;
        else throw ConfigError("motion must be \"full\" or \"motionless\"");
    }
    if (j.contains("out_dir")) c.out_dir = get_string(j, "out_dir");
    if (j.contains("predict_at")) {
        if (j.at("predict_at").is_null()) c.predict_at.reset();
        else c.predict_at = get_number(j, "predict_at");
    }
    if (j.contains("n_max")) c.n_max = static_cast<int>(get_unsigned<unsigned>(j, "n_max"));

    num("delta21_min", c.sweep.delta21_min);
    num("delta21_max", c.sweep.delta21_max);
    if (j.contains("points")) c.sweep.points = get_unsigned<std::size_t>(j, "points");
    if (j.contains("seed_policy")) {
        const auto v = get_string(j, "seed_policy");
        if (v == "shared") c.sweep.seed_policy = SeedPolicy::Shared;
        else if (v == "per_point") c.sweep.seed_policy = SeedPolicy::PerPoint;
        else throw ConfigError("seed_policy must be \"shared\" or \"per_point\"");
    }
    return c;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["nu"] = c.params.nu;
    j["gamma"] = c.params.gamma;
    j["kappa"] = c.params.kappa;
    j["rho"] = c.params.rho;
    j["a2"] = c.params.a2;
    j["delta20"] = c.params.delta20;
    j["delta21"] = c.params.delta21;
    j["n_atoms"] = c.params.n_atoms;
    j["theta_span"] = c.initial.theta_span;
    j["p_mean"] = c.initial.p_mean;
    j["p_sigma"] = c.initial.p_sigma;
    j["a1_0"] = {c.initial.a1_0.real(), c.initial.a1_0.imag()};
    j["seed"] = c.initial.seed;
    j["theta_loading"] = to_string(c.initial.loading);
    j["dtau"] = c.schedule.dtau;
    j["tau_end"] = c.schedule.tau_end;
    j["record_stride"] = c.schedule.record_stride;
    j["snapshot_times"] = c.schedule.snapshot_times;
    j["motion"] = to_string(c.motion);
    j["out_dir"] = c.out_dir;
    j["predict_at"] = c.predict_at ? json(*c.predict_at) : json(nullptr);
    j["n_max"] = c.n_max;
    j["delta21_min"] = c.sweep.delta21_min;
    j["delta21_max"] = c.sweep.delta21_max;
    j["points"] = c.sweep.points;
    j["seed_policy"] = to_string(c.sweep.seed_policy);
    return j;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 0, col = 0;
        line_column(text, e.byte == 0 ? 0 : e.byte - 1, line, col);
        std::ostringstream msg;
        msg << "malformed JSON at line " << line << ", column " << col;
        throw ConfigError(msg.str(), line, col);
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::vector<std::string> validate_config(const RunConfig& c) {
    auto errs = validate_params(c.params).errors;
    for (auto& e : validate_initial(c.initial)) errs.push_back(std::move(e));
    for (auto& e : validate_schedule(c.schedule)) errs.push_back(std::move(e));
    if (!(c.sweep.delta21_min < c.sweep.delta21_max))
        errs.emplace_back("delta21_min must be below delta21_max");
    if (c.sweep.points < 2) errs.emplace_back("points must be at least 2");
    if (c.n_max < 0) errs.emplace_back("n_max must be non-negative");
    return errs;
}

std::string config_digest(const RunConfig& c) {
    json j = config_to_json(c);
    j.erase("out_dir"); // where results go does not change them
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

} // namespace carl
