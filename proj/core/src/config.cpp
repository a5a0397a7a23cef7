#include "chemostat/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chemostat/errors.hpp"

namespace chemostat {

using nlohmann::json;

State InitialCondition::resolve(const ChemostatParams& params) const {
    switch (policy) {
        case InitialPolicy::line_canonical:
            return State{params.z_f / 2.0 - 1.0, params.z_f / 2.0, 1.0};
        case InitialPolicy::line_split:
            return State{split * (params.z_f - 1.0), (1.0 - split) * (params.z_f - 1.0), 1.0};
        case InitialPolicy::state:
            return state;
        case InitialPolicy::reduced:
            return State{x_bar * params.z_f, y_bar * params.z_f, 1.0};
    }
    return state;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.contains(key)) fail(where + "/" + key, "unknown key");
    }
}

double require_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(where, "missing required key '" + key + "'");
    if (!obj[key].is_number()) fail(where + "/" + key, "expected a number");
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& where, const std::string& key,
                 double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(where + "/" + key, "expected a number");
    return obj[key].get<double>();
}

std::string string_or(const json& obj, const std::string& where, const std::string& key,
                      const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) fail(where + "/" + key, "expected a string");
    return obj[key].get<std::string>();
}

GrowthCurve parse_curve(const json& obj, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object {a, b, gamma}");
    check_keys(obj, where, {"a", "b", "gamma"});
    GrowthCurve c;
    c.a = require_number(obj, where, "a");
    c.b = require_number(obj, where, "b");
    c.gamma = number_or(obj, where, "gamma", 0.0);
    if (!(c.a > 0.0)) fail(where + "/a", "a > 0 required");
    if (!(c.b > 0.0)) fail(where + "/b", "b > 0 required");
    if (c.gamma < 0.0) fail(where + "/gamma", "gamma >= 0 required");
    return c;
}

NoiseSpec parse_noise(const json& obj, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object with a 'kind'");
    const std::string kind = string_or(obj, where, "kind", "");
    if (kind == "none") {
        check_keys(obj, where, {"kind"});
        return NoNoise{};
    }
    if (kind == "general") {
        check_keys(obj, where, {"kind", "sigma1", "sigma2", "sigma3"});
        GeneralNoise g;
        g.sigma1 = number_or(obj, where, "sigma1", 0.0);
        g.sigma2 = number_or(obj, where, "sigma2", 0.0);
        g.sigma3 = number_or(obj, where, "sigma3", 0.0);
        if (g.sigma1 < 0.0 || g.sigma2 < 0.0 || g.sigma3 < 0.0) {
            fail(where, "noise intensities must be >= 0");
        }
        return g;
    }
    if (kind == "dilution") {
        check_keys(obj, where, {"kind", "sigma"});
        DilutionNoise d;
        d.sigma = number_or(obj, where, "sigma", 0.0);
        if (d.sigma < 0.0) fail(where + "/sigma", "sigma >= 0 required");
        return d;
    }
    fail(where + "/kind", "expected one of: none, general, dilution");
}

ChemostatParams parse_params(const json& obj, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    check_keys(obj, where, {"theta", "z_f", "curve_x", "curve_y", "noise"});
    ChemostatParams p;
    p.theta = require_number(obj, where, "theta");
    p.z_f = require_number(obj, where, "z_f");
    if (!obj.contains("curve_x") || !obj.contains("curve_y")) {
        fail(where, "curve_x and curve_y are required");
    }
    p.curve_x = parse_curve(obj["curve_x"], where + "/curve_x");
    p.curve_y = parse_curve(obj["curve_y"], where + "/curve_y");
    p.noise = obj.contains("noise") ? parse_noise(obj["noise"], where + "/noise") : NoiseSpec{NoNoise{}};
    if (!(p.theta > 0.0)) fail(where + "/theta", "theta > 0 required");
    if (!(p.z_f > 1.0)) fail(where + "/z_f", "z_f > 1 required");
    return p;
}

InitialCondition parse_initial(const json& obj, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    check_keys(obj, where, {"policy", "split", "x", "y", "z", "x_bar", "y_bar"});
    InitialCondition ic;
    const std::string policy = string_or(obj, where, "policy", "line-canonical");
    if (policy == "line-canonical") {
        ic.policy = InitialPolicy::line_canonical;
    } else if (policy == "line-split") {
        ic.policy = InitialPolicy::line_split;
        ic.split = number_or(obj, where, "split", 0.5);
        if (!(ic.split >= 0.0 && ic.split <= 1.0)) fail(where + "/split", "split in [0,1] required");
    } else if (policy == "state") {
        ic.policy = InitialPolicy::state;
        ic.state.x = require_number(obj, where, "x");
        ic.state.y = require_number(obj, where, "y");
        ic.state.z = require_number(obj, where, "z");
        if (ic.state.x < 0.0 || ic.state.y < 0.0 || ic.state.z < 0.0) {
            fail(where, "state components must be >= 0");
        }
    } else if (policy == "reduced") {
        ic.policy = InitialPolicy::reduced;
        ic.x_bar = require_number(obj, where, "x_bar");
        ic.y_bar = require_number(obj, where, "y_bar");
        if (ic.x_bar < 0.0 || ic.y_bar < 0.0) fail(where, "reduced state must be >= 0");
    } else {
        fail(where + "/policy", "expected one of: line-canonical, line-split, state, reduced");
    }
    return ic;
}

RunControls parse_run(const json& obj, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    check_keys(obj, where,
               {"dt", "t_end", "n_paths", "scheme", "seed", "output_stride", "stop_when_decided"});
    RunControls rc;
    rc.dt = number_or(obj, where, "dt", rc.dt);
    rc.t_end = number_or(obj, where, "t_end", rc.t_end);
    if (!(rc.dt > 0.0)) fail(where + "/dt", "dt > 0 required");
    if (!(rc.t_end >= rc.dt)) fail(where + "/t_end", "t_end >= dt required");
    if (obj.contains("n_paths")) {
        if (!obj["n_paths"].is_number_integer()) fail(where + "/n_paths", "expected an integer");
        rc.n_paths = obj["n_paths"].get<int>();
        if (rc.n_paths < 1) fail(where + "/n_paths", "n_paths >= 1 required");
    }
    const std::string scheme = string_or(obj, where, "scheme", "euler-maruyama");
    if (scheme == "euler-maruyama") rc.scheme = SdeScheme::euler_maruyama;
    else if (scheme == "milstein") rc.scheme = SdeScheme::milstein;
    else fail(where + "/scheme", "expected euler-maruyama or milstein");
    if (obj.contains("seed")) {
        if (!obj["seed"].is_number_unsigned() &&
            !(obj["seed"].is_number_integer() && obj["seed"].get<long long>() >= 0)) {
            fail(where + "/seed", "expected a non-negative integer");
        }
        rc.seed = obj["seed"].get<std::uint64_t>();
    }
    if (obj.contains("output_stride")) {
        if (!obj["output_stride"].is_number_unsigned() && !obj["output_stride"].is_number_integer()) {
            fail(where + "/output_stride", "expected a positive integer");
        }
        rc.output_stride = obj["output_stride"].get<std::uint64_t>();
        if (rc.output_stride < 1) fail(where + "/output_stride", "output_stride >= 1 required");
    }
    if (obj.contains("stop_when_decided")) {
        if (!obj["stop_when_decided"].is_boolean()) {
            fail(where + "/stop_when_decided", "expected a boolean");
        }
        rc.stop_when_decided = obj["stop_when_decided"].get<bool>();
    }
    return rc;
}

FpControls parse_fp(const json& obj, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    check_keys(obj, where,
               {"h", "dt", "t_end", "scheme", "x_max", "y_max", "cut_offset", "snapshot_times"});
    FpControls fp;
    fp.h = number_or(obj, where, "h", fp.h);
    fp.dt = number_or(obj, where, "dt", fp.dt);
    fp.t_end = number_or(obj, where, "t_end", fp.t_end);
    fp.x_max = number_or(obj, where, "x_max", fp.x_max);
    fp.y_max = number_or(obj, where, "y_max", fp.y_max);
    fp.cut_offset = number_or(obj, where, "cut_offset", fp.cut_offset);
    if (!(fp.h > 0.0)) fail(where + "/h", "h > 0 required");
    if (!(fp.dt > 0.0)) fail(where + "/dt", "dt > 0 required");
    if (!(fp.t_end > 0.0)) fail(where + "/t_end", "t_end > 0 required");
    if (!(fp.cut_offset > 0.0)) fail(where + "/cut_offset", "cut_offset > 0 required");
    const std::string scheme = string_or(obj, where, "scheme", "implicit-euler");
    if (scheme == "implicit-euler") fp.scheme = FpScheme::implicit_euler;
    else if (scheme == "crank-nicolson") fp.scheme = FpScheme::crank_nicolson;
    else fail(where + "/scheme", "expected implicit-euler or crank-nicolson");
    if (obj.contains("snapshot_times")) {
        if (!obj["snapshot_times"].is_array()) fail(where + "/snapshot_times", "expected an array");
        for (const auto& v : obj["snapshot_times"]) {
            if (!v.is_number()) fail(where + "/snapshot_times", "expected numbers");
            fp.snapshot_times.push_back(v.get<double>());
        }
    }
    return fp;
}

SweepControls parse_sweep(const json& obj, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    check_keys(obj, where, {"param1", "values1", "param2", "values2", "t_end"});
    SweepControls sc;
    sc.param1 = string_or(obj, where, "param1", sc.param1);
    sc.param2 = string_or(obj, where, "param2", sc.param2);
    sc.t_end = number_or(obj, where, "t_end", sc.t_end);
    auto parse_values = [&](const char* key, std::vector<double>& out) {
        if (!obj.contains(key)) return;
        if (!obj[key].is_array()) fail(where + "/" + key, "expected an array of numbers");
        for (const auto& v : obj[key]) {
            if (!v.is_number()) fail(where + "/" + key, "expected numbers");
            out.push_back(v.get<double>());
        }
    };
    parse_values("values1", sc.values1);
    parse_values("values2", sc.values2);
    return sc;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config error at /: expected a JSON object");
    check_keys(root, "",
               {"schema_version", "params", "initial", "run", "fokker_planck", "sweep",
                "output_dir", "recipe"});

    ExperimentConfig cfg;
    cfg.raw_text = text;
    if (root.contains("schema_version")) {
        if (!root["schema_version"].is_number_integer()) {
            fail("/schema_version", "expected an integer");
        }
        cfg.schema_version = root["schema_version"].get<int>();
        if (cfg.schema_version != 1) fail("/schema_version", "unsupported schema version");
    }
    if (!root.contains("params")) fail("/", "missing required section 'params'");
    cfg.params = parse_params(root["params"], "/params");
    if (root.contains("initial")) cfg.initial = parse_initial(root["initial"], "/initial");
    if (root.contains("run")) cfg.run = parse_run(root["run"], "/run");
    if (root.contains("fokker_planck")) {
        cfg.fokker_planck = parse_fp(root["fokker_planck"], "/fokker_planck");
    }
    if (root.contains("sweep")) cfg.sweep = parse_sweep(root["sweep"], "/sweep");
    cfg.output_dir = string_or(root, "", "output_dir", cfg.output_dir);
    if (root.contains("recipe")) {
        if (!root["recipe"].is_string()) fail("/recipe", "expected a string");
        cfg.recipe = root["recipe"].get<std::string>();
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.params.theta = 1.0;
    cfg.params.z_f = 15000.0;
    cfg.params.curve_x = GrowthCurve{2.911, 1.911, 0.0};
    cfg.params.curve_y = GrowthCurve{1.636, 0.636, 0.0};
    cfg.params.noise = NoNoise{};
    cfg.raw_text = "{}";
    return cfg;
}

} // namespace chemostat
