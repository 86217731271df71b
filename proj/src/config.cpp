#include "mfsg/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "mfsg/errors.hpp"

namespace mfsg {

namespace {

void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw ConfigError((where.empty() ? key : where + "." + key) + ": unknown key");
    }
}

double get_real(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": not finite");
    return x;
}

long long get_int(const Json& j, const std::string& where, long long lo, long long hi) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(hi))
        throw ConfigError(where + ": out of range");
    const long long v = j.get<long long>();
    if (v < lo || v > hi) throw ConfigError(where + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

std::vector<double> get_reals(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of numbers");
    std::vector<double> v;
    for (std::size_t k = 0; k < j.size(); ++k) v.push_back(get_real(j[k], where + "[" + std::to_string(k) + "]"));
    return v;
}

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void parse_potential(const Json& j, RunConfig& c) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "log_prob") c.potential = RunConfig::Potential::log_prob;
        else if (s == "lyapunov") c.potential = RunConfig::Potential::lyapunov;
        else throw ConfigError("potential: expected \"log_prob\", \"lyapunov\" or {\"constant\": [...]}");
        return;
    }
    only_keys(j, "potential", {"constant"});
    if (!j.contains("constant")) throw ConfigError("potential: expected {\"constant\": [...]}");
    c.potential = RunConfig::Potential::constant;
    c.constants = get_reals(j["constant"], "potential.constant");
    if (c.constants.size() != c.maps.size()) throw ConfigError("potential.constant: need one constant per map");
}

void parse_beta(const Json& j, RunConfig& c) {
    only_keys(j, "beta", {"min", "max", "steps"});
    if (j.contains("min")) c.beta_min = get_real(j["min"], "beta.min");
    if (j.contains("max")) c.beta_max = get_real(j["max"], "beta.max");
    if (j.contains("steps")) c.beta_steps = static_cast<int>(get_int(j["steps"], "beta.steps", 5, 100001));
    if (!(c.beta_min < c.beta_max)) throw ConfigError("beta: min must be below max");
    const auto grid = uniform_grid(c.beta_min, c.beta_max, c.beta_steps);
    const double step = (c.beta_max - c.beta_min) / (c.beta_steps - 1);
    bool zero = false;
    for (double b : grid) zero = zero || std::abs(b) <= 1e-9 * step;
    if (!zero) throw ConfigError("beta: the grid must contain beta = 0");
}

void parse_coliseum(const Json& j, RunConfig& c) {
    only_keys(j, "coliseum", {"window", "resolution", "samples", "escape_radius", "traps", "tol"});
    if (j.contains("window")) {
        const auto w = get_reals(j["window"], "coliseum.window");
        if (w.size() != 4) throw ConfigError("coliseum.window: expected [x0, x1, y0, y1]");
        if (!(w[0] < w[1]) || !(w[2] < w[3])) throw ConfigError("coliseum.window: need x0 < x1 and y0 < y1");
        c.window = {w[0], w[1], w[2], w[3]};
    }
    if (j.contains("resolution")) {
        const Json& r = j["resolution"];
        if (r.is_array()) {
            if (r.size() != 2) throw ConfigError("coliseum.resolution: expected N or [width, height]");
            c.width = static_cast<int>(get_int(r[0], "coliseum.resolution[0]", 2, 8192));
            c.height = static_cast<int>(get_int(r[1], "coliseum.resolution[1]", 2, 8192));
        } else {
            c.width = c.height = static_cast<int>(get_int(r, "coliseum.resolution", 2, 8192));
        }
    }
    if (j.contains("samples")) c.samples = static_cast<std::uint32_t>(get_int(j["samples"], "coliseum.samples", 0, 1 << 24));
    if (j.contains("escape_radius")) {
        c.escape_radius = get_real(j["escape_radius"], "coliseum.escape_radius");
        if (c.escape_radius < 0.0) throw ConfigError("coliseum.escape_radius: must be >= 0 (0 = automatic)");
    }
    if (j.contains("tol")) {
        c.tol = get_real(j["tol"], "coliseum.tol");
        if (!(c.tol > 0.0)) throw ConfigError("coliseum.tol: must be positive");
    }
    if (j.contains("traps")) {
        if (!j["traps"].is_array()) throw ConfigError("coliseum.traps: expected an array");
        for (std::size_t k = 0; k < j["traps"].size(); ++k) {
            const std::string at = "coliseum.traps[" + std::to_string(k) + "]";
            const Json& t = j["traps"][k];
            only_keys(t, at, {"center", "radius", "label"});
            if (!t.contains("center") || !t.contains("radius")) throw ConfigError(at + ": needs center and radius");
            const auto z = get_reals(t["center"], at + ".center");
            if (z.size() != 2) throw ConfigError(at + ".center: expected [re, im]");
            TrapRegion tr;
            tr.center = SpherePoint(z[0], z[1]);
            tr.radius = get_real(t["radius"], at + ".radius");
            if (!(tr.radius > 0.0)) throw ConfigError(at + ".radius: must be positive");
            if (t.contains("label")) {
                if (!t["label"].is_string()) throw ConfigError(at + ".label: expected a string");
                tr.label = t["label"].get<std::string>();
            }
            c.traps.push_back(tr);
        }
    }
}

void parse_holder(const Json& j, RunConfig& c) {
    only_keys(j, "holder", {"n_points", "radii"});
    c.holder = true;
    if (j.contains("n_points")) c.holder_points = static_cast<std::size_t>(get_int(j["n_points"], "holder.n_points", 1, 10000000));
    if (j.contains("radii")) {
        const Json& r = j["radii"];
        only_keys(r, "holder.radii", {"r0", "ratio", "count"});
        if (r.contains("r0")) {
            c.holder_r0 = get_real(r["r0"], "holder.radii.r0");
            if (!(c.holder_r0 > 0.0)) throw ConfigError("holder.radii.r0: must be positive");
        }
        if (r.contains("ratio")) {
            c.holder_ratio = get_real(r["ratio"], "holder.radii.ratio");
            if (!(c.holder_ratio > 1.0)) throw ConfigError("holder.radii.ratio: must exceed 1");
        }
        if (r.contains("count")) c.holder_count = static_cast<int>(get_int(r["count"], "holder.radii.count", 5, 1000));
    }
}

}  // namespace

const char* potential_name(RunConfig::Potential p) {
    switch (p) {
        case RunConfig::Potential::log_prob: return "log_prob";
        case RunConfig::Potential::constant: return "constant";
        case RunConfig::Potential::lyapunov: return "lyapunov";
    }
    return "?";
}

HolderFamily RunConfig::psi() const {
    switch (potential) {
        case Potential::log_prob: return HolderFamily::log_prob(probabilities);
        case Potential::constant: return HolderFamily::constant(constants);
        case Potential::lyapunov: return HolderFamily::scalar(-1.0);
    }
    return HolderFamily::scalar(-1.0);
}

std::vector<double> RunConfig::psi_constants() const { return psi().constants(maps.size()); }

std::vector<double> RunConfig::betas() const { return uniform_grid(beta_min, beta_max, beta_steps); }

RunConfig parse_config(const Json& j) {
    only_keys(j, "", {"maps", "probabilities", "potential", "beta", "depth", "julia", "coliseum", "holder", "bound", "output_dir"});
    RunConfig c;
    if (!j.contains("maps")) throw ConfigError("maps: missing");
    if (!j["maps"].is_array() || j["maps"].empty()) throw ConfigError("maps: expected a nonempty array");
    for (std::size_t k = 0; k < j["maps"].size(); ++k) c.maps.push_back(map_from_json(j["maps"][k], "maps[" + std::to_string(k) + "]"));
    try {
        (void)MultiMap(c.maps);
    } catch (const Error& e) {
        throw ConfigError(std::string("maps: ") + e.what());
    }

    if (!j.contains("probabilities")) throw ConfigError("probabilities: missing");
    c.probabilities = get_reals(j["probabilities"], "probabilities");
    if (c.probabilities.size() != c.maps.size()) throw ConfigError("probabilities: need one probability per map");
    double sum = 0.0;
    for (std::size_t k = 0; k < c.probabilities.size(); ++k) {
        const double p = c.probabilities[k];
        const bool ok = c.maps.size() == 1 ? p > 0.0 && p <= 1.0 : p > 0.0 && p < 1.0;
        if (!ok) throw ConfigError("probabilities[" + std::to_string(k) + "]: must lie in (0, 1)");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("probabilities: must sum to 1 (got " + std::to_string(sum) + ")");

    if (j.contains("potential")) parse_potential(j["potential"], c);
    if (j.contains("beta")) parse_beta(j["beta"], c);
    else parse_beta(Json::object(), c);
    if (j.contains("depth")) {
        const Json& d = j["depth"];
        if (d.is_string()) {
            if (d.get<std::string>() != "auto") throw ConfigError("depth: expected an integer or \"auto\"");
        } else {
            c.depth = static_cast<int>(get_int(d, "depth", 1, 64));
        }
    }
    if (j.contains("julia")) {
        const Json& g = j["julia"];
        only_keys(g, "julia", {"target_count", "rng_seed", "expansion_depth", "expansion_samples"});
        if (g.contains("target_count"))
            c.julia_target_count = static_cast<std::size_t>(get_int(g["target_count"], "julia.target_count", 16, 100000000));
        if (g.contains("rng_seed")) {
            if (!g["rng_seed"].is_number_unsigned()) throw ConfigError("julia.rng_seed: expected a nonnegative integer");
            c.rng_seed = g["rng_seed"].get<std::uint64_t>();
        }
        if (g.contains("expansion_depth")) c.expansion_depth = static_cast<int>(get_int(g["expansion_depth"], "julia.expansion_depth", 4, 64));
        if (g.contains("expansion_samples"))
            c.expansion_samples = static_cast<int>(get_int(g["expansion_samples"], "julia.expansion_samples", 1, 1000000));
    }
    if (j.contains("coliseum")) parse_coliseum(j["coliseum"], c);
    if (j.contains("holder")) parse_holder(j["holder"], c);
    if (j.contains("bound")) {
        const Json& b = j["bound"];
        only_keys(b, "bound", {"n_sequences", "seq_len"});
        if (b.contains("n_sequences")) c.bound_sequences = static_cast<std::size_t>(get_int(b["n_sequences"], "bound.n_sequences", 1, 100000000));
        if (b.contains("seq_len")) c.bound_seq_len = static_cast<int>(get_int(b["seq_len"], "bound.seq_len", 1, 10000));
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
            throw ConfigError("output_dir: expected a nonempty string");
        c.output_dir = j["output_dir"].get<std::string>();
    }

    Json canon = j;
    canon.erase("output_dir");
    c.digest = fnv1a(canon.dump());
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
    }
    try {
        return parse_config(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace mfsg
