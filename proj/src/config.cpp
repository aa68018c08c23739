#include "natural/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "natural/errors.hpp"
#include "natural/io.hpp"

namespace natural {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads one JSON object, remembering which keys were used so typos are rejected.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(where(key) + ": " + msg);
    }

    std::string where(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key, "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) fail(key, "must be finite");
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(key, "expected an integer");
            const auto x = v->get<long long>();
            if (x < -2147483647LL || x > 2147483647LL) fail(key, "integer out of range");
            out = static_cast<int>(x);
        }
    }

    void seed(const std::string& key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
                fail(key, "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(key, "expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key, "expected a string");
            out = v->get<std::string>();
        }
    }

    template <class T>
    void list(const std::string& key, std::vector<T>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail(key, "expected an array");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                const json& e = (*v)[i];
                const std::string at = key + "[" + std::to_string(i) + "]";
                if constexpr (std::is_same_v<T, int>) {
                    if (!e.is_number_integer()) fail(at, "expected an integer");
                    out.push_back(e.get<int>());
                } else if constexpr (std::is_same_v<T, double>) {
                    if (!e.is_number()) fail(at, "expected a number");
                    out.push_back(e.get<double>());
                } else {
                    if (!e.is_string()) fail(at, "expected a string");
                    out.push_back(e.get<std::string>());
                }
            }
        }
    }

    // Runs body on a nested object if present.
    template <class F>
    void object(const std::string& key, F&& body) {
        if (const json* v = find(key)) {
            Section s(*v, where(key));
            body(s);
            s.finish();
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_bump(Section& s, Bump& b) {
    s.number("center", b.center);
    s.number("plateau", b.plateau);
    s.number("width", b.width);
    s.number("height", b.height);
    s.number("amplitude", b.amplitude);
    s.number("frequency", b.frequency);
}

void read_loadings(Section& s, Loadings& l) {
    s.number("diffusion", l.diffusion);
    s.number("jump", l.jump);
    s.number("independent", l.independent);
}

ordered_json bump_json(const Bump& b) {
    return {{"center", b.center},       {"plateau", b.plateau},     {"width", b.width},
            {"height", b.height},       {"amplitude", b.amplitude}, {"frequency", b.frequency}};
}

ordered_json loadings_json(const Loadings& l) {
    return {{"diffusion", l.diffusion}, {"jump", l.jump}, {"independent", l.independent}};
}

void require(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field + ": " + msg);
}

bool on_grid(double t, const TimeGrid& grid) { return grid.contains(t); }

}  // namespace

StepLaw RunConfig::step_law() const {
    StepLaw l = StepLaw::trinomial(law.jump_probability);
    return law.independent_coin ? l.with_independent_coin() : l;
}

StepLaw RunConfig::tree_law() const {
    StepLaw l = StepLaw::trinomial(law.jump_probability);
    return tree.branching == 6 ? l.with_independent_coin() : l;
}

PairConfig RunConfig::pair_config() const {
    std::vector<Bump> bumps;
    std::vector<Loadings> loadings;
    for (const auto& b : pair.bumps) {
        bumps.push_back(b.bump);
        loadings.push_back(b.loadings);
    }
    return {CoefficientSpec(std::move(bumps), Clamp(pair.phi_width), pair.xgrid_resolution), std::move(loadings),
            pair.ladder_depth};
}

bool RunConfig::wants(const std::string& format) const {
    for (const auto& f : outputs.formats)
        if (f == format) return true;
    return false;
}

RunConfig default_config() {
    RunConfig c;
    BumpConfig first{{0.35, 0.05, 0.25, 1.5, 0.0, 0.0}, {0.6, 0.42, 0.0}};
    BumpConfig second{{0.65, 0.05, 0.2, -1.0, 0.0, 0.0}, {0.3, -0.3, 0.0}};
    c.pair.bumps = {first, second};
    c.tree.delta_profile = {0.03, 0.0, 0.05, 0.02, 0.0, 0.04};
    c.polarization.seed = 5;
    return c;
}

RunConfig parse_config(const nlohmann::json& j) {
    RunConfig c = default_config();
    Section root(j, "");
    root.text("schema", c.schema);
    if (c.schema != config_schema) root.fail("schema", std::string("unsupported schema, expected ") + config_schema);
    root.object("grid", [&](Section& s) {
        s.number("T", c.grid.horizon);
        s.integer("N", c.grid.steps);
    });
    root.object("z", [&](Section& s) {
        s.number("Z0", c.z.z0);
        s.number("lambda", c.z.lambda);
        s.number("t_star", c.z.jump_time);
        s.number("delta", c.z.jump_size);
        s.number("sigma_N", c.z.sigma_n);
        s.number("jump_scale", c.z.jump_scale);
        s.number("epsilon", c.z.epsilon);
    });
    root.object("law", [&](Section& s) {
        s.number("jump_probability", c.law.jump_probability);
        s.boolean("independent_coin", c.law.independent_coin);
    });
    root.object("pair", [&](Section& s) {
        if (const json* v = s.find("bumps")) {
            if (!v->is_array()) s.fail("bumps", "expected an array");
            c.pair.bumps.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                Section b((*v)[i], s.where("bumps[" + std::to_string(i) + "]"));
                BumpConfig bc;
                read_bump(b, bc.bump);
                b.object("loadings", [&](Section& l) { read_loadings(l, bc.loadings); });
                b.finish();
                c.pair.bumps.push_back(bc);
            }
        }
        s.number("phi_width", c.pair.phi_width);
        s.integer("ladder_depth", c.pair.ladder_depth);
        s.integer("xgrid_resolution", c.pair.xgrid_resolution);
    });
    root.object("mc", [&](Section& s) {
        s.integer("paths", c.mc.paths);
        s.seed("seed", c.mc.seed);
        s.integer("batch", c.mc.batch);
        s.integer("u_stride", c.mc.u_stride);
    });
    root.object("tree", [&](Section& s) {
        s.integer("b", c.tree.branching);
        s.integer("depth", c.tree.depth);
        s.number("T", c.tree.horizon);
        s.number("leaf_low", c.tree.leaf_low);
        s.number("leaf_high", c.tree.leaf_high);
        s.list("delta_profile", c.tree.delta_profile);
        s.number("epsilon", c.tree.epsilon);
        s.seed("seed", c.tree.seed);
    });
    root.object("tolerances", [&](Section& s) {
        s.number("exact", c.tolerances.exact);
        s.number("enlargement", c.tolerances.enlargement);
        s.number("sigma", c.tolerances.sigma);
        s.number("atom_tol", c.tolerances.atom_tol);
    });
    root.object("regularity", [&](Section& s) {
        auto& r = c.regularity;
        s.number("T", r.horizon);
        s.integer("N", r.steps);
        s.integer("paths", r.paths);
        s.seed("seed", r.seed);
        s.number("v", r.v);
        s.number("t", r.t);
        s.number("sigma_N", r.sigma_n);
        s.number("jump_scale", r.jump_scale);
        s.list("strides", r.strides);
        s.list("fd_steps", r.fd_steps);
        s.integer("min_monotone", r.min_monotone);
        s.number("jump_tolerance", r.jump_tolerance);
        s.number("fd_order", r.fd_order);
        s.integer("continuity_N", r.continuity_steps);
        s.list("continuity_strides", r.continuity_strides);
        s.seed("continuity_seed", r.continuity_seed);
        s.number("min_factor", r.min_factor);
        s.number("stability", r.stability);
    });
    root.object("polarization", [&](Section& s) {
        auto& p = c.polarization;
        s.list("horizons", p.horizons);
        s.number("dt", p.dt);
        s.integer("paths", p.paths);
        s.integer("u_count", p.u_count);
        s.number("eta", p.eta);
        s.integer("bins", p.bins);
        s.seed("seed", p.seed);
        s.number("jump_probability", p.jump_probability);
        s.object("bump", [&](Section& b) { read_bump(b, p.bump); });
        s.object("loadings", [&](Section& l) { read_loadings(l, p.loading); });
        s.number("phi_width", p.phi_width);
        s.integer("ladder_depth", p.ladder_depth);
        s.integer("xgrid_resolution", p.xgrid_resolution);
    });
    root.object("outputs", [&](Section& s) {
        s.text("directory", c.outputs.directory);
        s.list("formats", c.outputs.formats);
        s.integer("family_paths", c.outputs.family_paths);
    });
    root.finish();
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

void validate(const RunConfig& c) {
    require(c.grid.horizon > 0.0, "grid.T", "must be positive");
    require(c.grid.steps >= 1 && c.grid.steps <= 100000, "grid.N", "must lie in [1, 100000]");
    require(c.law.jump_probability > 0.0 && c.law.jump_probability < 1.0, "law.jump_probability",
            "must lie in (0, 1)");
    const TimeGrid grid = c.time_grid();
    const StepLaw law = c.step_law();
    validate(c.z, grid, law);

    require(!c.pair.bumps.empty(), "pair.bumps", "need at least one bump");
    require(c.pair.ladder_depth >= 0 && c.pair.ladder_depth <= 60, "pair.ladder_depth", "must lie in [0, 60]");
    for (std::size_t j = 0; j < c.pair.bumps.size(); ++j) {
        const auto& l = c.pair.bumps[j].loadings;
        const std::string at = "pair.bumps[" + std::to_string(j) + "].loadings";
        if (l.independent != 0.0 && !c.law.independent_coin)
            throw ConfigError(at + ".independent: law.independent_coin is off");
    }
    (void)c.pair_config();  // coefficient validation

    require(c.mc.paths >= 1, "mc.paths", "must be positive");
    require(c.mc.batch >= 1, "mc.batch", "must be positive");
    require(c.mc.u_stride >= 1 && c.grid.steps % c.mc.u_stride == 0, "mc.u_stride", "must divide grid.N");

    require(c.tree.branching == 3 || c.tree.branching == 6, "tree.b", "must be 3 or 6");
    require(c.tree.depth >= 1, "tree.depth", "must be positive");
    require(std::pow(double(c.tree.branching), c.tree.depth) <= 4e6, "tree.depth", "tree has more than 4e6 leaves");
    require(c.tree.horizon > 0.0, "tree.T", "must be positive");
    require(0.0 < c.tree.leaf_low && c.tree.leaf_low < c.tree.leaf_high && c.tree.leaf_high < 1.0, "tree.leaf_low",
            "need 0 < leaf_low < leaf_high < 1");
    require(c.tree.delta_profile.empty() || int(c.tree.delta_profile.size()) == c.tree.depth, "tree.delta_profile",
            "needs one entry per level");
    for (double d : c.tree.delta_profile) require(d >= 0.0, "tree.delta_profile", "entries must be non-negative");
    require(c.tree.epsilon > 0.0 && c.tree.epsilon < 0.5, "tree.epsilon", "must lie in (0, 0.5)");

    require(c.tolerances.exact > 0.0, "tolerances.exact", "must be positive");
    require(c.tolerances.enlargement > 0.0, "tolerances.enlargement", "must be positive");
    require(c.tolerances.sigma > 0.0, "tolerances.sigma", "must be positive");
    require(c.tolerances.atom_tol >= 0.0, "tolerances.atom_tol", "must be non-negative");

    const auto& r = c.regularity;
    require(r.horizon > 0.0, "regularity.T", "must be positive");
    require(r.steps >= 2, "regularity.N", "must be at least 2");
    require(r.paths >= 1, "regularity.paths", "must be positive");
    const TimeGrid rgrid(r.horizon, r.steps);
    require(on_grid(r.v, rgrid) && rgrid.index_of(r.v) > 0, "regularity.v", "must be a positive grid time");
    require(on_grid(r.t, rgrid), "regularity.t", "must be a grid time");
    require(r.strides.size() >= 2, "regularity.strides", "need at least two levels");
    for (std::size_t i = 0; i < r.strides.size(); ++i) {
        require(r.strides[i] >= 1, "regularity.strides", "entries must be positive");
        if (i > 0) require(r.strides[i] < r.strides[i - 1], "regularity.strides", "must be strictly decreasing");
    }
    require(!r.fd_steps.empty(), "regularity.fd_steps", "need at least one step");
    for (double h : r.fd_steps) require(h > 0.0, "regularity.fd_steps", "entries must be positive");
    require(r.min_monotone >= 0 && r.min_monotone <= int(r.strides.size()) - 1, "regularity.min_monotone",
            "must lie in [0, strides - 1]");
    ZConfig rz = c.z;
    rz.sigma_n = r.sigma_n;
    rz.jump_scale = r.jump_scale;
    require(c.z.jump_size > 0.0, "z.delta", "the regularity suite needs a jump of Lambda");
    try {
        validate(rz, rgrid, law);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("regularity.") + e.what());
    }
    const int v = rgrid.index_of(r.v), t = rgrid.index_of(r.t), j = rgrid.index_of(c.z.jump_time);
    require(v + r.strides.front() <= t && v - r.strides.front() >= 0, "regularity.v",
            "coarsest stride must fit around v and before t");
    require(j + r.strides.front() <= t && j != v, "z.t_star", "regularity needs t_star + stride <= t and t_star != v");
    require(r.continuity_steps >= 2, "regularity.continuity_N", "must be at least 2");
    require(r.continuity_strides.size() >= 2, "regularity.continuity_strides", "need at least two levels");
    const TimeGrid cgrid(r.horizon, r.continuity_steps);
    require(cgrid.contains(c.z.jump_time), "regularity.continuity_N", "t_star must be a grid time");
    for (int s : r.continuity_strides) {
        require(s >= 1 && r.continuity_steps % s == 0 && cgrid.index_of(c.z.jump_time) % s == 0,
                "regularity.continuity_strides", "strides must divide continuity_N and the t_star index");
    }

    const auto& p = c.polarization;
    require(!p.horizons.empty(), "polarization.horizons", "need at least one horizon");
    require(p.dt > 0.0, "polarization.dt", "must be positive");
    for (double h : p.horizons) {
        require(h > 0.0, "polarization.horizons", "entries must be positive");
        const double n = h / p.dt;
        require(std::abs(n - std::round(n)) < 1e-9, "polarization.horizons", "must be multiples of dt");
    }
    require(p.paths >= 1, "polarization.paths", "must be positive");
    require(p.u_count >= 1, "polarization.u_count", "must be positive");
    require(p.eta > 0.0 && p.eta < 0.5, "polarization.eta", "must lie in (0, 0.5)");
    require(p.bins >= 1, "polarization.bins", "must be positive");
    require(p.jump_probability > 0.0 && p.jump_probability < 1.0, "polarization.jump_probability",
            "must lie in (0, 1)");

    for (const auto& f : c.outputs.formats)
        require(f == "json" || f == "csv", "outputs.formats", "unknown format " + f);
    require(c.outputs.family_paths >= 0, "outputs.family_paths", "must be non-negative");
}

nlohmann::ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["schema"] = c.schema;
    j["grid"] = {{"T", c.grid.horizon}, {"N", c.grid.steps}};
    j["z"] = {{"Z0", c.z.z0},         {"lambda", c.z.lambda},         {"t_star", c.z.jump_time},
              {"delta", c.z.jump_size}, {"sigma_N", c.z.sigma_n},     {"jump_scale", c.z.jump_scale},
              {"epsilon", c.z.epsilon}};
    j["law"] = {{"jump_probability", c.law.jump_probability}, {"independent_coin", c.law.independent_coin}};
    ordered_json bumps = ordered_json::array();
    for (const auto& b : c.pair.bumps) {
        ordered_json e = bump_json(b.bump);
        e["loadings"] = loadings_json(b.loadings);
        bumps.push_back(e);
    }
    j["pair"] = {{"bumps", bumps},
                 {"phi_width", c.pair.phi_width},
                 {"ladder_depth", c.pair.ladder_depth},
                 {"xgrid_resolution", c.pair.xgrid_resolution}};
    j["mc"] = {{"paths", c.mc.paths}, {"seed", c.mc.seed}, {"batch", c.mc.batch}, {"u_stride", c.mc.u_stride}};
    j["tree"] = {{"b", c.tree.branching},         {"depth", c.tree.depth},
                 {"T", c.tree.horizon},           {"leaf_low", c.tree.leaf_low},
                 {"leaf_high", c.tree.leaf_high}, {"delta_profile", c.tree.delta_profile},
                 {"epsilon", c.tree.epsilon},     {"seed", c.tree.seed}};
    j["tolerances"] = {{"exact", c.tolerances.exact},
                       {"enlargement", c.tolerances.enlargement},
                       {"sigma", c.tolerances.sigma},
                       {"atom_tol", c.tolerances.atom_tol}};
    const auto& r = c.regularity;
    j["regularity"] = {{"T", r.horizon},
                       {"N", r.steps},
                       {"paths", r.paths},
                       {"seed", r.seed},
                       {"v", r.v},
                       {"t", r.t},
                       {"sigma_N", r.sigma_n},
                       {"jump_scale", r.jump_scale},
                       {"strides", r.strides},
                       {"fd_steps", r.fd_steps},
                       {"min_monotone", r.min_monotone},
                       {"jump_tolerance", r.jump_tolerance},
                       {"fd_order", r.fd_order},
                       {"continuity_N", r.continuity_steps},
                       {"continuity_strides", r.continuity_strides},
                       {"continuity_seed", r.continuity_seed},
                       {"min_factor", r.min_factor},
                       {"stability", r.stability}};
    const auto& p = c.polarization;
    j["polarization"] = {{"horizons", p.horizons},
                         {"dt", p.dt},
                         {"paths", p.paths},
                         {"u_count", p.u_count},
                         {"eta", p.eta},
                         {"bins", p.bins},
                         {"seed", p.seed},
                         {"jump_probability", p.jump_probability},
                         {"bump", bump_json(p.bump)},
                         {"loadings", loadings_json(p.loading)},
                         {"phi_width", p.phi_width},
                         {"ladder_depth", p.ladder_depth},
                         {"xgrid_resolution", p.xgrid_resolution}};
    j["outputs"] = {{"directory", c.outputs.directory},
                    {"formats", c.outputs.formats},
                    {"family_paths", c.outputs.family_paths}};
    return j;
}

std::string config_hash(const RunConfig& config) {
    // Where and how results are written does not change them.
    ordered_json j = to_json(config);
    j.erase("outputs");
    return fnv1a_hex(j.dump());
}

}  // namespace natural
