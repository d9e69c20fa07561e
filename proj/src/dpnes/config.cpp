#include "dpnes/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpnes/privacy.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dpnes {

namespace {

[[noreturn]] void cfg_fail(const std::string& origin, const std::string& what) {
    throw std::invalid_argument(origin + ": " + what);
}

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return j;
}

ScheduleDescriptor descriptor_from_json(const json& j, const std::string& origin) {
    if (!j.is_object() || !j.contains("family"))
        cfg_fail(origin, "schedule descriptor needs {family, params}");
    const std::string fam = j.at("family").get<std::string>();
    const json p = j.value("params", json::object());
    auto get = [&](const char* k, double dflt) { return p.value(k, dflt); };
    try {
        if (fam == "constant") return constant_schedule(get("value", 0.0));
        if (fam == "rational-power")
            return rational_power_schedule(get("c", 0.0), get("p", 1.0), get("scale", 1.0));
        if (fam == "gated-exponential")
            return gated_exponential_schedule(get("c", 0.0), get("r", 2.0), get("a", 0.0), get("d", 0.0),
                                              get("scale", 1.0));
        if (fam == "geometric") return geometric_schedule(get("r", 0.5), get("scale", 1.0));
        if (fam == "affine") return affine_schedule(get("c", 0.0), get("d", 0.0));
    } catch (const std::invalid_argument& e) {
        cfg_fail(origin, e.what());
    }
    cfg_fail(origin, "unknown schedule family '" + fam + "'");
}

json descriptor_to_json(const ScheduleDescriptor& s) {
    json p = json::object();
    switch (s.family) {
        case ScheduleFamily::constant:
            return {{"family", "constant"}, {"params", {{"value", s.value}}}};
        case ScheduleFamily::rational_power:
            p = {{"c", s.c}, {"p", s.p}, {"scale", s.scale}};
            return {{"family", "rational-power"}, {"params", p}};
        case ScheduleFamily::gated_exponential:
            p = {{"c", s.c}, {"r", s.r}, {"a", s.a}, {"d", s.d}, {"scale", s.scale}};
            return {{"family", "gated-exponential"}, {"params", p}};
        case ScheduleFamily::geometric:
            p = {{"r", s.r}, {"scale", s.scale}};
            return {{"family", "geometric"}, {"params", p}};
        case ScheduleFamily::affine:
            p = {{"c", s.c}, {"d", s.d}};
            return {{"family", "affine"}, {"params", p}};
    }
    throw std::logic_error("unreachable schedule family");
}

std::vector<ScheduleDescriptor> descriptor_list(const json& j, int n, const std::string& origin) {
    std::vector<ScheduleDescriptor> out;
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(descriptor_from_json(e, origin));
        if (static_cast<int>(out.size()) != n)
            cfg_fail(origin, "per-player descriptor array length mismatch");
    } else {
        out.assign(static_cast<size_t>(n), descriptor_from_json(j, origin));
    }
    return out;
}

}  // namespace

std::string resolve_data_dir(const std::string& explicit_dir) {
    if (!explicit_dir.empty()) return explicit_dir;
    if (const char* env = std::getenv("DPNES_DATA_DIR"); env && *env) return env;
#ifdef DPNES_DEFAULT_DATA_DIR
    return DPNES_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

ScheduleDescriptor descriptor_from_json_text(const std::string& text) {
    return descriptor_from_json(json::parse(text), "<descriptor>");
}

GameSpec load_game_file(const std::string& path) {
    const json j = parse_file(path);
    GameSpec g;
    if (!j.contains("n") || !j.contains("players")) cfg_fail(path, "game file needs n and players");
    g.n = j.at("n").get<int>();
    const auto& players = j.at("players");
    if (!players.is_array() || static_cast<int>(players.size()) != g.n)
        cfg_fail(path, "players array must have exactly n entries");
    for (const auto& p : players) {
        QuadraticAggCost c;
        c.a = p.value("a", 0.0);
        c.b1 = p.value("b1", 0.0);
        c.P0 = p.value("P0", 0.0);
        c.kappa = p.value("kappa", 0.0);
        c.b2 = p.value("b2", 1.0);
        c.I = p.value("I", 0.0);
        g.costs.emplace_back(c);
        g.phi.push_back(LocalMap{p.value("phi_c", 1.0), p.value("phi_d", 0.0)});
        if (!p.contains("lo") || !p.contains("hi")) cfg_fail(path, "player needs lo and hi bounds");
        g.lo.push_back(p.at("lo").get<double>());
        g.hi.push_back(p.at("hi").get<double>());
    }
    auto per_player = [&](const char* key, double dflt_from_player) {
        Vec v;
        if (j.contains(key)) {
            if (j.at(key).is_array())
                v = j.at(key).get<Vec>();
            else
                v.assign(static_cast<size_t>(g.n), j.at(key).get<double>());
        } else {
            v.assign(static_cast<size_t>(g.n), dflt_from_player);
        }
        if (static_cast<int>(v.size()) != g.n) cfg_fail(path, std::string(key) + " length mismatch");
        return v;
    };
    // Defaults derived from the affine structure: phi is |c|-Lipschitz and the
    // quadratic pseudo-gradient is |a|-Lipschitz in its aggregate argument.
    double max_abs_a = 0.0, max_abs_c = 0.0;
    for (int i = 0; i < g.n; ++i) {
        max_abs_a = std::max(max_abs_a, std::fabs(std::get<QuadraticAggCost>(g.costs[i]).a));
        max_abs_c = std::max(max_abs_c, std::fabs(g.phi[i].c));
    }
    g.lipschitz_g = per_player("lipschitz_g", std::max(max_abs_a, 1e-9));
    g.lipschitz_phi = per_player("lipschitz_phi", std::max(max_abs_c, 1e-9));
    if (!j.contains("m")) cfg_fail(path, "game file needs the monotonicity constant m");
    g.monotonicity_m = j.at("m").get<double>();
    validate_game(g);
    return g;
}

RunConfig load_config(const std::string& path_or_preset, const std::string& data_dir) {
    const std::string data = resolve_data_dir(data_dir);
    fs::path cfg_path = path_or_preset;
    if (!fs::exists(cfg_path)) {
        const fs::path preset = fs::path(data) / "presets" / (path_or_preset + ".json");
        if (fs::exists(preset))
            cfg_path = preset;
        else
            throw std::invalid_argument("unknown config '" + path_or_preset +
                                        "': not a file and no preset at " + preset.string());
    }
    const std::string origin = cfg_path.string();
    const json j = parse_file(origin);

    RunConfig c;
    c.name = j.value("name", cfg_path.stem().string());

    auto resolve_ref = [&](const std::string& ref, const char* what) {
        if (fs::exists(ref)) return fs::path(ref).string();
        const fs::path near_cfg = cfg_path.parent_path() / ref;
        if (fs::exists(near_cfg)) return near_cfg.string();
        const fs::path in_data = fs::path(data) / ref;
        if (fs::exists(in_data)) return in_data.string();
        cfg_fail(origin, std::string(what) + " file not found: " + ref);
    };
    if (!j.contains("game") || !j.contains("topology"))
        cfg_fail(origin, "config needs game and topology references");
    c.game_path = resolve_ref(j.at("game").get<std::string>(), "game");
    c.topology_path = resolve_ref(j.at("topology").get<std::string>(), "topology");

    if (!j.contains("schedules")) cfg_fail(origin, "config needs a schedules block");
    const auto& sj = j.at("schedules");
    const GameSpec game = load_game_file(c.game_path);
    ScheduleSet s;
    s.n = game.n;
    s.mu = descriptor_list(sj.at("mu"), game.n, origin);
    s.rho = descriptor_from_json(sj.at("rho"), origin);
    if (sj.at("beta").is_array()) {
        s.beta = sj.at("beta").get<Vec>();
        if (static_cast<int>(s.beta.size()) != game.n) cfg_fail(origin, "beta length mismatch");
    } else {
        s.beta.assign(static_cast<size_t>(game.n), sj.at("beta").get<double>());
    }
    s.noise_b = descriptor_list(sj.at("noise_b"), game.n, origin);
    c.schedules = std::move(s);

    if (j.contains("seeds")) {
        c.seeds = j.at("seeds").get<std::vector<uint64_t>>();
        if (c.seeds.empty()) cfg_fail(origin, "seeds must be nonempty");
    } else if (j.contains("seed")) {
        c.seeds = {j.at("seed").get<uint64_t>()};
    }
    if (!j.contains("horizon")) cfg_fail(origin, "config needs a horizon");
    c.horizon = j.at("horizon").get<long>();
    if (c.horizon < 1) cfg_fail(origin, "horizon must be >= 1");

    const std::string noise = j.value("noise", "on");
    if (noise == "on")
        c.zero_noise = false;
    else if (noise == "zero-noise")
        c.zero_noise = true;
    else
        cfg_fail(origin, "noise must be 'on' or 'zero-noise'");
    c.freeze_actions = j.value("freeze_actions", false);
    c.override_assumptions = j.value("override_assumptions", false);

    const std::string conv = j.value("convention", "empirical");
    if (conv == "empirical")
        c.convention = SensitivityConvention::empirical;
    else if (conv == "theoretical")
        c.convention = SensitivityConvention::theoretical;
    else
        cfg_fail(origin, "convention must be 'empirical' or 'theoretical'");
    c.m3 = j.value("m3", 1.0);

    c.threshold = j.value("threshold", 0.5);
    if (!(c.threshold > 0.0)) cfg_fail(origin, "threshold must be positive");

    if (j.contains("q0")) {
        if (j.at("q0").is_array()) {
            c.q0 = j.at("q0").get<Vec>();
            if (static_cast<int>(c.q0.size()) != game.n) cfg_fail(origin, "q0 length mismatch");
        } else {
            c.q0.assign(static_cast<size_t>(game.n), j.at("q0").get<double>());
        }
    } else {
        c.q0.assign(static_cast<size_t>(game.n), 0.0);
    }
    c.out_dir = j.value("out", "");
    return c;
}

std::string write_config(const RunConfig& c) {
    json j;
    j["name"] = c.name;
    j["game"] = c.game_path;
    j["topology"] = c.topology_path;
    json sj;
    bool mu_uniform = true, b_uniform = true, beta_uniform = true;
    for (const auto& d : c.schedules.mu) mu_uniform &= (d == c.schedules.mu.front());
    for (const auto& d : c.schedules.noise_b) b_uniform &= (d == c.schedules.noise_b.front());
    for (double b : c.schedules.beta) beta_uniform &= (b == c.schedules.beta.front());
    if (mu_uniform)
        sj["mu"] = descriptor_to_json(c.schedules.mu.front());
    else {
        sj["mu"] = json::array();
        for (const auto& d : c.schedules.mu) sj["mu"].push_back(descriptor_to_json(d));
    }
    sj["rho"] = descriptor_to_json(c.schedules.rho);
    if (beta_uniform)
        sj["beta"] = c.schedules.beta.front();
    else
        sj["beta"] = c.schedules.beta;
    if (b_uniform)
        sj["noise_b"] = descriptor_to_json(c.schedules.noise_b.front());
    else {
        sj["noise_b"] = json::array();
        for (const auto& d : c.schedules.noise_b) sj["noise_b"].push_back(descriptor_to_json(d));
    }
    j["schedules"] = sj;
    j["seeds"] = c.seeds;
    j["horizon"] = c.horizon;
    j["noise"] = c.zero_noise ? "zero-noise" : "on";
    j["freeze_actions"] = c.freeze_actions;
    j["override_assumptions"] = c.override_assumptions;
    j["convention"] = convention_name(c.convention);
    j["m3"] = c.m3;
    j["threshold"] = c.threshold;
    j["q0"] = c.q0;
    j["out"] = c.out_dir;
    return j.dump(2);
}

void write_config_file(const RunConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write config file: " + path);
    out << write_config(c) << "\n";
}

}  // namespace dpnes
