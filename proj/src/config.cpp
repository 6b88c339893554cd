#include "safectl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace safectl {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
        }
    }
}

double require_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing key \"" + key + "\" in " + where);
    if (!obj[key].is_number()) throw ConfigError("key \"" + key + "\" in " + where + " must be a number");
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return obj[key].get<double>();
}

}  // namespace

double RunConfig::effective_status_dt() const {
    if (status_dt > 0.0) return status_dt;
    if (is_toy() && mode == "continuous_approx") return 1e-5;
    return sim_dt;
}

std::unique_ptr<Dynamics> RunConfig::build_dynamics() const {
    if (is_toy()) return std::make_unique<ToyUnicycle>(toy_control_box);
    return std::make_unique<SecondOrderRobot>(limits);
}

std::unique_ptr<SafetySpec> RunConfig::build_spec() const {
    if (is_toy()) {
        if (obstacles.size() != 1) throw ConfigError("toy model requires exactly one obstacle");
        const IndexMode m = discrete() ? IndexMode::Discrete : IndexMode::Continuous;
        // In the continuous approximation eta0 is a decay rate (index units
        // per second); the status test integrates it over its micro-step.
        const double eta_step = discrete() ? 0.0 : toy_eta0 * effective_status_dt();
        return std::make_unique<ToySafetySpec>(obstacles[0], toy_robot_radius, toy_eta0, m, toy_sigma_star,
                                               eta_step);
    }
    return std::make_unique<Eq3SafetySpec>(index, obstacles, index_mode());
}

std::optional<double> RunConfig::validate() const {
    if (model != "toy" && model != "second_order") {
        throw ConfigError("model must be \"toy\" or \"second_order\"");
    }
    for (const Obstacle& o : obstacles) {
        if (!(o.radius > 0.0)) throw ConfigError("obstacle radius must be > 0");
    }
    if (!(sim_dt > 0.0)) throw ConfigError("sim.dt must be > 0");
    if (sim_steps < 0) throw ConfigError("sim.steps must be >= 0");
    issa.validate();

    if (is_toy()) {
        if (mode != "discrete" && mode != "continuous_approx") {
            throw ConfigError("toy mode must be \"discrete\" or \"continuous_approx\"");
        }
        if (toy_control_box.dim() != 2) throw ConfigError("toy control box must be 2D");
        if (!(toy_robot_radius > 0.0)) throw ConfigError("toy robot radius must be > 0");
        if (ctrigger_enabled) {
            throw ConfigError("the convergence trigger requires the second-order model (no speed state)");
        }
        return std::nullopt;
    }

    if (mode != "discrete" && mode != "continuous") {
        throw ConfigError("mode must be \"continuous\" or \"discrete\" for the second-order model");
    }
    limits.validate();
    if (std::abs(sim_dt - limits.dt) > 1e-15) {
        throw ConfigError("sim.dt must match limits.dt (single time-step source)");
    }
    index.validate();

    if (discrete()) {
        if (index.n != 1) throw ConfigError("discrete mode requires index n = 1");
        SecondOrderRobot dyn(limits);
        const double d_lo = std::max(0.25 * index.d_min, 0.05);
        const double d_dot_star_min =
            estimate_d_dot_star_min(dyn, limits, d_lo, 4.0 * index.d_min, 100000, seed);
        const DiscreteRuleReport rule = validate_discrete_rule(index, limits, d_dot_star_min);
        if (!rule.passed) throw ConfigError("discrete design rule failed: " + rule.failing_clause);
        const RuleCheck asm_check = validate_discrete_assumptions(limits);
        if (!asm_check.passed) {
            throw ConfigError("discrete time-step condition failed: dt too large for the actuation bounds");
        }
        return d_dot_star_min;
    }

    const RuleCheck rule = validate_continuous_rule(index, limits);
    if (!rule.passed) {
        throw ConfigError("continuous design rule failed: braking clause violated" +
                          (rule.note.empty() ? "" : " (" + rule.note + ")"));
    }
    if (ctrigger_enabled) throw ConfigError("the convergence trigger requires discrete mode");
    return std::nullopt;
}

namespace {

SystemLimits parse_limits(const json& j) {
    reject_unknown_keys(j, "limits", {"v_max", "a_min", "a_max", "w_min", "w_max", "dt"});
    SystemLimits l;
    l.v_max = require_number(j, "limits", "v_max");
    l.a_min = number_or(j, "a_min", 0.0);
    l.a_max = number_or(j, "a_max", 0.0);
    l.w_min = require_number(j, "limits", "w_min");
    l.w_max = require_number(j, "limits", "w_max");
    l.dt = require_number(j, "limits", "dt");
    return l;
}

std::vector<Obstacle> parse_obstacles(const json& j) {
    if (!j.is_array()) throw ConfigError("obstacles must be an array");
    std::vector<Obstacle> out;
    for (const auto& o : j) {
        reject_unknown_keys(o, "obstacles[]", {"cx", "cy", "radius", "vx", "vy"});
        Obstacle ob;
        ob.cx = require_number(o, "obstacle", "cx");
        ob.cy = require_number(o, "obstacle", "cy");
        ob.radius = require_number(o, "obstacle", "radius");
        ob.vx = number_or(o, "vx", 0.0);
        ob.vy = number_or(o, "vy", 0.0);
        out.push_back(ob);
    }
    return out;
}

ControlBox parse_box(const json& j) {
    if (!j.is_array()) throw ConfigError("control_box must be an array of [lo, hi] pairs");
    ControlBox box;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) throw ConfigError("control_box entries must be [lo, hi]");
        const double lo = pair[0].get<double>();
        const double hi = pair[1].get<double>();
        if (!(lo < hi)) throw ConfigError("control_box entries must satisfy lo < hi");
        box.lo.push_back(lo);
        box.hi.push_back(hi);
    }
    return box;
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    reject_unknown_keys(j, "config root",
                        {"model", "limits", "control_box", "obstacles", "index", "issa", "ctrigger", "sim",
                         "policy", "seed", "start", "status_dt"});

    RunConfig cfg;
    if (j.contains("model")) cfg.model = j["model"].get<std::string>();

    if (j.contains("limits")) cfg.limits = parse_limits(j["limits"]);
    if (j.contains("control_box")) {
        if (cfg.model != "toy") throw ConfigError("control_box is only accepted for the toy model");
        cfg.toy_control_box = parse_box(j["control_box"]);
    }
    if (j.contains("obstacles")) cfg.obstacles = parse_obstacles(j["obstacles"]);

    if (j.contains("index")) {
        const json& idx = j["index"];
        if (cfg.model == "toy") {
            reject_unknown_keys(idx, "index", {"mode", "robot_radius", "eta0", "sigma_star"});
            if (idx.contains("mode")) cfg.mode = idx["mode"].get<std::string>();
            cfg.toy_robot_radius = number_or(idx, "robot_radius", cfg.toy_robot_radius);
            cfg.toy_eta0 = number_or(idx, "eta0", cfg.toy_eta0);
            cfg.toy_sigma_star = number_or(idx, "sigma_star", cfg.toy_sigma_star);
        } else {
            reject_unknown_keys(idx, "index", {"mode", "sigma", "n", "k", "eta0", "d_min", "sigma_star"});
            if (idx.contains("mode")) cfg.mode = idx["mode"].get<std::string>();
            cfg.index.sigma = require_number(idx, "index", "sigma");
            cfg.index.n = idx.contains("n") ? idx["n"].get<int>() : 1;
            cfg.index.k = require_number(idx, "index", "k");
            cfg.index.eta0 = number_or(idx, "eta0", 0.0);
            cfg.index.d_min = require_number(idx, "index", "d_min");
            cfg.index.sigma_star = number_or(idx, "sigma_star", 0.0);
        }
    }

    if (j.contains("issa")) {
        const json& is = j["issa"];
        reject_unknown_keys(is, "issa",
                            {"adamba", "grid_initial_divisions", "grid_growth", "grid_max_refinements"});
        if (is.contains("adamba")) {
            const json& ab = is["adamba"];
            reject_unknown_keys(
                ab, "issa.adamba",
                {"epsilon", "beta0", "n_dirs", "cov_scale", "max_outreach_doublings", "scale_weights"});
            cfg.issa.adamba.epsilon = number_or(ab, "epsilon", cfg.issa.adamba.epsilon);
            cfg.issa.adamba.beta0 = number_or(ab, "beta0", cfg.issa.adamba.beta0);
            if (ab.contains("n_dirs")) cfg.issa.adamba.n_dirs = ab["n_dirs"].get<int>();
            cfg.issa.adamba.cov_scale = number_or(ab, "cov_scale", cfg.issa.adamba.cov_scale);
            if (ab.contains("max_outreach_doublings")) {
                cfg.issa.adamba.max_outreach_doublings = ab["max_outreach_doublings"].get<int>();
            }
            if (ab.contains("scale_weights")) {
                cfg.issa.adamba.scale_weights = ab["scale_weights"].get<std::vector<double>>();
            }
        }
        if (is.contains("grid_initial_divisions")) {
            cfg.issa.grid_initial_divisions = is["grid_initial_divisions"].get<int>();
        }
        if (is.contains("grid_growth")) cfg.issa.grid_growth = is["grid_growth"].get<int>();
        if (is.contains("grid_max_refinements")) {
            cfg.issa.grid_max_refinements = is["grid_max_refinements"].get<int>();
        }
    }

    if (j.contains("ctrigger")) {
        const json& ct = j["ctrigger"];
        reject_unknown_keys(ct, "ctrigger", {"enabled", "cos_cap", "denom", "sample_budget"});
        if (ct.contains("enabled")) cfg.ctrigger_enabled = ct["enabled"].get<bool>();
        cfg.ctrigger_cfg.cos_cap = number_or(ct, "cos_cap", cfg.ctrigger_cfg.cos_cap);
        cfg.ctrigger_cfg.denom = number_or(ct, "denom", cfg.ctrigger_cfg.denom);
        if (ct.contains("sample_budget")) cfg.ctrigger_cfg.sample_budget = ct["sample_budget"].get<long>();
    }

    if (j.contains("sim")) {
        const json& sim = j["sim"];
        reject_unknown_keys(sim, "sim", {"dt", "steps"});
        cfg.sim_dt = require_number(sim, "sim", "dt");
        if (sim.contains("steps")) cfg.sim_steps = sim["steps"].get<long>();
    } else {
        cfg.sim_dt = cfg.limits.dt;
    }

    if (j.contains("policy")) {
        const json& p = j["policy"];
        reject_unknown_keys(p, "policy", {"type", "u", "goal", "gains"});
        cfg.policy.type = p.contains("type") ? p["type"].get<std::string>() : "constant";
        if (cfg.policy.type == "constant") {
            if (p.contains("u")) cfg.policy.u = p["u"].get<std::vector<double>>();
        } else if (cfg.policy.type == "goal_seek") {
            if (!p.contains("goal") || !p["goal"].is_array() || p["goal"].size() != 2) {
                throw ConfigError("goal_seek policy requires goal: [x, y]");
            }
            cfg.policy.goal_x = p["goal"][0].get<double>();
            cfg.policy.goal_y = p["goal"][1].get<double>();
            if (p.contains("gains")) {
                const json& g = p["gains"];
                reject_unknown_keys(g, "policy.gains", {"speed", "accel", "heading"});
                cfg.policy.gains.speed = number_or(g, "speed", cfg.policy.gains.speed);
                cfg.policy.gains.accel = number_or(g, "accel", cfg.policy.gains.accel);
                cfg.policy.gains.heading = number_or(g, "heading", cfg.policy.gains.heading);
            }
        } else {
            throw ConfigError("policy type must be \"constant\" or \"goal_seek\"");
        }
    }

    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("status_dt")) cfg.status_dt = j["status_dt"].get<double>();

    if (j.contains("start")) {
        const json& s = j["start"];
        reject_unknown_keys(s, "start", {"px", "py", "theta", "v"});
        cfg.start.px = number_or(s, "px", 0.0);
        cfg.start.py = number_or(s, "py", 0.0);
        cfg.start.theta = number_or(s, "theta", 0.0);
        cfg.start.v = number_or(s, "v", 0.0);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["model"] = cfg.model;
    j["limits"] = {{"v_max", cfg.limits.v_max}, {"a_min", cfg.limits.a_min}, {"a_max", cfg.limits.a_max},
                   {"w_min", cfg.limits.w_min}, {"w_max", cfg.limits.w_max}, {"dt", cfg.limits.dt}};
    if (cfg.is_toy()) {
        json box = json::array();
        for (std::size_t i = 0; i < cfg.toy_control_box.dim(); ++i) {
            box.push_back({cfg.toy_control_box.lo[i], cfg.toy_control_box.hi[i]});
        }
        j["control_box"] = box;
        j["index"] = {{"mode", cfg.mode},
                      {"robot_radius", cfg.toy_robot_radius},
                      {"eta0", cfg.toy_eta0},
                      {"sigma_star", cfg.toy_sigma_star}};
    } else {
        j["index"] = {{"mode", cfg.mode},   {"sigma", cfg.index.sigma},
                      {"n", cfg.index.n},   {"k", cfg.index.k},
                      {"eta0", cfg.index.eta0}, {"d_min", cfg.index.d_min},
                      {"sigma_star", cfg.index.sigma_star}};
    }
    json obstacles = json::array();
    for (const Obstacle& o : cfg.obstacles) {
        obstacles.push_back(
            {{"cx", o.cx}, {"cy", o.cy}, {"radius", o.radius}, {"vx", o.vx}, {"vy", o.vy}});
    }
    j["obstacles"] = obstacles;
    j["issa"] = {{"adamba",
                  {{"epsilon", cfg.issa.adamba.epsilon},
                   {"beta0", cfg.issa.adamba.beta0},
                   {"n_dirs", cfg.issa.adamba.n_dirs},
                   {"cov_scale", cfg.issa.adamba.cov_scale},
                   {"max_outreach_doublings", cfg.issa.adamba.max_outreach_doublings}}},
                 {"grid_initial_divisions", cfg.issa.grid_initial_divisions},
                 {"grid_growth", cfg.issa.grid_growth},
                 {"grid_max_refinements", cfg.issa.grid_max_refinements}};
    if (!cfg.issa.adamba.scale_weights.empty()) {
        j["issa"]["adamba"]["scale_weights"] = cfg.issa.adamba.scale_weights;
    }
    j["ctrigger"] = {{"enabled", cfg.ctrigger_enabled},
                     {"cos_cap", cfg.ctrigger_cfg.cos_cap},
                     {"denom", cfg.ctrigger_cfg.denom},
                     {"sample_budget", cfg.ctrigger_cfg.sample_budget}};
    j["sim"] = {{"dt", cfg.sim_dt}, {"steps", cfg.sim_steps}};
    if (cfg.policy.type == "constant") {
        j["policy"] = {{"type", "constant"}, {"u", cfg.policy.u}};
    } else {
        j["policy"] = {{"type", "goal_seek"},
                       {"goal", {cfg.policy.goal_x, cfg.policy.goal_y}},
                       {"gains",
                        {{"speed", cfg.policy.gains.speed},
                         {"accel", cfg.policy.gains.accel},
                         {"heading", cfg.policy.gains.heading}}}};
    }
    j["seed"] = cfg.seed;
    if (cfg.status_dt > 0.0) j["status_dt"] = cfg.status_dt;
    j["start"] = {{"px", cfg.start.px}, {"py", cfg.start.py}, {"theta", cfg.start.theta}, {"v", cfg.start.v}};
    return j.dump(2);
}

RunConfig default_toy_config(bool continuous_approx) {
    RunConfig cfg;
    cfg.model = "toy";
    cfg.mode = continuous_approx ? "continuous_approx" : "discrete";
    cfg.toy_control_box.lo = {0.0, -2.0};
    cfg.toy_control_box.hi = {2.0, 2.0};
    cfg.limits.v_max = 2.0;
    cfg.limits.w_min = -2.0;
    cfg.limits.w_max = 2.0;
    cfg.limits.a_min = 0.0;
    cfg.limits.a_max = 0.0;
    cfg.limits.dt = 0.01;
    cfg.obstacles = {{1.0, 0.2, 0.25, 0.0, 0.0}};
    cfg.toy_robot_radius = 0.25;
    // Per-step decay budget in discrete mode; decay rate (index per second)
    // in the continuous approximation.
    cfg.toy_eta0 = continuous_approx ? 0.2 : 0.006;
    cfg.toy_sigma_star = 0.0;
    cfg.sim_dt = 0.01;
    cfg.sim_steps = 100;
    cfg.policy.type = "constant";
    cfg.policy.u = {1.5, 0.0};
    cfg.issa.adamba.epsilon = 1e-4;
    cfg.issa.adamba.beta0 = 0.2;
    cfg.issa.adamba.n_dirs = 10;
    // The comparison mode hits genuinely infeasible steps near tangency;
    // give up on the anchor scan early there so the least-damage fallback
    // engages without an expensive deep refinement pass.
    if (continuous_approx) cfg.issa.grid_max_refinements = 5;
    cfg.seed = 1;
    cfg.start = RobotState{0.0, 0.0, 0.0, 0.0};
    return cfg;
}

TriggerProps estimate_trigger_props(const RunConfig& cfg, const Dynamics& dyn) {
    EstimatorGridSpec grid;
    grid.d_reference = 2.0 * cfg.index.d_min;
    grid.d_lo = std::max(0.25 * cfg.index.d_min, 0.05);
    grid.d_hi = 4.0 * cfg.index.d_min;

    TriggerProps props;
    props.a_min = cfg.limits.a_min;
    props.a_max = cfg.limits.a_max;
    props.v_max = cfg.limits.v_max;
    props.w_trigger = estimate_w_trigger(dyn, cfg.limits, grid);
    if (props.w_trigger > 0.0) {
        props.delta_min = estimate_delta_min(dyn, cfg.limits, props.w_trigger, grid).value;
    }
    props.delta_phi_max = estimate_delta_phi_max(dyn, cfg.limits, cfg.index, grid, cfg.seed);
    return props;
}

std::string sidecar_path(const std::string& trace_path) {
    std::string base = trace_path;
    if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") base = base.substr(0, base.size() - 4);
    return base + ".meta.json";
}

void write_sidecar(const std::string& trace_path, const RunConfig& cfg,
                   const std::optional<TriggerProps>& props, const EpisodeTrace& trace) {
    json j;
    j["config"] = json::parse(config_to_json(cfg));
    j["model"] = cfg.model;
    j["seed"] = cfg.seed;
    if (props) {
        j["trigger_props"] = {{"w_trigger", props->w_trigger},   {"delta_min", props->delta_min},
                              {"delta_phi_max", props->delta_phi_max}, {"a_min", props->a_min},
                              {"a_max", props->a_max},           {"v_max", props->v_max}};
    } else {
        j["trigger_props"] = nullptr;
    }
    j["summary"] = {{"steps", trace.steps.size()},
                    {"interventions", trace.interventions},
                    {"collisions", trace.collisions},
                    {"max_phi0", trace.max_phi0},
                    {"infeasible_at", trace.infeasible_at ? json(*trace.infeasible_at) : json(nullptr)},
                    {"assumption_flags", trace.assumption_flags}};
    std::ofstream f(sidecar_path(trace_path), std::ios::binary);
    if (!f) throw std::runtime_error("cannot open sidecar for writing");
    f << j.dump(2) << "\n";
}

Sidecar read_sidecar(const std::string& trace_path) {
    std::ifstream f(sidecar_path(trace_path));
    if (!f) throw ConfigError("cannot open sidecar: " + sidecar_path(trace_path));
    json j = json::parse(f);
    Sidecar s{parse_config_json(j["config"].dump()), std::nullopt};
    if (j.contains("trigger_props") && !j["trigger_props"].is_null()) {
        const json& p = j["trigger_props"];
        TriggerProps props;
        props.w_trigger = p["w_trigger"].get<double>();
        props.delta_min = p["delta_min"].get<double>();
        props.delta_phi_max = p["delta_phi_max"].get<double>();
        props.a_min = p["a_min"].get<double>();
        props.a_max = p["a_max"].get<double>();
        props.v_max = p["v_max"].get<double>();
        s.props = props;
    }
    return s;
}

}  // namespace safectl
