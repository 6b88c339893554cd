#include "safectl/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "safectl/trace_io.hpp"

namespace safectl::cli {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Policy build_policy(const RunConfig& cfg, const Dynamics& dyn) {
    if (cfg.policy.type == "goal_seek") {
        return nominal_goal_seek(cfg.policy.goal_x, cfg.policy.goal_y, cfg.policy.gains, dyn,
                                 cfg.limits.v_max);
    }
    return nominal_constant(cfg.policy.u, dyn.control_box());
}

struct SimResult {
    EpisodeTrace trace;
    std::optional<TriggerProps> props;
};

SimResult simulate_config(const RunConfig& cfg) {
    auto dyn = cfg.build_dynamics();

    EpisodeSetup setup;
    setup.dyn = dyn.get();
    setup.status_dt = cfg.effective_status_dt();
    setup.world_dt = cfg.sim_dt;
    setup.issa = cfg.issa;
    setup.w_mag = cfg.limits.w_mag();

    std::optional<TriggerProps> props;
    std::unique_ptr<SafetySpec> toy_spec;
    if (cfg.is_toy()) {
        setup.eq3 = false;
        toy_spec = cfg.build_spec();
        setup.toy_spec = toy_spec.get();
        setup.infeasible_fallback_min_phi = cfg.mode == "continuous_approx";
    } else {
        setup.eq3 = true;
        setup.params = cfg.index;
        setup.mode = cfg.index_mode();
        setup.obstacles = cfg.obstacles;
        if (cfg.ctrigger_enabled) {
            props = estimate_trigger_props(cfg, *dyn);
            setup.ctrigger_enabled = true;
            setup.trigger_props = *props;
            setup.trigger_cfg = cfg.ctrigger_cfg;
        }
    }

    const Policy nominal = build_policy(cfg, *dyn);
    SimResult r;
    r.trace = run_episode(setup, cfg.start, nominal, cfg.sim_steps, cfg.seed);
    r.props = props;
    return r;
}

void print_summary(const EpisodeTrace& trace, std::ostream& out) {
    std::optional<long> converged;
    for (const TraceStep& s : trace.steps) {
        if (s.phi <= 0.0) {
            converged = s.t;
            break;
        }
    }
    out << "steps: " << trace.steps.size() << "\n";
    out << "interventions: " << trace.interventions << "\n";
    out << "max_phi0: " << fmt(trace.max_phi0) << "\n";
    out << "converged_step: " << (converged ? std::to_string(*converged) : std::string("never")) << "\n";
    for (const std::string& flag : trace.assumption_flags) out << "assumption_flag: " << flag << "\n";
    if (trace.infeasible_at) {
        out << "infeasible_at: " << *trace.infeasible_at << " (" << trace.infeasible_message << ")\n";
    }
}

}  // namespace

int run_synthesize(const std::string& config_path, bool want_k_min, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitParse;
    }

    try {
        if (cfg.is_toy()) {
            out << "toy model: index design rules apply to the distance-based index family only; "
                   "nothing to synthesize\n";
            cfg.validate();
            return kExitOk;
        }
        cfg.limits.validate();
        cfg.index.validate();
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitParse;
    }

    bool feasible = true;
    if (cfg.discrete()) {
        SecondOrderRobot dyn(cfg.limits);
        const double d_lo = std::max(0.25 * cfg.index.d_min, 0.05);
        const double d_dot_star_min =
            estimate_d_dot_star_min(dyn, cfg.limits, d_lo, 4.0 * cfg.index.d_min, 100000, cfg.seed);
        out << "estimated d_dot_star_min: " << fmt(d_dot_star_min) << "\n";
        DiscreteRuleReport rule;
        try {
            rule = validate_discrete_rule(cfg.index, cfg.limits, d_dot_star_min);
        } catch (const std::invalid_argument& e) {
            err << "config error: " << e.what() << "\n";
            return kExitParse;
        }
        out << "margin clause (sigma vs range-rate floor): "
            << (rule.margin_clause.passed ? "pass" : "FAIL") << ", slack " << fmt(rule.margin_clause.slack)
            << "\n";
        out << "gain clause (decay budget vs braking): " << (rule.gain_clause.passed ? "pass" : "FAIL")
            << ", slack " << fmt(rule.gain_clause.slack) << "\n";
        const RuleCheck asm_check = validate_discrete_assumptions(cfg.limits);
        out << "time-step condition: " << (asm_check.passed ? "pass" : "FAIL") << ", slack "
            << fmt(asm_check.slack) << "\n";
        if (!rule.passed) {
            err << "infeasible: " << rule.failing_clause << "\n";
            feasible = false;
        }
        if (!asm_check.passed) {
            err << "infeasible: time-step condition (dt too large for the actuation bounds)\n";
            feasible = false;
        }
    } else {
        const RuleCheck rule = validate_continuous_rule(cfg.index, cfg.limits);
        out << "braking clause: " << (rule.passed ? "pass" : "FAIL") << ", slack " << fmt(rule.slack)
            << (rule.note.empty() ? "" : " [" + rule.note + "]") << "\n";
        if (!rule.passed) {
            err << "infeasible: braking clause (gain k too small for the speed and braking bounds)\n";
            feasible = false;
        }
    }

    if (want_k_min) {
        try {
            const double k_min = synthesize_k(cfg.limits, cfg.index.n, cfg.index.sigma, cfg.index.d_min);
            out << "k_min: " << fmt(k_min) << "\n";
        } catch (const InfeasibleError& e) {
            err << "k_min infeasible: " << e.what() << "\n";
            feasible = false;
        }
    }
    return feasible ? kExitOk : kExitInfeasible;
}

int run_simulate(const std::string& config_path, const std::string& out_path, const SimOverrides& overrides,
                 std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitParse;
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.steps) cfg.sim_steps = *overrides.steps;

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        err << "infeasible config: " << e.what() << "\n";
        return kExitInfeasible;
    }

    const SimResult r = simulate_config(cfg);
    write_trace_csv(out_path, r.trace);
    write_sidecar(out_path, cfg, r.props, r.trace);
    print_summary(r.trace, out);
    return r.trace.infeasible_at ? kExitEpisodeAborted : kExitOk;
}

int run_verify(const std::string& trace_path, const std::string& config_path, std::ostream& out,
               std::ostream& err) {
    EpisodeTrace trace;
    try {
        trace = read_trace_csv(trace_path);
    } catch (const TraceSchemaError& e) {
        err << "trace schema error: " << e.what() << "\n";
        return kExitSchema;
    }

    RunConfig cfg;
    std::optional<TriggerProps> props;
    try {
        cfg = load_config(config_path);
        try {
            const Sidecar side = read_sidecar(trace_path);
            props = side.props;
        } catch (const ConfigError&) {
            // no sidecar next to the trace; convergence props unavailable
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitParse;
    }

    bool ok = true;
    const VerificationReport inv = check_forward_invariance(trace);
    if (inv.never_entered) {
        out << "forward invariance: pass (never-entered)\n";
    } else if (inv.forward_invariant) {
        out << "forward invariance: pass\n";
    } else {
        out << "forward invariance: FAIL at step " << *inv.first_violation_step << "\n";
        ok = false;
    }

    if (cfg.discrete() && cfg.ctrigger_enabled && props) {
        const VerificationReport conv = check_finite_time_convergence(trace, cfg.index.eta0, *props);
        if (conv.vacuous) {
            out << "finite-time convergence: pass (started inside the safe set)\n";
        } else if (conv.converged && *conv.convergence_step <= conv.bound_steps) {
            out << "finite-time convergence: pass (step " << *conv.convergence_step << " <= bound "
                << fmt(conv.bound_steps) << ")\n";
        } else if (!conv.converged && static_cast<double>(trace.steps.size()) < conv.bound_steps) {
            out << "finite-time convergence: inconclusive (trace shorter than bound "
                << fmt(conv.bound_steps) << ")\n";
        } else if (!conv.assumption_flags.empty()) {
            out << "finite-time convergence: bound exceeded with assumption flags (informational)\n";
        } else {
            out << "finite-time convergence: FAIL (bound " << fmt(conv.bound_steps) << ")\n";
            ok = false;
        }
    }
    for (const std::string& flag : trace.assumption_flags) out << "assumption_flag: " << flag << "\n";
    return ok ? kExitOk : kExitViolation;
}

int run_toy(const std::string& mode, const std::string& config_path, const std::string& out_path,
            const SimOverrides& overrides, std::ostream& out, std::ostream& err) {
    const bool continuous = mode == "continuous-approx" || mode == "continuous_approx";
    if (!continuous && mode != "discrete") {
        err << "toy mode must be \"discrete\" or \"continuous-approx\"\n";
        return kExitParse;
    }

    RunConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = load_config(config_path);
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << "\n";
            return kExitParse;
        }
        if (!cfg.is_toy()) {
            err << "toy command requires a toy-model config\n";
            return kExitParse;
        }
        cfg.mode = continuous ? "continuous_approx" : "discrete";
    } else {
        cfg = default_toy_config(continuous);
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.steps) cfg.sim_steps = *overrides.steps;

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        err << "infeasible config: " << e.what() << "\n";
        return kExitInfeasible;
    }

    const SimResult r = simulate_config(cfg);
    if (!out_path.empty()) {
        write_trace_csv(out_path, r.trace);
        write_sidecar(out_path, cfg, r.props, r.trace);
    }

    long increase_while_positive = 0;
    std::optional<long> first_nonpositive;
    long positives_after = 0;
    for (std::size_t i = 0; i + 1 < r.trace.steps.size(); ++i) {
        const double now = r.trace.steps[i].phi;
        const double next = r.trace.steps[i + 1].phi;
        if (now > 0.0 && next > now) ++increase_while_positive;
    }
    for (const TraceStep& s : r.trace.steps) {
        if (!first_nonpositive && s.phi <= 0.0) first_nonpositive = s.t;
        if (first_nonpositive && s.phi > 0.0) ++positives_after;
    }
    out << "mode: " << (continuous ? "continuous-approx" : "discrete") << "\n";
    out << "phi_start: " << fmt(r.trace.steps.empty() ? 0.0 : r.trace.steps.front().phi) << "\n";
    out << "phi_end: " << fmt(r.trace.steps.empty() ? 0.0 : r.trace.steps.back().phi) << "\n";
    out << "first_nonpositive_step: "
        << (first_nonpositive ? std::to_string(*first_nonpositive) : std::string("never")) << "\n";
    out << "phi_increases_while_positive: " << increase_while_positive << "\n";
    out << "positives_after_convergence: " << positives_after << "\n";
    print_summary(r.trace, out);
    return kExitOk;
}

int run_scan(const std::string& config_path, const std::string& state_spec, const std::string& out_path,
             int resolution, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitParse;
    }

    RobotState x = cfg.start;
    if (!state_spec.empty()) {
        std::vector<double> vals;
        std::stringstream ss(state_spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() < 3 || vals.size() > 4) {
            err << "state spec must be px,py,theta[,v]\n";
            return kExitParse;
        }
        x.px = vals[0];
        x.py = vals[1];
        x.theta = vals[2];
        x.v = vals.size() == 4 ? vals[3] : 0.0;
    }

    auto dyn = cfg.build_dynamics();
    if (dyn->control_box().dim() != 2) {
        err << "scan requires a 2D control model\n";
        return kExitBadModel;
    }
    auto spec = cfg.build_spec();
    const ScanResult scan = safe_control_fraction(x, *dyn, *spec, cfg.effective_status_dt(), resolution);

    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        err << "cannot open output file: " << out_path << "\n";
        return kExitParse;
    }
    f << "u1,u2,delta_phi,status\n";
    for (const ScanCell& c : scan.cells) {
        f << fmt(c.u0) << ',' << fmt(c.u1) << ',' << fmt(c.delta_phi) << ',' << to_string(c.status) << "\n";
    }
    out << "safe_fraction: " << fmt(scan.safe_fraction) << "\n";
    return kExitOk;
}

int run_bench(const std::string& config_path, int trials, const std::vector<int>& n_dirs_list,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitParse;
    }
    if (cfg.is_toy()) {
        err << "bench requires the second-order model\n";
        return kExitBadModel;
    }

    SecondOrderRobot dyn(cfg.limits);
    BenchSetup setup;
    setup.dyn = &dyn;
    setup.params = cfg.index;
    setup.mode = cfg.index_mode();
    setup.obstacles = cfg.obstacles;
    setup.status_dt = cfg.effective_status_dt();
    setup.adamba = cfg.issa.adamba;
    setup.d_lo = 0.5 * cfg.index.d_min;
    setup.d_hi = 2.5 * cfg.index.d_min;

    std::vector<BenchRow> rows;
    try {
        rows = bench_phase1(setup, n_dirs_list, trials, cfg.seed);
    } catch (const std::invalid_argument& e) {
        err << "bench error: " << e.what() << "\n";
        return kExitParse;
    }

    std::ostringstream csv;
    csv << "n_dirs,success_rate,mean_candidates,mean_queries,wall_ms\n";
    for (const BenchRow& r : rows) {
        csv << r.n_dirs << ',' << fmt(r.success_rate) << ',' << fmt(r.mean_candidates) << ','
            << fmt(r.mean_queries) << ',' << fmt(r.wall_ms) << "\n";
    }
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) {
            err << "cannot open output file: " << out_path << "\n";
            return kExitParse;
        }
        f << csv.str();
    }
    out << csv.str();
    return kExitOk;
}

}  // namespace safectl::cli
