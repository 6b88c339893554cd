#include "safectl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace safectl {

Policy nominal_constant(const ControlVector& u, const ControlBox& box) {
    ControlVector clipped = box.clip(u);
    return [clipped](const RobotState&) { return clipped; };
}

Policy nominal_goal_seek(double goal_x, double goal_y, const GoalSeekGains& gains, const Dynamics& dyn,
                         double v_max) {
    const ControlBox box = dyn.control_box();
    const bool second_order = dyn.has_speed_state();
    return [=](const RobotState& x) {
        const double dx = goal_x - x.px;
        const double dy = goal_y - x.py;
        const double dist = std::hypot(dx, dy);
        const double e_theta = (dist > 1e-12) ? wrap_angle(std::atan2(dy, dx) - x.theta) : 0.0;
        ControlVector u(2);
        if (second_order) {
            const double v_des = std::min(v_max, gains.speed * dist);
            u[0] = gains.accel * (v_des - x.v);
        } else {
            u[0] = gains.speed * dist;
        }
        u[1] = gains.heading * e_theta;
        return box.clip(u);
    };
}

namespace {

/// Least-damage control over a coarse grid: argmin of phi at the next state.
ControlVector min_phi_control(const RobotState& x, const Dynamics& dyn, const SafetySpec& spec,
                              double status_dt) {
    const ControlBox& box = dyn.control_box();
    const int res = 41;
    ControlVector best(box.dim(), 0.0);
    double best_phi = std::numeric_limits<double>::infinity();
    std::vector<int> idx(box.dim(), 0);
    const long total = static_cast<long>(std::pow(res, box.dim()));
    for (long lin = 0; lin < total; ++lin) {
        ControlVector u(box.dim());
        long rest = lin;
        for (std::size_t j = 0; j < box.dim(); ++j) {
            u[j] = box.lo[j] + (rest % res) * (box.hi[j] - box.lo[j]) / (res - 1);
            rest /= res;
        }
        const double p = spec.phi_after(dyn.step(x, u, status_dt), status_dt);
        if (p < best_phi) {
            best_phi = p;
            best = std::move(u);
        }
    }
    return best;
}

void run_monitors(EpisodeTrace& trace, long t, const RobotState& x, const RobotState& x_next,
                  const std::vector<Obstacle>& obstacles, const std::vector<Obstacle>& obstacles_next,
                  const EpisodeSetup& setup) {
    if (!setup.eq3) return;

    // Sparse-obstacle assumption: at most one obstacle inside the
    // safety-critical band phi_i >= -delta_phi_max at any step.
    if (setup.ctrigger_enabled && obstacles.size() > 1) {
        int critical = 0;
        for (const Obstacle& o : obstacles) {
            const RelativeKinematics k = relative_kinematics(x, o);
            const double phi_i = setup.params.sigma + std::pow(setup.params.d_min, setup.params.n) -
                                 std::pow(k.d, setup.params.n) - setup.params.k * k.d_dot;
            if (phi_i >= -setup.trigger_props.delta_phi_max) ++critical;
        }
        if (critical > 1 && trace.assumption_flags.size() < 32) {
            trace.assumption_flags.push_back("sparse-obstacle breach at step " + std::to_string(t) + " (" +
                                             std::to_string(critical) + " critical obstacles)");
        }
    }

    // Commanded turn-rate bounds stand in for the obstacle-frame rate; flag
    // steps where the realized rate exceeds them.
    if (setup.w_mag > 0.0 && !obstacles.empty()) {
        const PhiEval e = phi_eval(x, obstacles, setup.params);
        if (e.critical_index >= 0) {
            const double a0 = e.alpha_critical;
            const double a1 = relative_kinematics(x_next, obstacles_next[e.critical_index]).alpha;
            const double rate = std::abs(wrap_angle(a1 - a0)) / setup.world_dt;
            if (rate > setup.w_mag * (1.0 + 1e-9) && trace.assumption_flags.size() < 32) {
                trace.assumption_flags.push_back("alpha-rate " + std::to_string(rate) +
                                                 " exceeded commanded bound at step " + std::to_string(t));
            }
        }
    }
}

}  // namespace

EpisodeTrace run_episode(const EpisodeSetup& setup, const RobotState& start, const Policy& nominal,
                         long steps, std::uint64_t seed) {
    if (setup.dyn == nullptr) throw std::invalid_argument("run_episode: dynamics required");
    if (setup.ctrigger_enabled && !setup.dyn->has_speed_state()) {
        throw std::invalid_argument("run_episode: the convergence trigger requires a speed state");
    }
    setup.issa.validate();
    if (setup.ctrigger_enabled) setup.trigger_props.validate();

    EpisodeTrace trace;
    trace.seed = seed;
    trace.model_id = setup.dyn->name();
    trace.dt = setup.world_dt;

    Rng dir_rng = substream(seed, "directions");
    Rng trig_rng = substream(seed, "trigger");

    RobotState x = start;
    std::vector<Obstacle> obstacles = setup.obstacles;

    for (long t = 0; t < steps; ++t) {
        const Eq3SafetySpec eq3_spec(setup.params, obstacles, setup.mode);
        const SafetySpec& spec = setup.eq3 ? static_cast<const SafetySpec&>(eq3_spec) : *setup.toy_spec;

        TraceStep row;
        row.t = t;
        row.state = x;
        row.phi = spec.phi(x);
        row.phi0 = spec.phi0(x);
        row.u_nominal = nominal(x);

        try {
            const ProjectionResult res =
                safeguard(x, row.u_nominal, *setup.dyn, spec, setup.status_dt, setup.issa, dir_rng);
            row.nominal_status =
                res.phase == ProjectionPhase::PASS_THROUGH ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
            row.phase = res.phase;
            row.u_applied = res.control;
            row.queries = res.queries;

            if (setup.ctrigger_enabled && setup.eq3 && !obstacles.empty()) {
                const PhiEval e = phi_eval(x, obstacles, setup.params);
                StatusOracle oracle(x, *setup.dyn, spec, setup.status_dt);
                bool fired = false;
                const ControlVector filtered = ctrigger(x, row.u_applied, e.alpha_critical, row.phi,
                                                        setup.trigger_props, setup.trigger_cfg, oracle,
                                                        trig_rng, &fired);
                row.trigger_fired = fired;
                row.queries += oracle.queries();
                row.u_applied = filtered;
            }
        } catch (const InfeasibleError& err) {
            if (setup.infeasible_fallback_min_phi) {
                row.nominal_status = SafetyStatus::UNSAFE;
                row.phase = ProjectionPhase::PHASE2;
                row.u_applied = min_phi_control(x, *setup.dyn, spec, setup.status_dt);
                row.queries += 41 * 41;
                if (trace.assumption_flags.empty() ||
                    trace.assumption_flags.back().find("least-damage") == std::string::npos) {
                    trace.assumption_flags.push_back(
                        "least-damage fallback engaged at step " + std::to_string(t) +
                        " (no control satisfies the descent constraint)");
                }
            } else {
                trace.infeasible_at = t;
                trace.infeasible_message = err.what();
                trace.steps.push_back(std::move(row));
                break;
            }
        } catch (const TriggerError& err) {
            trace.infeasible_at = t;
            trace.infeasible_message = err.what();
            trace.steps.push_back(std::move(row));
            break;
        }

        const RobotState x_next = setup.dyn->step(x, row.u_applied, setup.world_dt);
        row.queries += 1;  // the environment advance itself

        std::vector<Obstacle> obstacles_next = obstacles;
        for (Obstacle& o : obstacles_next) o = propagate(o, setup.world_dt);
        run_monitors(trace, t, x, x_next, obstacles, obstacles_next, setup);

        if (row.nominal_status == SafetyStatus::UNSAFE) ++trace.interventions;
        if (row.phi0 > 0.0) ++trace.collisions;
        trace.max_phi0 = std::max(trace.max_phi0, row.phi0);
        trace.steps.push_back(std::move(row));

        x = x_next;
        obstacles = std::move(obstacles_next);
    }
    trace.final_state = x;
    return trace;
}

std::optional<ControlVector> brute_force_project(const ControlVector& u_r, const StatusFn& oracle,
                                                 const ControlBox& box, int resolution) {
    if (resolution < 11) throw std::invalid_argument("brute_force_project: resolution must be >= 11");
    const std::size_t dim = box.dim();
    long total = 1;
    for (std::size_t j = 0; j < dim; ++j) total *= resolution;

    std::optional<ControlVector> best;
    double best_sq = std::numeric_limits<double>::infinity();
    for (long lin = 0; lin < total; ++lin) {
        ControlVector u(dim);
        long rest = lin;
        for (std::size_t j = 0; j < dim; ++j) {
            const long idx = rest % resolution;
            rest /= resolution;
            u[j] = box.lo[j] + idx * (box.hi[j] - box.lo[j]) / (resolution - 1);
        }
        if (oracle(u) != SafetyStatus::SAFE) continue;
        const double sq = sq_dist(u, u_r);
        if (sq < best_sq) {
            best_sq = sq;
            best = std::move(u);
        }
    }
    return best;
}

VerificationReport check_forward_invariance(const EpisodeTrace& trace) {
    VerificationReport rep;
    rep.assumption_flags = trace.assumption_flags;
    std::size_t entry = trace.steps.size();
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        if (trace.steps[i].phi <= 0.0 && trace.steps[i].phi0 <= 0.0) {
            entry = i;
            break;
        }
    }
    if (entry == trace.steps.size()) {
        rep.never_entered = true;
        return rep;  // vacuously invariant
    }
    for (std::size_t i = entry; i < trace.steps.size(); ++i) {
        if (trace.steps[i].phi > 0.0 || trace.steps[i].phi0 > 0.0) {
            rep.forward_invariant = false;
            rep.first_violation_step = trace.steps[i].t;
            return rep;
        }
    }
    return rep;
}

VerificationReport check_finite_time_convergence(const EpisodeTrace& trace, double eta0,
                                                 const TriggerProps& props) {
    props.validate();
    if (!(eta0 > 0.0)) throw std::invalid_argument("convergence check: eta0 must be > 0");
    VerificationReport rep;
    rep.assumption_flags = trace.assumption_flags;
    if (trace.steps.empty()) throw std::invalid_argument("convergence check: empty trace");

    const double phi_start = trace.steps.front().phi;
    if (phi_start <= 0.0) {
        rep.vacuous = true;
        rep.converged = true;
        rep.convergence_step = trace.steps.front().t;
        return rep;
    }
    const double decay_floor = eta0 * std::min(std::sqrt(3.0) / 2.0, props.delta_min / 2.0);
    rep.bound_steps = phi_start / decay_floor * (props.v_max / std::min(-props.a_min, props.a_max) + 1.0);
    for (const TraceStep& s : trace.steps) {
        if (s.phi <= 0.0) {
            rep.converged = true;
            rep.convergence_step = s.t;
            break;
        }
    }
    return rep;
}

ScanResult safe_control_fraction(const RobotState& x, const Dynamics& dyn, const SafetySpec& spec,
                                 double status_dt, int resolution) {
    const ControlBox& box = dyn.control_box();
    if (box.dim() != 2) throw std::invalid_argument("safe_control_fraction: requires a 2D control model");
    if (resolution < 2) throw std::invalid_argument("safe_control_fraction: resolution must be >= 2");

    ScanResult out;
    out.cells.reserve(static_cast<std::size_t>(resolution) * resolution);
    const double phi_now = spec.phi(x);
    long safe = 0;
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            ScanCell cell;
            cell.u0 = box.lo[0] + i * (box.hi[0] - box.lo[0]) / (resolution - 1);
            cell.u1 = box.lo[1] + j * (box.hi[1] - box.lo[1]) / (resolution - 1);
            const ControlVector u = {cell.u0, cell.u1};
            cell.status = safety_status(x, u, dyn, spec, status_dt);
            cell.delta_phi = spec.phi_after(dyn.step(x, u, status_dt), status_dt) - phi_now;
            if (cell.status == SafetyStatus::SAFE) ++safe;
            out.cells.push_back(cell);
        }
    }
    out.safe_fraction = static_cast<double>(safe) / static_cast<double>(out.cells.size());
    return out;
}

std::vector<BenchRow> bench_phase1(const BenchSetup& setup, const std::vector<int>& n_dirs_list, int trials,
                                   std::uint64_t seed) {
    if (setup.dyn == nullptr) throw std::invalid_argument("bench: dynamics required");
    if (trials < 1) throw std::invalid_argument("bench: trials must be >= 1");
    if (setup.obstacles.empty()) throw std::invalid_argument("bench: obstacle set must be nonempty");
    int max_n = 0;
    for (int n : n_dirs_list) {
        if (n < 1) throw std::invalid_argument("bench: every n_dirs must be >= 1");
        max_n = std::max(max_n, n);
    }

    Rng state_rng = substream(seed, "bench-states");
    Rng dir_rng = substream(seed, "bench-directions");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::uniform_int_distribution<std::size_t> pick(0, setup.obstacles.size() - 1);

    const ControlBox& box = setup.dyn->control_box();
    const Eq3SafetySpec spec(setup.params, setup.obstacles, setup.mode);

    std::vector<BenchRow> rows(n_dirs_list.size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r].n_dirs = n_dirs_list[r];

    for (int trial = 0; trial < trials; ++trial) {
        // Rejection-sample an unsafe invocation around a random obstacle.
        RobotState x;
        ControlVector u_r(box.dim());
        bool found = false;
        for (long attempt = 0; attempt < 100000; ++attempt) {
            const Obstacle& o = setup.obstacles[pick(state_rng)];
            const double d = setup.d_lo + unit(state_rng) * (setup.d_hi - setup.d_lo);
            const double los = angle(state_rng);
            x.px = o.cx - d * std::cos(los);
            x.py = o.cy - d * std::sin(los);
            x.theta = wrap_angle(angle(state_rng));
            x.v = setup.dyn->has_speed_state() ? unit(state_rng) : 0.0;
            for (std::size_t j = 0; j < box.dim(); ++j) {
                u_r[j] = box.lo[j] + unit(state_rng) * (box.hi[j] - box.lo[j]);
            }
            if (safety_status(x, u_r, *setup.dyn, spec, setup.status_dt) == SafetyStatus::UNSAFE) {
                found = true;
                break;
            }
        }
        if (!found) throw std::runtime_error("bench: could not sample an unsafe invocation");

        AdamBAConfig cfg = setup.adamba;
        cfg.n_dirs = max_n;
        const auto dirs = sample_directions(cfg, box.dim(), dir_rng);

        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::vector<ControlVector> prefix(dirs.begin(), dirs.begin() + n_dirs_list[r]);
            StatusOracle oracle(x, *setup.dyn, spec, setup.status_dt);
            StatusFn status = [&oracle](const ControlVector& u) { return oracle(u); };
            AdamBAConfig sub = setup.adamba;
            sub.n_dirs = n_dirs_list[r];

            const auto t0 = std::chrono::steady_clock::now();
            const auto pts =
                adamba(sub, box, u_r, prefix, SafetyStatus::UNSAFE, SafetyStatus::SAFE, status);
            const auto t1 = std::chrono::steady_clock::now();

            rows[r].wall_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
            rows[r].mean_candidates += static_cast<double>(pts.size());
            rows[r].mean_queries += static_cast<double>(oracle.queries());
            if (!pts.empty()) rows[r].success_rate += 1.0;
        }
    }
    for (auto& row : rows) {
        row.success_rate /= trials;
        row.mean_candidates /= trials;
        row.mean_queries /= trials;
    }
    return rows;
}

}  // namespace safectl
