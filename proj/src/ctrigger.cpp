#include "safectl/ctrigger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace safectl {

namespace {

double linspace_at(double lo, double hi, int count, int i) {
    if (count <= 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * i / (count - 1);
}

}  // namespace

ControlVector ctrigger(const RobotState& x, const ControlVector& u, double alpha, double phi_x,
                       const TriggerProps& props, const CTriggerConfig& cfg, const StatusOracle& oracle,
                       Rng& rng, bool* fired) {
    const double guard = std::min(cfg.cos_cap, props.delta_min / cfg.denom);
    if (std::abs(std::cos(alpha)) >= guard || phi_x <= 0.0) {
        if (fired) *fired = false;
        return u;
    }
    if (fired) *fired = true;

    const ControlBox& box = oracle.box();
    const double a_eff = std::min(-props.a_min, props.a_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const bool slow = x.v < props.v_max / 2.0;
    for (long i = 0; i < cfg.sample_budget; ++i) {
        ControlVector cand(box.dim());
        if (slow) {
            // Build speed: strong acceleration toward the obstacle side that
            // shrinks |cos(alpha)| exposure per the trigger branch.
            if (std::cos(alpha) < 0.0) {
                cand[0] = a_eff / cfg.denom + unit(rng) * (box.hi[0] - a_eff / cfg.denom);
            } else {
                cand[0] = box.lo[0] + unit(rng) * (-a_eff / cfg.denom - box.lo[0]);
            }
            cand[1] = box.lo[1] + unit(rng) * (box.hi[1] - box.lo[1]);
        } else {
            // Force a strong rotation: |w| >= |w_trigger| / denom.
            cand[0] = box.lo[0] + unit(rng) * (box.hi[0] - box.lo[0]);
            const double w_floor = std::abs(props.w_trigger) / cfg.denom;
            const double left = std::max(0.0, -w_floor - box.lo[1]);
            const double right = std::max(0.0, box.hi[1] - w_floor);
            if (left + right <= 0.0) break;  // no admissible rotation interval
            const double t = unit(rng) * (left + right);
            cand[1] = (t < left) ? (box.lo[1] + t) : (w_floor + (t - left));
        }
        if (oracle(cand) == SafetyStatus::SAFE) return cand;
    }
    throw TriggerError("ctrigger: sampling budget exhausted without a safe triggering control");
}

double estimate_w_trigger(const Dynamics& dyn, const SystemLimits& limits, const EstimatorGridSpec& grid) {
    const ControlBox& box = dyn.control_box();
    const double dt = limits.dt;
    const Obstacle obs{grid.d_reference, 0.0, 0.1, 0.0, 0.0};

    double inf_over_v = std::numeric_limits<double>::infinity();
    for (int vi = 0; vi < grid.v_samples; ++vi) {
        RobotState x;
        x.theta = 0.0;
        x.v = dyn.has_speed_state() ? linspace_at(limits.v_max / 2.0, limits.v_max, grid.v_samples, vi) : 0.0;

        double sup_over_u = 0.0;
        for (int i0 = 0; i0 < grid.u_samples_per_dim; ++i0) {
            for (int i1 = 0; i1 < grid.u_samples_per_dim; ++i1) {
                ControlVector u = {linspace_at(box.lo[0], box.hi[0], grid.u_samples_per_dim, i0),
                                   linspace_at(box.lo[1], box.hi[1], grid.u_samples_per_dim, i1)};
                const RobotState xn = dyn.step(x, u, dt);
                const double a0 = relative_kinematics(x, obs).alpha;
                const double a1 = relative_kinematics(xn, obs).alpha;
                sup_over_u = std::max(sup_over_u, std::abs(wrap_angle(a1 - a0)) / dt);
            }
        }
        inf_over_v = std::min(inf_over_v, sup_over_u);
        if (!dyn.has_speed_state()) break;  // no speed slices to scan
    }
    return std::isfinite(inf_over_v) ? inf_over_v : 0.0;
}

DeltaMinResult estimate_delta_min(const Dynamics& dyn, const SystemLimits& limits, double w_trigger,
                                  const EstimatorGridSpec& grid) {
    if (!(w_trigger > 0.0)) throw std::invalid_argument("estimate_delta_min: w_trigger must be > 0");
    const ControlBox& box = dyn.control_box();
    const double dt = limits.dt;
    const double cos_cap = std::sqrt(3.0) / 2.0;

    double best = std::numeric_limits<double>::infinity();
    for (int vi = 0; vi < grid.v_samples; ++vi) {
        const double v = dyn.has_speed_state() ? linspace_at(0.0, limits.v_max, grid.v_samples, vi) : 0.0;
        for (int ai = 0; ai < grid.alpha_samples; ++ai) {
            const double alpha = linspace_at(-M_PI, M_PI, grid.alpha_samples, ai);
            if (std::abs(std::cos(alpha)) > cos_cap) continue;

            RobotState x;
            x.theta = 0.0;
            x.v = v;
            const Obstacle obs{grid.d_reference * std::cos(alpha), grid.d_reference * std::sin(alpha), 0.1,
                               0.0, 0.0};
            for (int i0 = 0; i0 < grid.u_samples_per_dim; ++i0) {
                for (int i1 = 0; i1 < grid.u_samples_per_dim; ++i1) {
                    ControlVector u = {linspace_at(box.lo[0], box.hi[0], grid.u_samples_per_dim, i0),
                                       linspace_at(box.lo[1], box.hi[1], grid.u_samples_per_dim, i1)};
                    const RobotState xn = dyn.step(x, u, dt);
                    const double a1 = relative_kinematics(xn, obs).alpha;
                    const double rate = std::abs(wrap_angle(a1 - alpha)) / dt;
                    if (rate < std::abs(w_trigger) / 2.0) continue;  // outside the strong-rotation region
                    best = std::min(best, std::abs(std::cos(a1) - std::cos(alpha)));
                }
            }
        }
        if (!dyn.has_speed_state()) break;
    }
    if (!std::isfinite(best)) {
        throw std::runtime_error("estimate_delta_min: empty feasible grid region");
    }
    DeltaMinResult r;
    r.value = 0.9 * best;
    r.degenerate = r.value < 1e-4;
    return r;
}

double estimate_delta_phi_max(const Dynamics& dyn, const SystemLimits& limits, const SafetyIndexParams& params,
                              const EstimatorGridSpec& grid, std::uint64_t seed) {
    Rng rng = substream(seed, "delta-phi-max");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    const ControlBox& box = dyn.control_box();

    double worst = 0.0;
    for (int i = 0; i < grid.pair_samples; ++i) {
        RobotState x;
        x.theta = 0.0;
        x.v = dyn.has_speed_state() ? unit(rng) * limits.v_max : 0.0;
        const double d = grid.d_lo + unit(rng) * (grid.d_hi - grid.d_lo);
        const double los = angle(rng);
        const std::vector<Obstacle> obs = {{d * std::cos(los), d * std::sin(los), 0.1, 0.0, 0.0}};

        ControlVector u(box.dim());
        for (std::size_t j = 0; j < box.dim(); ++j) u[j] = box.lo[j] + unit(rng) * (box.hi[j] - box.lo[j]);

        const double before = phi(x, obs, params);
        const RobotState xn = dyn.step(x, u, limits.dt);
        const double after = phi(xn, obs, params);
        worst = std::max(worst, std::abs(after - before));
    }
    return worst * 1.1;
}

}  // namespace safectl
