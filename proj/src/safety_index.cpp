#include "safectl/safety_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "safectl/rng.hpp"

namespace safectl {

void SafetyIndexParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("index: sigma must be > 0");
    if (n < 1) throw std::invalid_argument("index: n must be a positive integer");
    if (!(k > 0.0)) throw std::invalid_argument("index: k must be > 0");
    if (!(eta0 >= 0.0)) throw std::invalid_argument("index: eta0 must be >= 0");
    if (!(d_min > 0.0)) throw std::invalid_argument("index: d_min must be > 0");
    if (!(sigma_star >= 0.0)) throw std::invalid_argument("index: sigma_star must be >= 0");
    if (sigma_star > 0.0) {
        const double lhs = std::pow(sigma + std::pow(d_min, n), 1.0 / n);
        if (!(lhs > d_min + sigma_star)) {
            throw std::invalid_argument(
                "index: sigma_star too large, need (sigma + d_min^n)^(1/n) > d_min + sigma_star");
        }
    }
}

double phi0(const RobotState& x, const std::vector<Obstacle>& obstacles, double d_min) {
    if (obstacles.empty()) return kEmptyIndexSentinel;
    double best = -std::numeric_limits<double>::infinity();
    for (const Obstacle& o : obstacles) {
        const double d = std::hypot(o.cx - x.px, o.cy - x.py);
        best = std::max(best, d_min - d);
    }
    return best;
}

PhiEval phi_eval(const RobotState& x, const std::vector<Obstacle>& obstacles, const SafetyIndexParams& p) {
    PhiEval e;
    if (obstacles.empty()) return e;
    e.value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const RelativeKinematics k = relative_kinematics(x, obstacles[i]);
        const double v = p.sigma + std::pow(p.d_min, p.n) - std::pow(k.d, p.n) - p.k * k.d_dot;
        if (v > e.value) {
            e.value = v;
            e.alpha_critical = k.alpha;
            e.critical_index = static_cast<int>(i);
        }
    }
    return e;
}

double phi(const RobotState& x, const std::vector<Obstacle>& obstacles, const SafetyIndexParams& p) {
    return phi_eval(x, obstacles, p).value;
}

double toy_phi(const RobotState& x, const Obstacle& obs, double robot_radius, double obstacle_radius) {
    const double perp = (obs.cx - x.px) * std::sin(x.theta) - (obs.cy - x.py) * std::cos(x.theta);
    const double rr = robot_radius + obstacle_radius;
    return rr * rr - perp * perp;
}

RuleCheck validate_continuous_rule(const SafetyIndexParams& p, const SystemLimits& limits) {
    limits.validate();
    RuleCheck c;
    c.rhs = -limits.a_min / limits.v_max;
    if (!(limits.a_min < 0.0)) {
        c.passed = false;
        c.lhs = std::numeric_limits<double>::infinity();
        c.slack = -std::numeric_limits<double>::infinity();
        c.note = "no braking authority: a_min = 0 makes the rule unsatisfiable";
        return c;
    }
    const double base = p.sigma + std::pow(p.d_min, p.n) + p.k * limits.v_max;
    c.lhs = p.n * std::pow(base, (p.n - 1.0) / p.n) / p.k;
    c.slack = c.rhs - c.lhs;
    c.passed = c.lhs <= c.rhs;
    return c;
}

DiscreteRuleReport validate_discrete_rule(const SafetyIndexParams& p, const SystemLimits& limits,
                                          double d_dot_star_min) {
    limits.validate();
    if (p.n != 1) throw std::invalid_argument("discrete rule: unsupported exponent, requires n = 1");

    DiscreteRuleReport r;
    // sigma > -d_dot_star_min * dt
    r.margin_clause.lhs = p.sigma;
    r.margin_clause.rhs = -d_dot_star_min * limits.dt;
    r.margin_clause.slack = r.margin_clause.lhs - r.margin_clause.rhs;
    r.margin_clause.passed = r.margin_clause.lhs > r.margin_clause.rhs;

    // (eta0/dt + v_max)/k <= min{-a_min, a_max}
    r.gain_clause.lhs = (p.eta0 / limits.dt + limits.v_max) / p.k;
    r.gain_clause.rhs = limits.a_eff();
    r.gain_clause.slack = r.gain_clause.rhs - r.gain_clause.lhs;
    r.gain_clause.passed = r.gain_clause.lhs <= r.gain_clause.rhs;

    r.passed = r.margin_clause.passed && r.gain_clause.passed;
    if (!r.margin_clause.passed) {
        r.failing_clause = "margin clause: sigma must exceed -d_dot_star_min * dt";
    } else if (!r.gain_clause.passed) {
        r.failing_clause = "gain clause: k too small for the decay budget and speed bound";
    }
    return r;
}

RuleCheck validate_discrete_assumptions(const SystemLimits& limits) {
    limits.validate();
    RuleCheck c;
    const double a_m = limits.a_mag();
    const double w_m = limits.w_mag();
    c.lhs = limits.a_min / 2.0 + limits.v_max / (4.0 * limits.dt);
    c.rhs = (a_m + limits.v_max * w_m) * (-limits.a_min / limits.v_max + w_m) * limits.dt;
    c.slack = c.lhs - c.rhs;
    c.passed = c.lhs > c.rhs;
    return c;
}

namespace {

double continuous_rule_lhs(const SystemLimits& limits, int n, double sigma, double d_min, double k) {
    const double base = sigma + std::pow(d_min, n) + k * limits.v_max;
    return n * std::pow(base, (n - 1.0) / n) / k;
}

}  // namespace

double synthesize_k(const SystemLimits& limits, int n, double sigma, double d_min, double k_cap) {
    limits.validate();
    if (n < 1) throw std::invalid_argument("synthesize_k: n must be a positive integer");
    if (!(limits.a_min < 0.0)) throw InfeasibleError("synthesize_k: no braking authority (a_min = 0)");

    const double rhs = -limits.a_min / limits.v_max;
    if (n == 1) return limits.v_max / (-limits.a_min);

    // The left-hand side must be strictly decreasing in k for the root to be
    // the smallest feasible gain; verified on a coarse probe before bisecting.
    double prev = continuous_rule_lhs(limits, n, sigma, d_min, 1e-6);
    for (double k : {1e-3, 1.0, 1e3}) {
        const double cur = continuous_rule_lhs(limits, n, sigma, d_min, k);
        if (!(cur < prev)) throw std::logic_error("synthesize_k: rule left-hand side is not decreasing in k");
        prev = cur;
    }

    if (continuous_rule_lhs(limits, n, sigma, d_min, k_cap) > rhs) {
        throw InfeasibleError("synthesize_k: no feasible k below the configured cap");
    }

    double lo = 1e-12;
    double hi = 1.0;
    while (continuous_rule_lhs(limits, n, sigma, d_min, hi) > rhs) {
        hi *= 2.0;
        if (hi > k_cap) {
            hi = k_cap;
            break;
        }
    }
    while ((hi - lo) > 1e-9 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (continuous_rule_lhs(limits, n, sigma, d_min, mid) > rhs) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double estimate_d_dot_star_min(const Dynamics& dyn, const SystemLimits& limits, double d_lo, double d_hi,
                               int samples, std::uint64_t seed) {
    Rng rng = substream(seed, "d-dot-star");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    const ControlBox& box = dyn.control_box();

    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        RobotState x;
        x.theta = 0.0;
        x.v = dyn.has_speed_state() ? unit(rng) * limits.v_max : 0.0;
        const double d = d_lo + unit(rng) * (d_hi - d_lo);
        const double a = angle(rng);
        Obstacle obs{d * std::cos(a), d * std::sin(a), 0.1, 0.0, 0.0};

        ControlVector u(box.dim());
        for (std::size_t j = 0; j < box.dim(); ++j) u[j] = box.lo[j] + unit(rng) * (box.hi[j] - box.lo[j]);

        const RobotState xn = dyn.step(x, u, limits.dt);
        const double dn = std::hypot(obs.cx - xn.px, obs.cy - xn.py);
        worst = std::min(worst, (dn - d) / limits.dt);
    }
    return worst * 1.1;
}

double Eq3SafetySpec::eta(const RobotState& x) const {
    if (mode_ == IndexMode::Continuous || obstacles_.empty()) return 0.0;
    const PhiEval e = phi_eval(x, obstacles_, params_);
    return eta_online(params_.eta0, e.alpha_critical);
}

double Eq3SafetySpec::phi_after(const RobotState& x_next, double dt_ahead) const {
    bool moving = false;
    for (const Obstacle& o : obstacles_) {
        if (o.vx != 0.0 || o.vy != 0.0) {
            moving = true;
            break;
        }
    }
    if (!moving) return phi(x_next);
    std::vector<Obstacle> shifted;
    shifted.reserve(obstacles_.size());
    for (const Obstacle& o : obstacles_) shifted.push_back(propagate(o, dt_ahead));
    return safectl::phi(x_next, shifted, params_);
}

double ToySafetySpec::phi0(const RobotState& x) const {
    const double d = std::hypot(obs_.cx - x.px, obs_.cy - x.py);
    return (robot_radius_ + obs_.radius) - d;
}

double ToySafetySpec::eta(const RobotState& x) const {
    if (mode_ == IndexMode::Continuous) return continuous_eta_step_;
    const double alpha = wrap_angle_hi(std::atan2(obs_.cy - x.py, obs_.cx - x.px) - x.theta);
    return eta_online(eta0_, alpha);
}

SafetyStatus safety_status(const RobotState& x, const ControlVector& u, const Dynamics& dyn,
                           const SafetySpec& spec, double status_dt, std::atomic<long>* query_counter) {
    if (spec.empty()) return SafetyStatus::SAFE;
    const double phi_now = spec.phi(x);
    const double eta = spec.eta(x);
    const RobotState x_next = dyn.step(x, u, status_dt);
    if (query_counter) query_counter->fetch_add(1, std::memory_order_relaxed);
    const double phi_next = spec.phi_after(x_next, status_dt);
    const double threshold = std::max(phi_now - eta, 0.0) - spec.margin();
    return phi_next <= threshold ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
}

SafetyStatus safety_status(const RobotState& x, const ControlVector& u, const Dynamics& dyn,
                           const SafetyIndexParams& params, const std::vector<Obstacle>& obstacles,
                           double margin, double status_dt, IndexMode mode) {
    SafetyIndexParams p = params;
    p.sigma_star = margin;
    Eq3SafetySpec spec(p, obstacles, mode);
    return safety_status(x, u, dyn, spec, status_dt);
}

}  // namespace safectl
