#ifndef SAFECTL_SAFETY_INDEX_HPP
#define SAFECTL_SAFETY_INDEX_HPP

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safectl/dynamics.hpp"
#include "safectl/types.hpp"

namespace safectl {

/// Finite stand-in for "no obstacle anywhere": keeps traces totally ordered
/// without infinities in CSV output.
inline constexpr double kEmptyIndexSentinel = -1e18;

enum class SafetyStatus { SAFE, UNSAFE };

inline const char* to_string(SafetyStatus s) { return s == SafetyStatus::SAFE ? "SAFE" : "UNSAFE"; }

enum class IndexMode { Continuous, Discrete };

/// Parameters of the energy-function family
///   phi_i = sigma + d_min^n - d_i^n - k * d_dot_i,   phi = max_i phi_i.
struct SafetyIndexParams {
    double sigma = 0.1;       ///< margin, dimension of d^n
    int n = 1;                ///< distance exponent
    double k = 1.0;           ///< range-rate gain [s]
    double eta0 = 0.0;        ///< decay budget (discrete mode)
    double d_min = 0.5;       ///< clearance: obstacle radius + robot radius + user margin [m]
    double sigma_star = 0.0;  ///< extra boundary margin (discrete mode)

    /// Enforced for run configurations. Diagnostic scans may evaluate phi
    /// with out-of-range parameters (e.g. k = 0) without constructing a run.
    void validate() const;
};

/// Static safety specification phi0 = max_i (d_min - d_i); empty obstacle
/// sets return the sentinel.
double phi0(const RobotState& x, const std::vector<Obstacle>& obstacles, double d_min);

struct PhiEval {
    double value = kEmptyIndexSentinel;
    double alpha_critical = 0.0;  ///< alpha of the argmax obstacle
    int critical_index = -1;      ///< argmax obstacle, -1 when empty
};

/// Safety index phi = max_i phi_i over the obstacle set.
double phi(const RobotState& x, const std::vector<Obstacle>& obstacles, const SafetyIndexParams& params);

/// Same, also reporting which obstacle attains the max and its alpha.
PhiEval phi_eval(const RobotState& x, const std::vector<Obstacle>& obstacles, const SafetyIndexParams& params);

/// Toy-problem index: phi = (r+R)^2 - ((px0-px) sin(theta) - (py0-py) cos(theta))^2,
/// i.e. the squared perpendicular distance from the obstacle center to the
/// heading line must exceed (r+R)^2.
double toy_phi(const RobotState& x, const Obstacle& obs, double robot_radius, double obstacle_radius);

struct RuleCheck {
    bool passed = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  ///< rhs - lhs for <=-type clauses, lhs - rhs for >-type
    std::string note;    ///< set when the check is degenerate (e.g. no braking authority)
};

/// Continuous-time design rule:
///   n (sigma + d_min^n + k v_max)^((n-1)/n) / k  <=  -a_min / v_max.
RuleCheck validate_continuous_rule(const SafetyIndexParams& params, const SystemLimits& limits);

struct DiscreteRuleReport {
    RuleCheck margin_clause;  ///< sigma > -d_dot_star_min * dt
    RuleCheck gain_clause;    ///< (eta0/dt + v_max)/k <= min{-a_min, a_max}
    bool passed = false;
    std::string failing_clause;  ///< empty when passed
};

/// Discrete-time design rule; requires n == 1 (unsupported-exponent error otherwise).
DiscreteRuleReport validate_discrete_rule(const SafetyIndexParams& params, const SystemLimits& limits,
                                          double d_dot_star_min);

/// Discrete-time time-step condition:
///   a_min/2 + v_max/(4 dt) > (a_m + v_max w_m)(-a_min/v_max + w_m) dt.
RuleCheck validate_discrete_assumptions(const SystemLimits& limits);

/// Online decay budget eta = eta0 |cos(alpha)|.
inline double eta_online(double eta0, double alpha) { return eta0 * std::abs(std::cos(alpha)); }

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Smallest k satisfying the continuous rule for fixed (n, sigma, d_min);
/// closed form at n = 1, bisection to relative tolerance 1e-9 otherwise.
/// Throws InfeasibleError when no k below k_cap works.
double synthesize_k(const SystemLimits& limits, int n, double sigma, double d_min, double k_cap = 1e6);

/// Minimum achievable one-step finite-difference range rate
/// (d_{t+1} - d_t)/dt, estimated by sampling random (state, control) pairs
/// through the dynamics, then scaled by a 1.1 safety factor.
double estimate_d_dot_star_min(const Dynamics& dyn, const SystemLimits& limits, double d_lo, double d_hi,
                               int samples, std::uint64_t seed);

/// Everything the one-step safety test needs to know about the index:
/// phi, phi0, the per-state decay budget, and the extra boundary margin.
class SafetySpec {
public:
    virtual ~SafetySpec() = default;
    virtual double phi(const RobotState& x) const = 0;
    virtual double phi0(const RobotState& x) const = 0;
    virtual double eta(const RobotState& x) const = 0;
    virtual double margin() const = 0;
    virtual bool empty() const { return false; }  ///< true when there is nothing to avoid

    /// phi evaluated at the successor state, dt_ahead seconds later. Specs
    /// with moving obstacles propagate them before evaluating.
    virtual double phi_after(const RobotState& x_next, double dt_ahead) const {
        (void)dt_ahead;
        return phi(x_next);
    }
};

/// Eq-3 family over a fixed obstacle set.
class Eq3SafetySpec final : public SafetySpec {
public:
    Eq3SafetySpec(SafetyIndexParams params, std::vector<Obstacle> obstacles, IndexMode mode)
        : params_(params), obstacles_(std::move(obstacles)), mode_(mode) {}

    double phi(const RobotState& x) const override { return safectl::phi(x, obstacles_, params_); }
    double phi0(const RobotState& x) const override { return safectl::phi0(x, obstacles_, params_.d_min); }
    double eta(const RobotState& x) const override;
    double margin() const override { return mode_ == IndexMode::Discrete ? params_.sigma_star : 0.0; }
    bool empty() const override { return obstacles_.empty(); }
    double phi_after(const RobotState& x_next, double dt_ahead) const override;

    const SafetyIndexParams& params() const { return params_; }
    const std::vector<Obstacle>& obstacles() const { return obstacles_; }
    IndexMode mode() const { return mode_; }

private:
    SafetyIndexParams params_;
    std::vector<Obstacle> obstacles_;
    IndexMode mode_;
};

/// Toy-problem index around a single obstacle. Discrete mode decays by
/// eta0 |cos(alpha)| per step; continuous mode realizes the constant-rate
/// decay of the classic safe-set projection, scaled to the (micro) step the
/// status test integrates over.
class ToySafetySpec final : public SafetySpec {
public:
    ToySafetySpec(Obstacle obs, double robot_radius, double eta0, IndexMode mode, double margin = 0.0,
                  double continuous_eta_step = 0.0)
        : obs_(obs),
          robot_radius_(robot_radius),
          eta0_(eta0),
          mode_(mode),
          margin_(margin),
          continuous_eta_step_(continuous_eta_step) {}

    double phi(const RobotState& x) const override { return toy_phi(x, obs_, robot_radius_, obs_.radius); }
    double phi0(const RobotState& x) const override;
    double eta(const RobotState& x) const override;
    double margin() const override { return mode_ == IndexMode::Discrete ? margin_ : 0.0; }

    const Obstacle& obstacle() const { return obs_; }
    double robot_radius() const { return robot_radius_; }

private:
    Obstacle obs_;
    double robot_radius_;
    double eta0_;
    IndexMode mode_;
    double margin_;
    double continuous_eta_step_;
};

/// One-step safety test: u is SAFE iff
///   phi(f(x, u)) <= max{phi(x) - eta(x), 0} - margin.
/// Makes exactly one dynamics query; obstacle motion over the step is
/// accounted for by evaluating phi against the propagated obstacle set when
/// the spec carries moving obstacles.
SafetyStatus safety_status(const RobotState& x, const ControlVector& u, const Dynamics& dyn,
                           const SafetySpec& spec, double status_dt,
                           std::atomic<long>* query_counter = nullptr);

/// Convenience overload matching the Eq-3 surface directly.
SafetyStatus safety_status(const RobotState& x, const ControlVector& u, const Dynamics& dyn,
                           const SafetyIndexParams& params, const std::vector<Obstacle>& obstacles,
                           double margin, double status_dt, IndexMode mode = IndexMode::Discrete);

/// Status oracle over controls at a fixed state, as consumed by the boundary
/// search. Thread-safe given pure dynamics; the query counter is atomic.
class StatusOracle {
public:
    StatusOracle(const RobotState& x, const Dynamics& dyn, const SafetySpec& spec, double status_dt)
        : x_(x), dyn_(&dyn), spec_(&spec), status_dt_(status_dt) {}

    SafetyStatus operator()(const ControlVector& u) const {
        return safety_status(x_, u, *dyn_, *spec_, status_dt_, &queries_);
    }

    long queries() const { return queries_.load(); }
    void reset_queries() { queries_.store(0); }
    const ControlBox& box() const { return dyn_->control_box(); }
    const RobotState& state() const { return x_; }

private:
    RobotState x_;
    const Dynamics* dyn_;
    const SafetySpec* spec_;
    double status_dt_;
    mutable std::atomic<long> queries_{0};
};

}  // namespace safectl

#endif  // SAFECTL_SAFETY_INDEX_HPP
