#ifndef SAFECTL_HARNESS_HPP
#define SAFECTL_HARNESS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "safectl/ctrigger.hpp"
#include "safectl/issa.hpp"
#include "safectl/safety_index.hpp"

namespace safectl {

/// Pure state -> control map, already clipped to the control box.
using Policy = std::function<ControlVector(const RobotState&)>;

Policy nominal_constant(const ControlVector& u, const ControlBox& box);

struct GoalSeekGains {
    double speed = 1.0;    ///< distance -> desired speed (or commanded speed for the toy)
    double accel = 2.0;    ///< speed error -> acceleration (second-order only)
    double heading = 2.0;  ///< heading error -> turn rate
};

/// Proportional goal seeking on heading error and distance, clipped to the
/// box. For the toy model the first control component is the commanded
/// speed; for the second-order model it is the acceleration toward the
/// distance-scheduled desired speed.
Policy nominal_goal_seek(double goal_x, double goal_y, const GoalSeekGains& gains, const Dynamics& dyn,
                         double v_max);

struct TraceStep {
    long t = 0;
    RobotState state;             ///< state at the start of the step
    ControlVector u_nominal;
    ControlVector u_applied;
    double phi = 0.0;             ///< phi(state)
    double phi0 = 0.0;            ///< phi0(state)
    SafetyStatus nominal_status = SafetyStatus::SAFE;
    ProjectionPhase phase = ProjectionPhase::PASS_THROUGH;
    bool trigger_fired = false;
    long queries = 0;             ///< dynamics calls spent deciding this step
};

struct EpisodeTrace {
    std::vector<TraceStep> steps;
    RobotState final_state;
    std::uint64_t seed = 0;
    std::string model_id;
    double dt = 0.0;
    long interventions = 0;
    long collisions = 0;                        ///< steps with phi0 > 0
    double max_phi0 = -1e18;
    std::optional<long> infeasible_at;          ///< step at which projection failed, if any
    std::string infeasible_message;
    std::vector<std::string> assumption_flags;  ///< monitor findings (informational)
};

struct EpisodeSetup {
    const Dynamics* dyn = nullptr;
    double status_dt = 0.0;  ///< dt used inside safety_status (micro-step in
                             ///< continuous-approximation mode)
    double world_dt = 0.0;   ///< dt used to advance the environment
    IssaConfig issa;
    bool ctrigger_enabled = false;
    TriggerProps trigger_props;
    CTriggerConfig trigger_cfg;

    /// Eq-3 runs: the safety spec is rebuilt each step against the current
    /// obstacle positions.
    bool eq3 = true;
    SafetyIndexParams params;
    IndexMode mode = IndexMode::Discrete;
    std::vector<Obstacle> obstacles;  ///< initial positions; moving obstacles advance each step

    /// Toy runs: a fixed spec over a static obstacle.
    const SafetySpec* toy_spec = nullptr;

    double w_mag = 0.0;  ///< commanded turn-rate bound, for the alpha-rate monitor

    /// Continuous-approximation comparison only: when the projection proves
    /// infeasible (the continuous-time reasoning breaks on the discrete
    /// system), apply the least-damage control (argmin next-step phi over a
    /// coarse grid) instead of aborting, so the failure shows up in the
    /// trace rather than as an error. The real discrete-mode safeguard keeps
    /// aborting: there infeasibility means broken assumptions.
    bool infeasible_fallback_min_phi = false;
};

/// Runs one safeguarded episode: per step the nominal policy proposes a
/// control, the safeguard projects it when unsafe, the trigger optionally
/// filters it, and the environment advances. Deterministic under a fixed
/// seed. Projection infeasibility ends the episode with the partial trace
/// flushed and the offending step recorded.
EpisodeTrace run_episode(const EpisodeSetup& setup, const RobotState& start, const Policy& nominal,
                         long steps, std::uint64_t seed);

/// Exhaustive grid reference for the projection: the SAFE grid control of
/// minimum deviation from u_r, or nothing when the whole grid is UNSAFE.
std::optional<ControlVector> brute_force_project(const ControlVector& u_r, const StatusFn& oracle,
                                                 const ControlBox& box, int resolution);

struct VerificationReport {
    bool forward_invariant = true;
    std::optional<long> first_violation_step;
    bool never_entered = false;      ///< trace never reached the invariant set
    bool converged = false;
    std::optional<long> convergence_step;
    double bound_steps = 0.0;        ///< finite-time bound computed from the trace-initial phi
    bool vacuous = false;            ///< convergence check with phi(x0) <= 0
    std::vector<std::string> assumption_flags;
};

/// From the first step where both phi <= 0 and phi0 <= 0, asserts both stay
/// nonpositive for the rest of the trace.
VerificationReport check_forward_invariance(const EpisodeTrace& trace);

/// Computes the finite-time bound
///   phi(x0) / (eta0 min{sqrt(3)/2, delta_min/2}) * (v_max / min{-a_min, a_max} + 1)
/// and asserts the first phi <= 0 step falls within it.
VerificationReport check_finite_time_convergence(const EpisodeTrace& trace, double eta0,
                                                 const TriggerProps& props);

struct ScanCell {
    double u0 = 0.0;
    double u1 = 0.0;
    double delta_phi = 0.0;  ///< phi(f(x, u)) - phi(x)
    SafetyStatus status = SafetyStatus::UNSAFE;
};

struct ScanResult {
    std::vector<ScanCell> cells;
    double safe_fraction = 0.0;
};

/// Fraction of a resolution^2 control grid that is SAFE at x, along with the
/// full delta-phi grid for plotting. 2D control models only.
ScanResult safe_control_fraction(const RobotState& x, const Dynamics& dyn, const SafetySpec& spec,
                                 double status_dt, int resolution);

struct BenchRow {
    int n_dirs = 0;
    double success_rate = 0.0;
    double mean_candidates = 0.0;
    double mean_queries = 0.0;
    double wall_ms = 0.0;
};

struct BenchSetup {
    const Dynamics* dyn = nullptr;
    SafetyIndexParams params;
    IndexMode mode = IndexMode::Continuous;
    std::vector<Obstacle> obstacles;
    double status_dt = 0.0;
    AdamBAConfig adamba;
    double d_lo = 0.5;  ///< start-state sampling band
    double d_hi = 2.0;
};

/// Phase-1 success benchmark over randomly sampled unsafe (state, control)
/// invocations. Directions are drawn once per trial and shared as prefixes
/// across the n_dirs values, so the success sets are nested and the rates
/// comparable on the same sample.
std::vector<BenchRow> bench_phase1(const BenchSetup& setup, const std::vector<int>& n_dirs_list, int trials,
                                   std::uint64_t seed);

}  // namespace safectl

#endif  // SAFECTL_HARNESS_HPP
