#ifndef SAFECTL_CTRIGGER_HPP
#define SAFECTL_CTRIGGER_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "safectl/rng.hpp"
#include "safectl/safety_index.hpp"

namespace safectl {

/// System properties consumed by the convergence trigger, all measurable
/// offline through the black-box dynamics.
struct TriggerProps {
    double w_trigger = 0.0;      ///< inf over fast states of the max achievable |alpha-rate| [rad/s]
    double delta_min = 0.0;      ///< min one-step |delta cos(alpha)| under strong rotation
    double delta_phi_max = 0.0;  ///< max one-step |delta phi|
    double a_min = -1.0;
    double a_max = 1.0;
    double v_max = 1.0;

    void validate() const {
        if (!(w_trigger > 0.0)) throw std::invalid_argument("ctrigger: w_trigger must be > 0");
        if (!(delta_min > 0.0)) throw std::invalid_argument("ctrigger: delta_min must be > 0");
        if (!(delta_phi_max >= 0.0)) throw std::invalid_argument("ctrigger: delta_phi_max must be >= 0");
    }
};

/// Branch constants of the trigger. The defaults follow the usual choice of
/// sqrt(3)/2 for the angle cap and halving for the actuation floors; exposed
/// for experimentation.
struct CTriggerConfig {
    double cos_cap = 0.8660254037844386;  ///< sqrt(3)/2
    double denom = 2.0;
    long sample_budget = 10000;
};

struct TriggerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Convergence trigger: when the decay budget collapses (|cos(alpha)| small)
/// while still outside the safe set (phi > 0), replaces the projected control
/// with a uniformly sampled SAFE control that either builds speed (slow
/// branch) or forces a strong rotation (fast branch). Otherwise returns u
/// bitwise-unchanged. Throws TriggerError when the sampling budget runs out.
ControlVector ctrigger(const RobotState& x, const ControlVector& u, double alpha, double phi_x,
                       const TriggerProps& props, const CTriggerConfig& cfg, const StatusOracle& oracle,
                       Rng& rng, bool* fired = nullptr);

/// Sampling grid for the offline estimators.
struct EstimatorGridSpec {
    int v_samples = 9;
    int alpha_samples = 25;
    int u_samples_per_dim = 21;
    int pair_samples = 100000;   ///< random (state, control) pairs for the phi estimators
    double d_reference = 1.0;    ///< representative obstacle range [m]
    double d_lo = 0.5;           ///< state-sampling distance band for pair estimators
    double d_hi = 4.0;
};

/// w_trigger: over speed slices v in [v_max/2, v_max] against a head-on
/// obstacle at the reference range, the maximum one-step |alpha| change rate
/// achievable by any control, minimized over the slices. Deterministic for a
/// fixed grid.
double estimate_w_trigger(const Dynamics& dyn, const SystemLimits& limits, const EstimatorGridSpec& grid);

struct DeltaMinResult {
    double value = 0.0;
    bool degenerate = false;  ///< set when the threshold is too small to be useful
};

/// delta_min: minimum one-step |delta cos(alpha)| over sampled states in the
/// band |cos(alpha)| <= sqrt(3)/2 whose realized alpha-rate magnitude is at
/// least w_trigger/2, scaled down by a 0.9 safety factor. Throws when the
/// feasible grid region is empty.
DeltaMinResult estimate_delta_min(const Dynamics& dyn, const SystemLimits& limits, double w_trigger,
                                  const EstimatorGridSpec& grid);

/// delta_phi_max: maximum one-step |delta phi| over random (state, control)
/// pairs, scaled up by a 1.1 safety factor.
double estimate_delta_phi_max(const Dynamics& dyn, const SystemLimits& limits, const SafetyIndexParams& params,
                              const EstimatorGridSpec& grid, std::uint64_t seed);

}  // namespace safectl

#endif  // SAFECTL_CTRIGGER_HPP
