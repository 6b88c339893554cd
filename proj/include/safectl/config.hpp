#ifndef SAFECTL_CONFIG_HPP
#define SAFECTL_CONFIG_HPP

#include <memory>
#include <optional>
#include <string>

#include "safectl/harness.hpp"

namespace safectl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PolicyConfig {
    std::string type = "constant";  ///< "constant" | "goal_seek"
    ControlVector u = {0.0, 0.0};   ///< constant policy command
    double goal_x = 0.0;
    double goal_y = 0.0;
    GoalSeekGains gains;
};

/// Declarative run description. Unknown keys anywhere in the file are
/// rejected: silent typos in safety parameters are unacceptable here.
struct RunConfig {
    std::string model = "second_order";  ///< "toy" | "second_order"
    SystemLimits limits;
    ControlBox toy_control_box;  ///< toy model only
    std::vector<Obstacle> obstacles;

    std::string mode = "discrete";  ///< "continuous" | "discrete" | "continuous_approx" (toy)
    SafetyIndexParams index;        ///< Eq-3 family (second_order)
    double toy_robot_radius = 0.25;
    double toy_eta0 = 0.004;
    double toy_sigma_star = 0.0;

    IssaConfig issa;
    bool ctrigger_enabled = false;
    CTriggerConfig ctrigger_cfg;

    double sim_dt = 0.1;
    long sim_steps = 100;
    double status_dt = 0.0;  ///< 0 means "same as sim_dt"; the toy
                             ///< continuous-approximation mode defaults to 1e-5

    PolicyConfig policy;
    std::uint64_t seed = 1;
    RobotState start;

    bool is_toy() const { return model == "toy"; }
    bool discrete() const { return mode == "discrete"; }
    double effective_status_dt() const;

    std::unique_ptr<Dynamics> build_dynamics() const;
    std::unique_ptr<SafetySpec> build_spec() const;
    IndexMode index_mode() const { return discrete() ? IndexMode::Discrete : IndexMode::Continuous; }

    /// Structural validation plus the mode-appropriate design-rule checks.
    /// Returns the estimated d_dot_star_min for reporting (second-order
    /// discrete mode only).
    std::optional<double> validate() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg);

/// Built-in toy scenario: robot at the origin heading +x against a static
/// obstacle at (1, 0.2) with equal radii 0.25, which starts unsafe under the
/// toy index; placement is overridable through a config file.
RunConfig default_toy_config(bool continuous_approx);

/// Offline-estimated trigger properties for a config (second-order discrete
/// runs); persisted to the run's metadata sidecar for reproducibility.
TriggerProps estimate_trigger_props(const RunConfig& cfg, const Dynamics& dyn);

std::string sidecar_path(const std::string& trace_path);
void write_sidecar(const std::string& trace_path, const RunConfig& cfg,
                   const std::optional<TriggerProps>& props, const EpisodeTrace& trace);

struct Sidecar {
    RunConfig config;
    std::optional<TriggerProps> props;
};

Sidecar read_sidecar(const std::string& trace_path);

}  // namespace safectl

#endif  // SAFECTL_CONFIG_HPP
