#ifndef SAFECTL_ISSA_HPP
#define SAFECTL_ISSA_HPP

#include <optional>
#include <string>

#include "safectl/adamba.hpp"
#include "safectl/safety_index.hpp"

namespace safectl {

struct IssaConfig {
    AdamBAConfig adamba;
    int grid_initial_divisions = 3;  ///< per-dimension grid count at the coarsest pass
    int grid_growth = 2;             ///< divisions multiplier per refinement
    int grid_max_refinements = 12;

    void validate() const {
        adamba.validate();
        if (grid_initial_divisions < 2) throw std::invalid_argument("issa: grid_initial_divisions must be >= 2");
        if (grid_growth < 2) throw std::invalid_argument("issa: grid_growth must be >= 2");
        if (grid_max_refinements < 0) throw std::invalid_argument("issa: grid_max_refinements must be >= 0");
    }
};

enum class ProjectionPhase { PASS_THROUGH, PHASE1, PHASE2 };

inline const char* to_string(ProjectionPhase p) {
    switch (p) {
        case ProjectionPhase::PASS_THROUGH: return "PASS_THROUGH";
        case ProjectionPhase::PHASE1: return "PHASE1";
        default: return "PHASE2";
    }
}

struct ProjectionResult {
    ControlVector control;
    double deviation = 0.0;  ///< ||u - u_r||, Euclidean
    ProjectionPhase phase = ProjectionPhase::PASS_THROUGH;
    long queries = 0;     ///< dynamics calls spent on this invocation
    int candidates = 0;   ///< boundary points found (phase 1)
};

struct GridAnchorDiagnostics {
    long queries_total = 0;
    long queries_final_refinement = 0;
    int refinements_used = 0;
    int final_divisions = 0;
};

/// First SAFE control under a deterministic centered-grid scan whose
/// resolution grows by grid_growth per refinement. Scan order walks each
/// grid from the box center outward so symmetric safe sets yield the
/// centered anchor. Throws InfeasibleError after the refinement cap.
ControlVector grid_anchor(const StatusFn& oracle, const ControlBox& box, const IssaConfig& config,
                          GridAnchorDiagnostics* diag = nullptr);

/// Two-phase projection of an UNSAFE reference control onto the boundary of
/// the set of safe control. Phase 1 probes n_dirs Gaussian directions and
/// returns the minimum-deviation boundary point; phase 2 falls back to a
/// grid-sampled safe anchor and a directed search along the u_r/anchor
/// segment. The returned control is always SAFE.
ProjectionResult project(const RobotState& x, const ControlVector& u_r, const StatusOracle& oracle,
                         const IssaConfig& config, Rng& direction_rng);

/// Pass-through wrapper: returns u_r untouched when it is already SAFE (or
/// there is nothing to avoid), otherwise projects.
ProjectionResult safeguard(const RobotState& x, const ControlVector& u_r, const Dynamics& dyn,
                           const SafetySpec& spec, double status_dt, const IssaConfig& config,
                           Rng& direction_rng);

}  // namespace safectl

#endif  // SAFECTL_ISSA_HPP
