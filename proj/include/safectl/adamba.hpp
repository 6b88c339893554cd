#ifndef SAFECTL_ADAMBA_HPP
#define SAFECTL_ADAMBA_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "safectl/rng.hpp"
#include "safectl/safety_index.hpp"
#include "safectl/types.hpp"

namespace safectl {

/// Boundary search configuration. epsilon and beta0 are in control-space
/// units; n_dirs is the number of probe directions.
struct AdamBAConfig {
    double epsilon = 1e-3;          ///< approximation error bound
    double beta0 = 0.1;             ///< initial outreach step length
    int n_dirs = 10;                ///< probe direction count
    double cov_scale = 1.0;         ///< isotropic scale of the direction-sampling covariance
    int max_outreach_doublings = 60;
    std::uint64_t seed = 0;
    /// Optional per-dimension weights for the bisection termination norm;
    /// empty means the unscaled Euclidean norm.
    std::vector<double> scale_weights;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("adamba: epsilon must be > 0");
        if (!(beta0 > 0.0)) throw std::invalid_argument("adamba: beta0 must be > 0");
        if (n_dirs < 1) throw std::invalid_argument("adamba: n_dirs must be >= 1");
        if (max_outreach_doublings < 1) throw std::invalid_argument("adamba: outreach cap must be >= 1");
    }
};

/// A point emitted by the boundary search: within epsilon of the status-flip
/// locus along its ray, carrying the requested status.
struct BoundaryPoint {
    ControlVector control;
    SafetyStatus status = SafetyStatus::SAFE;
    long queries_used = 0;
    int direction_index = 0;
};

enum class DirectionOutcome { Emitted, ExitedBox, OutreachCapExceeded };

struct AdamBADiagnostics {
    std::vector<DirectionOutcome> outcomes;  ///< one per direction
    long total_queries = 0;
};

using StatusFn = std::function<SafetyStatus(const ControlVector&)>;

/// n_dirs unit directions drawn from an isotropic Gaussian; deterministic
/// under a fixed generator state. Degenerate near-zero draws are redrawn.
std::vector<ControlVector> sample_directions(const AdamBAConfig& config, std::size_t n_u, Rng& rng);

/// Single unit direction aligned with a caller-provided reference vector.
std::vector<ControlVector> reference_direction(const ControlVector& v_ref);

/// Adaptive-momentum boundary approximation. From u_r (whose status must be
/// S), marches each direction outward with exponentially growing steps until
/// the status flips or the control box is exited, then bisects the flip
/// bracket down to epsilon. Emits the bracket end whose status matches
/// s_goal. Directions that exit the box or hit the outreach cap contribute
/// nothing. Output is ordered by direction index.
std::vector<BoundaryPoint> adamba(const AdamBAConfig& config, const ControlBox& box, const ControlVector& u_r,
                                  const std::vector<ControlVector>& directions, SafetyStatus s,
                                  SafetyStatus s_goal, const StatusFn& oracle,
                                  AdamBADiagnostics* diag = nullptr);

/// Same contract, with per-direction searches fanned out across threads.
/// Requires a concurrently callable oracle; the result is identical to the
/// sequential call, in direction-index order.
std::vector<BoundaryPoint> adamba_parallel(const AdamBAConfig& config, const ControlBox& box,
                                           const ControlVector& u_r,
                                           const std::vector<ControlVector>& directions, SafetyStatus s,
                                           SafetyStatus s_goal, const StatusFn& oracle,
                                           AdamBADiagnostics* diag = nullptr);

}  // namespace safectl

#endif  // SAFECTL_ADAMBA_HPP
