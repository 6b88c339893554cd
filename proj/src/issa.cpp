#include "safectl/issa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace safectl {

namespace {

constexpr long kMaxGridPointsPerPass = 4'000'000;

std::string describe_state(const RobotState& x) {
    std::ostringstream os;
    os << "(px=" << x.px << ", py=" << x.py << ", theta=" << x.theta << ", v=" << x.v << ")";
    return os.str();
}

}  // namespace

ControlVector grid_anchor(const StatusFn& oracle, const ControlBox& box, const IssaConfig& config,
                          GridAnchorDiagnostics* diag) {
    config.validate();
    const std::size_t dim = box.dim();

    long divisions = config.grid_initial_divisions;
    for (int r = 0; r <= config.grid_max_refinements; ++r) {
        long count = 1;
        for (std::size_t j = 0; j < dim; ++j) {
            count *= divisions;
            if (count > kMaxGridPointsPerPass) break;
        }
        if (count > kMaxGridPointsPerPass) break;

        // Order grid cells by squared index distance from the grid center,
        // row-major for ties, so the scan spirals outward deterministically.
        std::vector<long> order(count);
        std::iota(order.begin(), order.end(), 0);
        const double center = (divisions - 1) / 2.0;
        auto center_dist = [&](long lin) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double e = static_cast<double>(lin % divisions) - center;
                s += e * e;
                lin /= divisions;
            }
            return s;
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](long a, long b) { return center_dist(a) < center_dist(b); });

        long pass_queries = 0;
        for (long lin : order) {
            ControlVector u(dim);
            long rest = lin;
            for (std::size_t j = 0; j < dim; ++j) {
                const long idx = rest % divisions;
                rest /= divisions;
                u[j] = box.lo[j] + (idx + 0.5) * (box.hi[j] - box.lo[j]) / divisions;
            }
            ++pass_queries;
            if (diag) {
                ++diag->queries_total;
                diag->queries_final_refinement = pass_queries;
                diag->refinements_used = r;
                diag->final_divisions = static_cast<int>(divisions);
            }
            if (oracle(u) == SafetyStatus::SAFE) return u;
        }
        divisions *= config.grid_growth;
    }
    throw InfeasibleError("grid_anchor: no safe control found below the refinement cap");
}

namespace {

ProjectionResult project_impl(const RobotState& x, const ControlVector& u_r, const StatusOracle& oracle,
                              const IssaConfig& config, Rng& direction_rng, long queries_before) {
    const ControlBox& box = oracle.box();
    StatusFn status = [&oracle](const ControlVector& u) { return oracle(u); };

    // Phase 1: Gaussian probe directions from the reference control.
    const auto dirs = sample_directions(config.adamba, box.dim(), direction_rng);
    const auto candidates =
        adamba(config.adamba, box, u_r, dirs, SafetyStatus::UNSAFE, SafetyStatus::SAFE, status);

    ProjectionResult res;
    res.candidates = static_cast<int>(candidates.size());
    if (!candidates.empty()) {
        const BoundaryPoint* best = &candidates.front();
        double best_sq = sq_dist(best->control, u_r);
        for (const auto& c : candidates) {
            const double sq = sq_dist(c.control, u_r);
            if (sq < best_sq) {
                best = &c;
                best_sq = sq;
            }
        }
        res.control = best->control;
        res.deviation = std::sqrt(best_sq);
        res.phase = ProjectionPhase::PHASE1;
        res.queries = oracle.queries() - queries_before;
        return res;
    }

    // Phase 2: grid-sampled safe anchor, then a directed search along the
    // segment between the reference control and the anchor.
    ControlVector u_a;
    try {
        u_a = grid_anchor(status, box, config);
    } catch (const InfeasibleError&) {
        throw InfeasibleError("project: set of safe control appears empty at state " + describe_state(x) +
                              " (design rule violated or assumptions broken)");
    }

    res.phase = ProjectionPhase::PHASE2;
    const double gap = dist2(u_a, u_r);
    if (gap < config.adamba.epsilon) {
        res.control = u_a;
        res.deviation = gap;
        res.queries = oracle.queries() - queries_before;
        return res;
    }

    AdamBAConfig directed = config.adamba;
    directed.beta0 = gap / 4.0;
    directed.n_dirs = 1;

    const auto toward_anchor = reference_direction(axpy(u_a, -1.0, u_r));
    auto pts = adamba(directed, box, u_r, toward_anchor, SafetyStatus::UNSAFE, SafetyStatus::SAFE, status);
    if (pts.empty()) {
        const auto toward_ref = reference_direction(axpy(u_r, -1.0, u_a));
        pts = adamba(directed, box, u_a, toward_ref, SafetyStatus::SAFE, SafetyStatus::SAFE, status);
    }
    if (!pts.empty()) {
        res.control = pts.front().control;
    } else {
        // Both directed searches can only miss through floating-point ties at
        // the segment endpoints; the anchor itself is a sound answer.
        res.control = u_a;
    }
    res.deviation = dist2(res.control, u_r);
    res.queries = oracle.queries() - queries_before;
    return res;
}

}  // namespace

ProjectionResult project(const RobotState& x, const ControlVector& u_r, const StatusOracle& oracle,
                         const IssaConfig& config, Rng& direction_rng) {
    config.validate();
    const long before = oracle.queries();
    if (oracle(u_r) != SafetyStatus::UNSAFE) {
        throw std::invalid_argument("project: reference control is already safe; use safeguard()");
    }
    return project_impl(x, u_r, oracle, config, direction_rng, before);
}

ProjectionResult safeguard(const RobotState& x, const ControlVector& u_r, const Dynamics& dyn,
                           const SafetySpec& spec, double status_dt, const IssaConfig& config,
                           Rng& direction_rng) {
    config.validate();
    ProjectionResult res;
    if (spec.empty()) {
        res.control = u_r;
        return res;
    }
    StatusOracle oracle(x, dyn, spec, status_dt);
    if (oracle(u_r) == SafetyStatus::SAFE) {
        res.control = u_r;
        res.queries = oracle.queries();
        return res;
    }
    return project_impl(x, u_r, oracle, config, direction_rng, 0);
}

}  // namespace safectl
