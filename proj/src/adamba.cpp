#include "safectl/adamba.hpp"

#include <cmath>
#include <future>

namespace safectl {

namespace {

double termination_norm(const ControlVector& a, const ControlVector& b, const std::vector<double>& weights) {
    if (weights.empty()) return dist2(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = (a[i] - b[i]) * weights[i];
        s += e * e;
    }
    return std::sqrt(s);
}

struct DirectionResult {
    bool emitted = false;
    BoundaryPoint point;
    DirectionOutcome outcome = DirectionOutcome::ExitedBox;
    long queries = 0;
};

DirectionResult search_direction(const AdamBAConfig& cfg, const ControlBox& box, const ControlVector& u_r,
                                 const ControlVector& dir, int dir_index, SafetyStatus s, SafetyStatus s_goal,
                                 const StatusFn& oracle) {
    DirectionResult res;

    // Exponential outreach: last same-status point brackets the flip from
    // below, the first flipped point from above.
    ControlVector p_s = u_r;
    ControlVector p_ns = u_r;
    ControlVector p = u_r;
    double beta = cfg.beta0;
    bool flipped = false;

    for (int step = 0; step < cfg.max_outreach_doublings; ++step) {
        p = axpy(p, beta, dir);
        if (!box.contains(p)) {
            res.outcome = DirectionOutcome::ExitedBox;
            return res;
        }
        ++res.queries;
        if (oracle(p) != s) {
            p_ns = p;
            flipped = true;
            break;
        }
        p_s = p;
        beta *= 2.0;
    }
    if (!flipped) {
        res.outcome = DirectionOutcome::OutreachCapExceeded;
        return res;
    }

    // Exponential decay: bisection keeps status(p_s) == s, status(p_ns) != s.
    int guard = 0;
    while (termination_norm(p_ns, p_s, cfg.scale_weights) >= cfg.epsilon) {
        const ControlVector mid = midpoint(p_s, p_ns);
        if (mid == p_s || mid == p_ns) break;  // epsilon below float resolution
        ++res.queries;
        if (oracle(mid) == s) {
            p_s = mid;
        } else {
            p_ns = mid;
        }
        if (++guard > 200) break;
    }

    res.emitted = true;
    res.point.control = (s_goal == s) ? p_s : p_ns;
    res.point.status = s_goal;
    res.point.queries_used = res.queries;
    res.point.direction_index = dir_index;
    res.outcome = DirectionOutcome::Emitted;
    return res;
}

std::vector<BoundaryPoint> collect(std::vector<DirectionResult>&& results, AdamBADiagnostics* diag) {
    std::vector<BoundaryPoint> out;
    for (auto& r : results) {
        if (diag) {
            diag->outcomes.push_back(r.outcome);
            diag->total_queries += r.queries;
        }
        if (r.emitted) out.push_back(std::move(r.point));
    }
    return out;
}

}  // namespace

std::vector<ControlVector> sample_directions(const AdamBAConfig& config, std::size_t n_u, Rng& rng) {
    config.validate();
    std::normal_distribution<double> gauss(0.0, std::sqrt(config.cov_scale));
    std::vector<ControlVector> dirs;
    dirs.reserve(config.n_dirs);
    for (int i = 0; i < config.n_dirs; ++i) {
        ControlVector v(n_u);
        double norm = 0.0;
        for (int attempt = 0; attempt < 100; ++attempt) {
            for (auto& c : v) c = gauss(rng);
            norm = norm2(v);
            if (norm > 1e-12) break;
        }
        if (norm <= 1e-12) throw std::runtime_error("sample_directions: degenerate Gaussian draws");
        for (auto& c : v) c /= norm;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

std::vector<ControlVector> reference_direction(const ControlVector& v_ref) {
    const double n = norm2(v_ref);
    if (!(n > 0.0)) throw std::invalid_argument("reference_direction: zero reference vector");
    ControlVector v = v_ref;
    for (auto& c : v) c /= n;
    return {std::move(v)};
}

std::vector<BoundaryPoint> adamba(const AdamBAConfig& config, const ControlBox& box, const ControlVector& u_r,
                                  const std::vector<ControlVector>& directions, SafetyStatus s,
                                  SafetyStatus s_goal, const StatusFn& oracle, AdamBADiagnostics* diag) {
    config.validate();
    if (!box.contains(u_r)) throw std::invalid_argument("adamba: reference control outside control box");

    std::vector<DirectionResult> results;
    results.reserve(directions.size());
    for (std::size_t i = 0; i < directions.size(); ++i) {
        results.push_back(
            search_direction(config, box, u_r, directions[i], static_cast<int>(i), s, s_goal, oracle));
    }
    return collect(std::move(results), diag);
}

std::vector<BoundaryPoint> adamba_parallel(const AdamBAConfig& config, const ControlBox& box,
                                           const ControlVector& u_r,
                                           const std::vector<ControlVector>& directions, SafetyStatus s,
                                           SafetyStatus s_goal, const StatusFn& oracle,
                                           AdamBADiagnostics* diag) {
    config.validate();
    if (!box.contains(u_r)) throw std::invalid_argument("adamba: reference control outside control box");

    std::vector<std::future<DirectionResult>> futures;
    futures.reserve(directions.size());
    for (std::size_t i = 0; i < directions.size(); ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
            return search_direction(config, box, u_r, directions[i], static_cast<int>(i), s, s_goal, oracle);
        }));
    }
    std::vector<DirectionResult> results;
    results.reserve(directions.size());
    for (auto& f : futures) results.push_back(f.get());
    return collect(std::move(results), diag);
}

}  // namespace safectl
