#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "safectl/adamba.hpp"

using namespace safectl;

namespace {

ControlBox box1d(double lo = -1.0, double hi = 1.0) {
    ControlBox b;
    b.lo = {lo};
    b.hi = {hi};
    return b;
}

ControlBox box2d() {
    ControlBox b;
    b.lo = {-1.0, -1.0};
    b.hi = {1.0, 1.0};
    return b;
}

AdamBAConfig cfg(double epsilon = 1e-3, double beta0 = 0.1) {
    AdamBAConfig c;
    c.epsilon = epsilon;
    c.beta0 = beta0;
    c.n_dirs = 1;
    return c;
}

}  // namespace

TEST_CASE("direction sampling") {
    AdamBAConfig c = cfg();
    c.n_dirs = 16;

    SUBCASE("unit norm") {
        Rng rng = substream(1, "dirs");
        for (const auto& v : sample_directions(c, 3, rng)) {
            REQUIRE(norm2(v) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("deterministic under a fixed seed") {
        Rng r1 = substream(9, "dirs");
        Rng r2 = substream(9, "dirs");
        CHECK(sample_directions(c, 2, r1) == sample_directions(c, 2, r2));
    }
    SUBCASE("reference direction is normalized") {
        const auto dirs = reference_direction({3.0, 4.0});
        REQUIRE(dirs.size() == 1);
        CHECK(dirs[0][0] == doctest::Approx(0.6));
        CHECK(dirs[0][1] == doctest::Approx(0.8));
    }
    SUBCASE("zero reference vector is rejected") {
        CHECK_THROWS_AS(reference_direction({0.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("1D threshold oracle") {
    // SAFE iff u >= 0.5; the reference control 0 is UNSAFE.
    const auto oracle = [](const ControlVector& u) {
        return u[0] >= 0.5 ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
    };
    const ControlBox box = box1d();
    const AdamBAConfig c = cfg(1e-3, 0.1);

    SUBCASE("marching toward the flip emits a point just past it") {
        const auto pts = adamba(c, box, {0.0}, {{1.0}}, SafetyStatus::UNSAFE, SafetyStatus::SAFE, oracle);
        REQUIRE(pts.size() == 1);
        CHECK(pts[0].control[0] >= 0.5);
        CHECK(pts[0].control[0] < 0.5 + 1e-3);
        CHECK(oracle(pts[0].control) == SafetyStatus::SAFE);
    }
    SUBCASE("marching away exits the box with no point") {
        AdamBADiagnostics diag;
        const auto pts =
            adamba(c, box, {0.0}, {{-1.0}}, SafetyStatus::UNSAFE, SafetyStatus::SAFE, oracle, &diag);
        CHECK(pts.empty());
        REQUIRE(diag.outcomes.size() == 1);
        CHECK(diag.outcomes[0] == DirectionOutcome::ExitedBox);
    }
    SUBCASE("requesting the matching status returns the near-side bracket end") {
        const auto pts = adamba(c, box, {0.0}, {{1.0}}, SafetyStatus::UNSAFE, SafetyStatus::UNSAFE, oracle);
        REQUIRE(pts.size() == 1);
        CHECK(pts[0].control[0] < 0.5);
        CHECK(pts[0].control[0] > 0.5 - 1e-3);
        CHECK(oracle(pts[0].control) == SafetyStatus::UNSAFE);
    }
}

TEST_CASE("2D half-plane oracle") {
    // SAFE iff u1 >= 0.3.
    const auto oracle = [](const ControlVector& u) {
        return u[0] >= 0.3 ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
    };
    const auto pts = adamba(cfg(1e-4, 0.05), box2d(), {0.0, 0.0}, {{1.0, 0.0}}, SafetyStatus::UNSAFE,
                            SafetyStatus::SAFE, oracle);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].control[0] == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(std::abs(pts[0].control[1]) < 1e-12);
}

TEST_CASE("epsilon accuracy and status soundness over random threshold oracles") {
    Rng rng = substream(21, "oracles");
    std::uniform_real_distribution<double> flip_at(0.05, 0.9);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    const double eps = 1e-3;
    const ControlBox box = box2d();

    int emitted = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double flip = flip_at(rng);
        const double a = ang(rng);
        const ControlVector dir = {std::cos(a), std::sin(a)};
        // Monotone along the ray from the origin: SAFE beyond the flip radius.
        const auto oracle = [&](const ControlVector& u) {
            return norm2(u) >= flip ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
        };
        // Probe offsets 0.03 (2^k - 1) reach 0.93 before any box exit, so
        // every flip radius in [0.05, 0.9] is bracketed before leaving.
        AdamBAConfig c = cfg(eps, 0.03);
        const auto pts =
            adamba(c, box, {0.0, 0.0}, {dir}, SafetyStatus::UNSAFE, SafetyStatus::SAFE, oracle);
        REQUIRE_FALSE(pts.empty());
        ++emitted;
        const double along = norm2(pts[0].control);
        REQUIRE(std::abs(along - flip) < eps);
        REQUIRE(oracle(pts[0].control) == SafetyStatus::SAFE);
    }
    CHECK(emitted == 1000);
}

TEST_CASE("query budget per direction") {
    const double eps = 1e-3;
    const ControlBox box = box2d();
    const auto oracle = [](const ControlVector& u) {
        return u[0] >= 0.62 ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
    };
    AdamBAConfig c = cfg(eps, 0.01);
    AdamBADiagnostics diag;
    const auto pts =
        adamba(c, box, {0.0, 0.0}, {{1.0, 0.0}}, SafetyStatus::UNSAFE, SafetyStatus::SAFE, oracle, &diag);
    REQUIRE(pts.size() == 1);
    const double budget =
        c.max_outreach_doublings + std::ceil(std::log2(box.diagonal() / eps)) + 2;
    CHECK(static_cast<double>(pts[0].queries_used) <= budget);
}

TEST_CASE("outreach cap abandons the direction with a diagnostic") {
    // A box so large that doubling from a tiny step cannot exit it within the
    // allowed doublings, and an oracle that never flips.
    const auto oracle = [](const ControlVector&) { return SafetyStatus::UNSAFE; };
    AdamBAConfig c = cfg(1e-3, 1e-9);
    c.max_outreach_doublings = 10;
    AdamBADiagnostics diag;
    const auto pts = adamba(c, box1d(-1e6, 1e6), {0.0}, {{1.0}}, SafetyStatus::UNSAFE, SafetyStatus::SAFE,
                            oracle, &diag);
    CHECK(pts.empty());
    REQUIRE(diag.outcomes.size() == 1);
    CHECK(diag.outcomes[0] == DirectionOutcome::OutreachCapExceeded);
}

TEST_CASE("bracketing invariant holds throughout the bisection") {
    // Observed through the oracle call sequence: once the flip is seen, every
    // query must stay inside the current bracket, which shrinks toward the
    // true flip point.
    const double flip = 0.437;
    std::vector<double> calls;
    const auto oracle = [&](const ControlVector& u) {
        calls.push_back(u[0]);
        return u[0] >= flip ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
    };
    const auto pts =
        adamba(cfg(1e-6, 0.03), box1d(), {0.0}, {{1.0}}, SafetyStatus::UNSAFE, SafetyStatus::SAFE, oracle);
    REQUIRE(pts.size() == 1);

    double lo = 0.0, hi = 0.0;
    bool flipped = false;
    for (double q : calls) {
        if (!flipped) {
            if (q >= flip) {
                flipped = true;
                hi = q;
            } else {
                lo = q;
            }
            continue;
        }
        REQUIRE(q > lo);
        REQUIRE(q < hi);
        if (q >= flip) hi = q; else lo = q;
    }
    REQUIRE(flipped);
    CHECK(hi - lo < 1e-6);
}

TEST_CASE("parallel search matches the sequential result") {
    const auto oracle = [](const ControlVector& u) {
        return (u[0] * u[0] + u[1] * u[1] >= 0.4) ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
    };
    AdamBAConfig c = cfg(1e-4, 0.05);
    c.n_dirs = 12;
    Rng rng = substream(33, "par");
    const auto dirs = sample_directions(c, 2, rng);

    const auto seq =
        adamba(c, box2d(), {0.0, 0.0}, dirs, SafetyStatus::UNSAFE, SafetyStatus::SAFE, oracle);
    const auto par =
        adamba_parallel(c, box2d(), {0.0, 0.0}, dirs, SafetyStatus::UNSAFE, SafetyStatus::SAFE, oracle);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(seq[i].control == par[i].control);
        CHECK(seq[i].direction_index == par[i].direction_index);
    }
    // Order-stable output: sorted by direction index.
    for (std::size_t i = 1; i < par.size(); ++i) {
        CHECK(par[i - 1].direction_index < par[i].direction_index);
    }
}

TEST_CASE("per-dimension scale weights drive the termination norm") {
    const auto oracle = [](const ControlVector& u) {
        return u[0] >= 0.5 ? SafetyStatus::SAFE : SafetyStatus::UNSAFE;
    };
    AdamBAConfig c = cfg(1e-3, 0.1);
    c.scale_weights = {100.0, 1.0};  // tight in the first dimension
    const auto pts = adamba(c, box2d(), {0.0, 0.0}, {{1.0, 0.0}}, SafetyStatus::UNSAFE,
                            SafetyStatus::SAFE, oracle);
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].control[0] - 0.5) < 1e-3 / 100.0);
}
