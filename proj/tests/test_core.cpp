#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "safectl/dynamics.hpp"
#include "safectl/rng.hpp"

using namespace safectl;

namespace {

ControlBox toy_box() {
    ControlBox b;
    b.lo = {0.0, -2.0};
    b.hi = {2.0, 2.0};
    return b;
}

SystemLimits test_limits() {
    SystemLimits l;
    l.v_max = 2.0;
    l.a_min = -1.0;
    l.a_max = 1.0;
    l.w_min = -1.0;
    l.w_max = 1.0;
    l.dt = 0.1;
    return l;
}

}  // namespace

TEST_CASE("toy unicycle follows the affine update") {
    ToyUnicycle dyn(toy_box());

    SUBCASE("straight line motion") {
        const RobotState n = dyn.step({0, 0, 0, 0}, {1.0, 0.0}, 0.01);
        CHECK(n.px == doctest::Approx(0.01).epsilon(1e-12));
        CHECK(n.py == doctest::Approx(0.0));
        CHECK(n.theta == doctest::Approx(0.0));
    }
    SUBCASE("zero control is a fixed point") {
        const RobotState x{0.3, -0.2, 0.7, 0.0};
        const RobotState n = dyn.step(x, {0.0, 0.0}, 0.01);
        CHECK(n.px == x.px);
        CHECK(n.py == x.py);
        CHECK(n.theta == x.theta);
    }
    SUBCASE("heading +y") {
        const RobotState n = dyn.step({0, 0, M_PI / 2, 0}, {2.0, 0.0}, 0.01);
        CHECK(n.px == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(n.py == doctest::Approx(0.02).epsilon(1e-12));
        CHECK(n.theta == doctest::Approx(M_PI / 2));
    }
    SUBCASE("pure rotation") {
        const RobotState n = dyn.step({0, 0, 0, 0}, {0.0, 1.5}, 0.02);
        CHECK(n.px == 0.0);
        CHECK(n.py == 0.0);
        CHECK(n.theta == doctest::Approx(0.03).epsilon(1e-12));
    }
    SUBCASE("rejects controls outside the box") {
        CHECK_THROWS_AS(dyn.step({0, 0, 0, 0}, {3.0, 0.0}, 0.01), std::domain_error);
        CHECK_THROWS_AS(dyn.step({0, 0, 0, 0}, {1.0, 0.0}, 0.0), std::domain_error);
    }
}

TEST_CASE("second-order robot integrates with pre-update speed") {
    SecondOrderRobot dyn(test_limits());

    const RobotState n = dyn.step({0, 0, 0, 1.0}, {1.0, 0.0}, 0.1);
    CHECK(n.px == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(n.v == doctest::Approx(1.1).epsilon(1e-12));

    SUBCASE("speed clamps at zero") {
        const RobotState m = dyn.step({0, 0, 0, 0.05}, {-1.0, 0.0}, 0.1);
        CHECK(m.v == 0.0);
    }
    SUBCASE("speed clamps at v_max") {
        const RobotState m = dyn.step({0, 0, 0, 1.95}, {1.0, 0.0}, 0.1);
        CHECK(m.v == 2.0);
    }
}

TEST_CASE("dynamics are pure: repeated identical queries give identical outputs") {
    SecondOrderRobot dyn(test_limits());
    const RobotState x{0.123, -0.456, 0.789, 1.234};
    const ControlVector u = {0.5, -0.25};
    const RobotState first = dyn.step(x, u, 0.1);
    for (int i = 0; i < 10000; ++i) {
        const RobotState again = dyn.step(x, u, 0.1);
        REQUIRE(again == first);
    }
}

TEST_CASE("random rollouts never leave the speed range") {
    SecondOrderRobot dyn(test_limits());
    Rng rng = substream(7, "rollout");
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    RobotState x{0, 0, 0, 1.0};
    for (int i = 0; i < 10000; ++i) {
        x = dyn.step(x, {ua(rng), ua(rng)}, 0.1);
        REQUIRE(x.v >= 0.0);
        REQUIRE(x.v <= 2.0);
        REQUIRE(x.theta >= -M_PI);
        REQUIRE(x.theta < M_PI);
    }
}

TEST_CASE("relative kinematics against hand geometry") {
    SUBCASE("head-on") {
        const RelativeKinematics k = relative_kinematics({0, 0, 0, 1.0}, {2.0, 0.0, 0.1});
        CHECK(k.d == doctest::Approx(2.0));
        CHECK(k.alpha == doctest::Approx(0.0));
        CHECK(k.d_dot == doctest::Approx(-1.0));
        CHECK(k.v_rel == doctest::Approx(1.0));
    }
    SUBCASE("tangential") {
        const RelativeKinematics k = relative_kinematics({0, 0, 0, 1.0}, {0.0, 2.0, 0.1});
        CHECK(k.alpha == doctest::Approx(M_PI / 2));
        CHECK(k.d_dot == doctest::Approx(0.0));
    }
    SUBCASE("moving away, alpha wraps to +pi") {
        const RelativeKinematics k = relative_kinematics({0, 0, M_PI, 1.0}, {2.0, 0.0, 0.1});
        CHECK(k.alpha == doctest::Approx(M_PI));
        CHECK(k.d_dot == doctest::Approx(1.0));
    }
    SUBCASE("coincident centers are singular") {
        CHECK_THROWS_AS(relative_kinematics({1.0, 1.0, 0, 0}, {1.0, 1.0, 0.1}), std::domain_error);
    }
    SUBCASE("static obstacles satisfy d_dot = -v cos(alpha)") {
        Rng rng = substream(11, "kin");
        std::uniform_real_distribution<double> pos(-3.0, 3.0);
        std::uniform_real_distribution<double> ang(-M_PI, M_PI);
        std::uniform_real_distribution<double> spd(0.0, 2.0);
        for (int i = 0; i < 1000; ++i) {
            const RobotState x{pos(rng), pos(rng), ang(rng), spd(rng)};
            const Obstacle o{pos(rng) + 4.0, pos(rng), 0.1};
            const RelativeKinematics k = relative_kinematics(x, o);
            REQUIRE(k.d_dot == doctest::Approx(-k.v_rel * std::cos(k.alpha)).epsilon(1e-9));
            REQUIRE(std::abs(k.d_dot) <= k.v_rel + 1e-12);
        }
    }
}

TEST_CASE("finite-difference consistency of the range rate") {
    SecondOrderRobot dyn(test_limits());
    const double dt = 1e-4;
    Rng rng = substream(13, "fd");
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    std::uniform_real_distribution<double> spd(0.1, 2.0);

    SUBCASE("static obstacle") {
        for (int i = 0; i < 200; ++i) {
            const RobotState x{0, 0, ang(rng), spd(rng)};
            const Obstacle o{2.0 * std::cos(ang(rng)), 2.0 * std::sin(ang(rng)), 0.1};
            const RelativeKinematics k = relative_kinematics(x, o);
            const RobotState n = dyn.step(x, {0.0, 0.0}, dt);
            const double d_next = std::hypot(o.cx - n.px, o.cy - n.py);
            REQUIRE((d_next - k.d) / dt == doctest::Approx(k.d_dot).epsilon(0.0).scale(1.0).epsilon(1e-2));
        }
    }
    SUBCASE("moving obstacle") {
        for (int i = 0; i < 200; ++i) {
            const RobotState x{0, 0, ang(rng), spd(rng)};
            Obstacle o{2.0, 1.0, 0.1, 0.5, -0.3};
            const RelativeKinematics k = relative_kinematics(x, o);
            const RobotState n = dyn.step(x, {0.0, 0.0}, dt);
            const Obstacle on = propagate(o, dt);
            const double d_next = std::hypot(on.cx - n.px, on.cy - n.py);
            REQUIRE((d_next - k.d) / dt == doctest::Approx(k.d_dot).epsilon(1e-2));
        }
    }
}
