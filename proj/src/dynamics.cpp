#include "safectl/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace safectl {

RobotState ToyUnicycle::step(const RobotState& x, const ControlVector& u, double dt) const {
    check_inputs(u, dt);
    const double v_cmd = u[0];
    const double w_cmd = u[1];
    RobotState n = x;
    n.px = x.px + std::cos(x.theta) * v_cmd * dt;
    n.py = x.py + std::sin(x.theta) * v_cmd * dt;
    n.theta = wrap_angle(x.theta + w_cmd * dt);
    return n;
}

SecondOrderRobot::SecondOrderRobot(SystemLimits limits) : limits_(limits) {
    limits_.validate();
    box_.lo = {limits_.a_min, limits_.w_min};
    box_.hi = {limits_.a_max, limits_.w_max};
}

RobotState SecondOrderRobot::step(const RobotState& x, const ControlVector& u, double dt) const {
    check_inputs(u, dt);
    const double a_cmd = u[0];
    const double w_cmd = u[1];
    RobotState n;
    n.px = x.px + std::cos(x.theta) * x.v * dt;
    n.py = x.py + std::sin(x.theta) * x.v * dt;
    n.theta = wrap_angle(x.theta + w_cmd * dt);
    n.v = std::clamp(x.v + a_cmd * dt, 0.0, limits_.v_max);
    return n;
}

RelativeKinematics relative_kinematics(const RobotState& x, const Obstacle& obs) {
    const double rx = obs.cx - x.px;
    const double ry = obs.cy - x.py;
    const double d = std::hypot(rx, ry);
    if (!(d > 1e-12)) throw std::domain_error("relative_kinematics: robot and obstacle centers coincide");

    const double vrx = x.v * std::cos(x.theta) - obs.vx;
    const double vry = x.v * std::sin(x.theta) - obs.vy;

    RelativeKinematics k;
    k.d = d;
    k.v_rel = std::hypot(vrx, vry);
    // d/dt |p_obs - p_robot| projected onto the line of sight.
    k.d_dot = -(rx * vrx + ry * vry) / d;
    k.alpha = wrap_angle_hi(std::atan2(ry, rx) - x.theta);
    return k;
}

}  // namespace safectl
