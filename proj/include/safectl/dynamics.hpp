#ifndef SAFECTL_DYNAMICS_HPP
#define SAFECTL_DYNAMICS_HPP

#include <memory>
#include <string>

#include "safectl/types.hpp"

namespace safectl {

/// Black-box next-state function. Implementations may only be queried
/// pointwise; they must be pure (no persistent mutation, bitwise-identical
/// outputs for identical inputs) and callable concurrently.
class Dynamics {
public:
    virtual ~Dynamics() = default;

    /// x_{t+1} = f(x_t, u_t) over one step of length dt.
    /// Throws std::domain_error if u is outside the control box or dt <= 0.
    virtual RobotState step(const RobotState& x, const ControlVector& u, double dt) const = 0;

    virtual const ControlBox& control_box() const = 0;

    /// True when the model carries a speed state (second-order robot).
    virtual bool has_speed_state() const = 0;

    virtual std::string name() const = 0;

protected:
    void check_inputs(const ControlVector& u, double dt) const {
        if (!(dt > 0.0)) throw std::domain_error("dynamics: dt must be > 0");
        if (!control_box().contains(u)) throw std::domain_error("dynamics: control outside control box");
    }
};

/// First-order unicycle, state (px, py, theta), control (v_cmd, w_cmd):
///   px += cos(theta) v dt,  py += sin(theta) v dt,  theta += w dt.
class ToyUnicycle final : public Dynamics {
public:
    explicit ToyUnicycle(ControlBox box) : box_(std::move(box)) {}

    RobotState step(const RobotState& x, const ControlVector& u, double dt) const override;
    const ControlBox& control_box() const override { return box_; }
    bool has_speed_state() const override { return false; }
    std::string name() const override { return "toy"; }

private:
    ControlBox box_;
};

/// Second-order planar robot, state (px, py, theta, v), control (a_cmd, w_cmd).
/// Zero-order hold, explicit Euler: position advances with the pre-update
/// speed and heading, then v' = clamp(v + a dt, 0, v_max), theta' += w dt.
class SecondOrderRobot final : public Dynamics {
public:
    explicit SecondOrderRobot(SystemLimits limits);

    RobotState step(const RobotState& x, const ControlVector& u, double dt) const override;
    const ControlBox& control_box() const override { return box_; }
    bool has_speed_state() const override { return true; }
    std::string name() const override { return "second_order"; }

    const SystemLimits& limits() const { return limits_; }

private:
    SystemLimits limits_;
    ControlBox box_;
};

/// Obstacle-frame geometry for one robot/obstacle pair. The relative velocity
/// subtracts the obstacle's own velocity; alpha is the signed angle from the
/// heading vector to the robot-to-obstacle vector, in (-pi, pi].
/// Throws std::domain_error when the centers coincide.
RelativeKinematics relative_kinematics(const RobotState& x, const Obstacle& obs);

/// Constant-velocity obstacle propagation over one step.
inline Obstacle propagate(const Obstacle& o, double dt) {
    Obstacle r = o;
    r.cx += o.vx * dt;
    r.cy += o.vy * dt;
    return r;
}

}  // namespace safectl

#endif  // SAFECTL_DYNAMICS_HPP
