#ifndef SAFECTL_TYPES_HPP
#define SAFECTL_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace safectl {

/// Planar robot configuration plus forward speed. The first-order (toy)
/// model ignores v and leaves it at zero.
struct RobotState {
    double px = 0.0;     ///< position x [m]
    double py = 0.0;     ///< position y [m]
    double theta = 0.0;  ///< heading [rad], wrapped to [-pi, pi)
    double v = 0.0;      ///< forward speed [m/s], second-order model only

    bool operator==(const RobotState&) const = default;
};

/// Actuation command, length n_u. Meaning of the components depends on the
/// active model: (v_cmd, w_cmd) for the toy unicycle, (a_cmd, w_cmd) for the
/// second-order robot.
using ControlVector = std::vector<double>;

/// Circular obstacle with optional constant velocity.
struct Obstacle {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 0.1;
    double vx = 0.0;
    double vy = 0.0;
};

/// Axis-aligned control-space box, one [lo, hi] interval per dimension.
struct ControlBox {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    bool contains(const ControlVector& u) const {
        if (u.size() != lo.size()) return false;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] < lo[i] || u[i] > hi[i]) return false;
        }
        return true;
    }

    double diagonal() const {
        double s = 0.0;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            const double e = hi[i] - lo[i];
            s += e * e;
        }
        return std::sqrt(s);
    }

    ControlVector clip(const ControlVector& u) const {
        ControlVector r = u;
        for (std::size_t i = 0; i < r.size() && i < lo.size(); ++i) {
            if (r[i] < lo[i]) r[i] = lo[i];
            if (r[i] > hi[i]) r[i] = hi[i];
        }
        return r;
    }
};

/// Actuation and state bounds of the second-order model. a_min <= 0 <= a_max,
/// w_min <= 0 <= w_max, v_max > 0, dt > 0.
struct SystemLimits {
    double v_max = 1.0;
    double a_min = -1.0;
    double a_max = 1.0;
    double w_min = -1.0;
    double w_max = 1.0;
    double dt = 0.1;

    double a_mag() const { return std::max(-a_min, a_max); }      ///< a_m
    double w_mag() const { return std::max(-w_min, w_max); }      ///< w_m
    double a_eff() const { return std::min(-a_min, a_max); }      ///< min{-a_min, a_max}

    void validate() const {
        if (!(v_max > 0.0)) throw std::invalid_argument("limits: v_max must be > 0");
        if (!(a_min <= 0.0 && a_max >= 0.0)) throw std::invalid_argument("limits: need a_min <= 0 <= a_max");
        if (!(w_min <= 0.0 && w_max >= 0.0)) throw std::invalid_argument("limits: need w_min <= 0 <= w_max");
        if (!(dt > 0.0)) throw std::invalid_argument("limits: dt must be > 0");
    }
};

/// Obstacle-frame geometry of one robot/obstacle pair.
struct RelativeKinematics {
    double d = 0.0;      ///< center-to-center distance [m]
    double d_dot = 0.0;  ///< range rate [m/s], negative when closing
    double alpha = 0.0;  ///< signed angle heading -> robot-to-obstacle, (-pi, pi]
    double v_rel = 0.0;  ///< relative speed in the obstacle frame [m/s]
};

/// Wrap to [-pi, pi); exact no-op for values already in range.
inline double wrap_angle(double a) {
    if (a >= -M_PI && a < M_PI) return a;
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a + M_PI, two_pi);
    if (a < 0.0) a += two_pi;
    return a - M_PI;
}

/// Wrap to (-pi, pi]; used for the obstacle-frame angle alpha.
inline double wrap_angle_hi(double a) {
    if (a > -M_PI && a <= M_PI) return a;
    double w = wrap_angle(a);
    if (w == -M_PI) w = M_PI;
    return w;
}

inline double norm2(const ControlVector& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
}

inline double dist2(const ControlVector& a, const ControlVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - b[i];
        s += e * e;
    }
    return std::sqrt(s);
}

inline double sq_dist(const ControlVector& a, const ControlVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - b[i];
        s += e * e;
    }
    return s;
}

/// a + s * b
inline ControlVector axpy(const ControlVector& a, double s, const ControlVector& b) {
    ControlVector r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += s * b[i];
    return r;
}

inline ControlVector midpoint(const ControlVector& a, const ControlVector& b) {
    ControlVector r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.5 * (a[i] + b[i]);
    return r;
}

}  // namespace safectl

#endif  // SAFECTL_TYPES_HPP
