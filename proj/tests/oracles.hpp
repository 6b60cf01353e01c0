// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include "conops/agility.hpp"
#include "conops/astro.hpp"
#include "conops/maneuver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using conops::Mat3;
using conops::Vec3;

inline Mat3 factor_x(double a) {
    Mat3 m;
    m << 1, 0, 0, 0, std::cos(a), std::sin(a), 0, -std::sin(a), std::cos(a);
    return m;
}
inline Mat3 factor_y(double b) {
    Mat3 m;
    m << std::cos(b), 0, -std::sin(b), 0, 1, 0, std::sin(b), 0, std::cos(b);
    return m;
}
inline Mat3 factor_z(double g) {
    Mat3 m;
    m << std::cos(g), std::sin(g), 0, -std::sin(g), std::cos(g), 0, 0, 0, 1;
    return m;
}

// Walks a schedule and checks every angle and rate limit with no tolerance.
inline bool schedule_feasible(const conops::SlewSchedule& s, const conops::AgilityConfig& c) {
    double prev[3] = {0.0, 0.0, 0.0};
    const double rate[3] = {c.max_rate_x, c.max_rate_y, c.max_rate_z};
    for (const auto& a : s.angles) {
        const double cur[3] = {a.alpha, a.beta, a.gamma};
        for (int i = 0; i < 3; ++i) {
            if (!(std::abs(cur[i]) <= c.max_angle)) return false;
            if (!(std::abs(cur[i] - prev[i]) <= rate[i] * c.control_step)) return false;
            prev[i] = cur[i];
        }
    }
    return true;
}

// Off-pointing angle to a target for a satellite state and Euler angles,
// built from the factor matrices and an explicit LVLH basis.
inline double off_pointing(const conops::StateVector& st, const Vec3& target, double a, double b, double g) {
    const Vec3 z = -st.position.normalized();
    const Vec3 x = (st.velocity - st.velocity.dot(z) * z).normalized();
    const Vec3 y = z.cross(x);
    const Vec3 d_local = factor_x(a) * factor_y(b) * factor_z(g) * Vec3(0, 0, 1);
    const Vec3 d = d_local.x() * x + d_local.y() * y + d_local.z() * z;
    const Vec3 t = (target - st.position).normalized();
    return std::acos(std::clamp(d.normalized().dot(t), -1.0, 1.0));
}

// Circular speed and the textbook plane-change expressions in arccos form.
inline double vcirc(double a) { return std::sqrt(conops::kEarth.mu / a); }

inline double plane_change(double a, double i1, double i2, double draan) {
    const double c = std::cos(i1) * std::cos(i2) + std::sin(i1) * std::sin(i2) * std::cos(draan);
    return 2.0 * vcirc(a) * std::sin(std::acos(std::clamp(c, -1.0, 1.0)) / 2.0);
}

// Brute force over every revolution pair of the coplanar phasing rendezvous.
inline double phasing(double a, double dphi, int max_revs) {
    const double mu = conops::kEarth.mu;
    const double n = std::sqrt(mu / (a * a * a));
    double best = std::numeric_limits<double>::infinity();
    if (dphi == 0.0) return 0.0;
    for (int kt = 1; kt <= max_revs; ++kt)
        for (int kf = 1; kf <= max_revs; ++kf) {
            const double t = (2.0 * conops::kPi * kt + dphi) / n;
            const double period = t / kf;
            const double ap = std::pow(mu * std::pow(period / (2.0 * conops::kPi), 2), 1.0 / 3.0);
            const double rp = std::min(a, 2.0 * ap - a);
            if (rp < conops::kEarth.radius + 100.0) continue;
            const double v_ellipse = std::sqrt(2.0 * mu / a - mu / ap);
            best = std::min(best, 2.0 * std::abs(v_ellipse - vcirc(a)));
        }
    return best;
}

}  // namespace oracle
