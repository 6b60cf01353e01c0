#include "conops/astro.hpp"

#include <cmath>
#include <string>

namespace conops {

namespace {

bool is_multiple(double value, double unit) {
    const double ratio = value / unit;
    return std::abs(ratio - std::round(ratio)) < 1e-9 * std::max(1.0, ratio);
}

}  // namespace

TimeGrid TimeGrid::make(double duration, double step, double control_step, int num_stages) {
    if (!(step > 0.0)) throw std::invalid_argument("time step must be positive");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (control_step < step) throw std::invalid_argument("control step must be >= time step");
    if (!is_multiple(control_step, step))
        throw std::invalid_argument("control step must be a multiple of the time step");
    if (!is_multiple(duration, step))
        throw std::invalid_argument("duration must be a multiple of the time step");
    if (!is_multiple(duration, control_step))
        throw std::invalid_argument("duration must be a multiple of the control step");
    if (num_stages < 1) throw std::invalid_argument("need at least one stage");

    TimeGrid g;
    g.duration_ = duration;
    g.step_ = step;
    g.control_step_ = control_step;
    g.num_stages_ = num_stages;
    g.num_steps_ = std::llround(duration / step);
    g.num_control_ = std::llround(duration / control_step);
    g.steps_per_control_ = std::llround(control_step / step);
    if (g.num_steps_ % num_stages != 0)
        throw std::invalid_argument("step count " + std::to_string(g.num_steps_) +
                                    " is not divisible by " + std::to_string(num_stages) +
                                    " stages; adjust the time step or duration");
    return g;
}

void validate(const ClassicalOrbitalElements& coe, const EarthModel& earth) {
    if (!(coe.semi_major_axis > earth.radius))
        throw std::invalid_argument("semi-major axis must exceed the Earth radius");
    if (!(coe.eccentricity >= 0.0 && coe.eccentricity < 1.0))
        throw std::invalid_argument("eccentricity must lie in [0, 1)");
    if (!(coe.inclination >= 0.0 && coe.inclination <= kPi))
        throw std::invalid_argument("inclination must lie in [0, pi]");
}

double wrap_two_pi(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

double wrap_pi(double angle) {
    double r = wrap_two_pi(angle + kPi) - kPi;
    return r;
}

double mean_motion(double a, const EarthModel& earth) { return std::sqrt(earth.mu / (a * a * a)); }

double orbital_period(double a, const EarthModel& earth) { return kTwoPi / mean_motion(a, earth); }

double circular_speed(double a, const EarthModel& earth) { return std::sqrt(earth.mu / a); }

double true_to_mean_anomaly(double nu, double e) {
    const double E = 2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(nu / 2.0),
                                      std::sqrt(1.0 + e) * std::cos(nu / 2.0));
    return wrap_two_pi(E - e * std::sin(E));
}

double solve_kepler(double M, double e) {
    M = wrap_two_pi(M);
    // f(E) = E - e sin E - M is increasing on [0, 2 pi] with a sign change, so Newton
    // steps that leave the bracket fall back to bisection.
    double lo = 0.0, hi = kTwoPi;
    double E = (e > 0.8) ? kPi : ((M > kPi) ? M - e : M + e);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = E - e * std::sin(E) - M;
        if (f > 0.0) hi = E; else lo = E;
        const double step = f / (1.0 - e * std::cos(E));
        double next = E - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - E) < 1e-13 || hi - lo < 1e-14) return next;
        E = next;
    }
    throw NumericalError("Kepler iteration did not converge (e = " + std::to_string(e) + ")");
}

double mean_to_true_anomaly(double M, double e) {
    const double E = solve_kepler(M, e);
    return wrap_two_pi(2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(E / 2.0),
                                        std::sqrt(1.0 - e) * std::cos(E / 2.0)));
}

SecularRates secular_rates(const ClassicalOrbitalElements& coe, const EarthModel& earth) {
    const double a = coe.semi_major_axis;
    const double e = coe.eccentricity;
    const double n = mean_motion(a, earth);
    const double p = a * (1.0 - e * e);
    const double k = earth.j2 * (earth.radius / p) * (earth.radius / p) * n;
    const double ci = std::cos(coe.inclination);
    SecularRates r;
    r.raan = -1.5 * k * ci;
    r.arg_periapsis = 0.75 * k * (5.0 * ci * ci - 1.0);
    r.mean_anomaly = n + 0.75 * k * std::sqrt(1.0 - e * e) * (3.0 * ci * ci - 1.0);
    return r;
}

ClassicalOrbitalElements propagate(const ClassicalOrbitalElements& coe, double dt,
                                   const EarthModel& earth) {
    if (dt < 0.0) throw std::invalid_argument("propagate: dt must be non-negative");
    if (dt == 0.0) return coe;
    const SecularRates rates = secular_rates(coe, earth);
    ClassicalOrbitalElements out = coe;
    const double M0 = true_to_mean_anomaly(coe.true_anomaly, coe.eccentricity);
    out.true_anomaly = mean_to_true_anomaly(M0 + rates.mean_anomaly * dt, coe.eccentricity);
    out.raan = wrap_two_pi(coe.raan + rates.raan * dt);
    out.arg_periapsis = wrap_two_pi(coe.arg_periapsis + rates.arg_periapsis * dt);
    out.epoch = coe.epoch + dt;
    return out;
}

namespace {

// Columns are the perifocal P and Q axes expressed in ECI.
void perifocal_axes(const ClassicalOrbitalElements& coe, Vec3& P, Vec3& Q) {
    const double cO = std::cos(coe.raan), sO = std::sin(coe.raan);
    const double cw = std::cos(coe.arg_periapsis), sw = std::sin(coe.arg_periapsis);
    const double ci = std::cos(coe.inclination), si = std::sin(coe.inclination);
    P = Vec3(cO * cw - sO * sw * ci, sO * cw + cO * sw * ci, sw * si);
    Q = Vec3(-cO * sw - sO * cw * ci, -sO * sw + cO * cw * ci, cw * si);
}

}  // namespace

StateVector coe_to_state(const ClassicalOrbitalElements& coe, const EarthModel& earth) {
    const double a = coe.semi_major_axis;
    const double e = coe.eccentricity;
    const double p = a * (1.0 - e * e);
    const double cn = std::cos(coe.true_anomaly), sn = std::sin(coe.true_anomaly);
    const double r = p / (1.0 + e * cn);
    const double h = std::sqrt(earth.mu / p);
    Vec3 P, Q;
    perifocal_axes(coe, P, Q);
    StateVector s;
    s.position = r * cn * P + r * sn * Q;
    s.velocity = -h * sn * P + h * (e + cn) * Q;
    s.time = coe.epoch;
    return s;
}

Vec3 coe_to_position(const ClassicalOrbitalElements& coe) {
    const double a = coe.semi_major_axis;
    const double e = coe.eccentricity;
    const double cn = std::cos(coe.true_anomaly), sn = std::sin(coe.true_anomaly);
    const double r = a * (1.0 - e * e) / (1.0 + e * cn);
    Vec3 P, Q;
    perifocal_axes(coe, P, Q);
    return r * cn * P + r * sn * Q;
}

ClassicalOrbitalElements state_to_coe(const StateVector& state, const EarthModel& earth) {
    constexpr double kSmall = 1e-8;
    const Vec3& r = state.position;
    const Vec3& v = state.velocity;
    const Vec3 h = r.cross(v);
    const double hn = h.norm();
    if (hn < 1e-10 * r.norm() * v.norm() || hn == 0.0)
        throw std::invalid_argument("state_to_coe: degenerate (rectilinear) state");

    const double rn = r.norm();
    const Vec3 evec = v.cross(h) / earth.mu - r / rn;
    const double e = evec.norm();
    const double energy = v.squaredNorm() / 2.0 - earth.mu / rn;
    if (energy >= 0.0) throw std::invalid_argument("state_to_coe: orbit is not elliptic");

    ClassicalOrbitalElements coe;
    coe.semi_major_axis = -earth.mu / (2.0 * energy);
    coe.eccentricity = e;
    coe.inclination = std::atan2(std::hypot(h.x(), h.y()), h.z());
    coe.epoch = state.time;

    const Vec3 node(-h.y(), h.x(), 0.0);
    const double nn = node.norm();
    const bool equatorial = coe.inclination < kSmall || (kPi - coe.inclination) < kSmall;
    const bool circular = e < kSmall;

    // Reference direction in the orbit plane from which omega (or the anomaly) is measured.
    Vec3 ref = equatorial ? Vec3(1.0, 0.0, 0.0) : Vec3(node / nn);
    coe.raan = equatorial ? 0.0 : wrap_two_pi(std::atan2(node.y(), node.x()));

    const Vec3 hhat = h / hn;
    auto in_plane_angle = [&](const Vec3& from, const Vec3& to) {
        return wrap_two_pi(std::atan2(hhat.dot(from.cross(to)), from.dot(to)));
    };

    if (circular) {
        coe.arg_periapsis = 0.0;
        coe.true_anomaly = in_plane_angle(ref, r);
    } else {
        coe.arg_periapsis = in_plane_angle(ref, evec);
        coe.true_anomaly = in_plane_angle(evec, r);
    }
    return coe;
}

double earth_rotation_angle(double t, const EarthModel& earth) {
    return earth.theta0 + earth.rotation_rate * t;
}

Vec3 geodetic_to_eci(const GeodeticPoint& point, double t, const EarthModel& earth) {
    const double lon = point.longitude + earth_rotation_angle(t, earth);
    const double rho = earth.radius + point.altitude;
    const double cl = std::cos(point.latitude);
    return Vec3(rho * cl * std::cos(lon), rho * cl * std::sin(lon), rho * std::sin(point.latitude));
}

}  // namespace conops
