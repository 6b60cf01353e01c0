#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace conops {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDeg = std::numbers::pi / 180.0;

// Earth and gravity constants shared by every module. Spherical Earth with a
// uniform rotation rate; j2 = 0 turns the propagator into pure two-body.
struct EarthModel {
    double mu = 398600.4418;             // km^3/s^2
    double j2 = 1.08262668e-3;
    double radius = 6378.137;            // km
    double rotation_rate = 7.2921159e-5; // rad/s
    double theta0 = 0.0;                 // Earth rotation angle at scenario epoch, rad
};

inline constexpr EarthModel kEarth{};

// Raised when Kepler's equation fails to converge (pathological eccentricity).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One orbit at an epoch. Angles in radians, epoch in seconds since scenario start.
struct ClassicalOrbitalElements {
    double semi_major_axis = 0.0;  // km
    double eccentricity = 0.0;
    double inclination = 0.0;
    double raan = 0.0;
    double arg_periapsis = 0.0;
    double true_anomaly = 0.0;
    double epoch = 0.0;

    bool operator==(const ClassicalOrbitalElements&) const = default;
};

struct StateVector {
    Vec3 position = Vec3::Zero();  // km, ECI
    Vec3 velocity = Vec3::Zero();  // km/s, ECI
    double time = 0.0;             // s
};

struct GeodeticPoint {
    double latitude = 0.0;   // rad
    double longitude = 0.0;  // rad
    double altitude = 0.0;   // km
};

// Simulation time discretization. Step t (0-based) sits at time t * step.
class TimeGrid {
public:
    // Throws std::invalid_argument unless duration, step and control_step are
    // consistent multiples and the step count divides evenly into the stages.
    static TimeGrid make(double duration, double step, double control_step, int num_stages = 1);

    double duration() const { return duration_; }
    double step() const { return step_; }
    double control_step() const { return control_step_; }
    std::int64_t num_steps() const { return num_steps_; }
    int num_stages() const { return num_stages_; }
    std::int64_t steps_per_stage() const { return num_steps_ / num_stages_; }
    std::int64_t num_control() const { return num_control_; }
    std::int64_t steps_per_control() const { return steps_per_control_; }
    double time_of(std::int64_t t) const { return static_cast<double>(t) * step_; }

    TimeGrid with_stages(int num_stages) const { return make(duration_, step_, control_step_, num_stages); }

private:
    double duration_ = 0.0;
    double step_ = 0.0;
    double control_step_ = 0.0;
    std::int64_t num_steps_ = 0;
    std::int64_t num_control_ = 0;
    std::int64_t steps_per_control_ = 0;
    int num_stages_ = 1;
};

/// Throws std::invalid_argument if a <= Earth radius, e outside [0, 1) or i outside [0, pi].
void validate(const ClassicalOrbitalElements& coe, const EarthModel& earth = kEarth);

double wrap_two_pi(double angle);
double wrap_pi(double angle);

double mean_motion(double semi_major_axis, const EarthModel& earth = kEarth);
double orbital_period(double semi_major_axis, const EarthModel& earth = kEarth);
double circular_speed(double semi_major_axis, const EarthModel& earth = kEarth);

double true_to_mean_anomaly(double true_anomaly, double eccentricity);
/// Newton iteration on Kepler's equation, tolerance 1e-12 rad, at most 50 iterations.
double solve_kepler(double mean_anomaly, double eccentricity);
double mean_to_true_anomaly(double mean_anomaly, double eccentricity);

/// First-order J2 secular drift rates (rad/s) of RAAN, argument of periapsis and mean anomaly.
struct SecularRates {
    double raan = 0.0;
    double arg_periapsis = 0.0;
    double mean_anomaly = 0.0;
};
SecularRates secular_rates(const ClassicalOrbitalElements& coe, const EarthModel& earth = kEarth);

// Two-body propagation plus J2 secular drift of RAAN, argument of periapsis
// and mean motion. a, e, i are carried through unchanged.
ClassicalOrbitalElements propagate(const ClassicalOrbitalElements& coe, double dt,
                                   const EarthModel& earth = kEarth);

StateVector coe_to_state(const ClassicalOrbitalElements& coe, const EarthModel& earth = kEarth);
Vec3 coe_to_position(const ClassicalOrbitalElements& coe);

// Degenerate angles: e < 1e-8 sets arg_periapsis = 0 and measures the anomaly
// from the node; i < 1e-8 sets raan = 0.
ClassicalOrbitalElements state_to_coe(const StateVector& state, const EarthModel& earth = kEarth);

double earth_rotation_angle(double t, const EarthModel& earth = kEarth);
Vec3 geodetic_to_eci(const GeodeticPoint& point, double t, const EarthModel& earth = kEarth);

}  // namespace conops
