#pragma once

#include "conops/astro.hpp"
#include "conops/visibility.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace conops {

// Slew limits: per-axis rate caps (rad/s), common angle limit zeta (rad),
// and the spacing of attitude control opportunities (s).
struct AgilityConfig {
    double max_rate_x = 3.0 * kDeg;
    double max_rate_y = 3.0 * kDeg;
    double max_rate_z = 3.0 * kDeg;
    double max_angle = 35.0 * kDeg;
    double control_step = 1800.0;
};

void validate(const AgilityConfig& config);

/// Roll/pitch/yaw about the local x (along-track), y, z (nadir) axes.
struct EulerAngles {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    double l1() const;
    bool operator==(const EulerAngles&) const = default;
};

struct SlewSchedule {
    std::vector<EulerAngles> angles;  // one entry per control opportunity
    double objective = 0.0;           // sum of weighted angular differences, rad
};

struct AgilityScore {
    double total_reward = 0.0;
    std::vector<double> per_step_reward;
    double objective_value = 0.0;
};

/// M = Mx(alpha) * My(beta) * Mz(gamma), with the passive single-axis factors below.
Mat3 rotation_matrix(double alpha, double beta, double gamma);
Mat3 rotation_x(double alpha);
Mat3 rotation_y(double beta);
Mat3 rotation_z(double gamma);

Vec3 pointing_direction(const Vec3& nadir, const EulerAngles& angles);

/// arccos of the normalized dot product, clamped to [-1, 1]. Throws on zero vectors.
double angular_difference(const Vec3& d, const Vec3& t);

/// Local-vertical local-horizontal frame: columns are x (along-track), y = z cross x, z (nadir).
Mat3 lvlh_frame(const StateVector& state);

/// Per-opportunity target: the active point's ECI position, or none.
struct OpportunityTarget {
    bool active = false;
    Vec3 position = Vec3::Zero();
};

// Sequential-in-opportunity slew optimizer. At each opportunity the angular
// difference to the active target is minimized over the box
// [-zeta, zeta]^3 intersected with the rate box around the previous angles,
// by projected gradient descent seeded from the previous angles and from a
// 7^3 grid. Opportunity tau sits at time tau * control_step.
SlewSchedule optimize_slew_schedule(const ClassicalOrbitalElements& orbit,
                                    const std::vector<OpportunityTarget>& targets,
                                    const AgilityConfig& config, const TimeGrid& grid,
                                    const EarthModel& earth = kEarth);

/// Sum over opportunities of the angular difference to the active target.
double schedule_objective(const ClassicalOrbitalElements& orbit, const std::vector<EulerAngles>& angles,
                          const std::vector<OpportunityTarget>& targets, const TimeGrid& grid,
                          const EarthModel& earth = kEarth);

/// Degraded reward: sum over steps of V_t * (1 - (|a| + |b| + |g|) / (6 zeta)).
AgilityScore score_agility(const SlewSchedule& schedule, const std::vector<std::uint8_t>& visible,
                           const AgilityConfig& config, const TimeGrid& grid);

/// Opportunity index governing step t (0-based).
std::int64_t control_index(std::int64_t t, const TimeGrid& grid);

// Visibility of the given per-step target with the cone axis slewed by the
// opportunity's angles relative to the LVLH frame at each step.
std::vector<std::uint8_t> slewed_visibility(const ClassicalOrbitalElements& orbit,
                                            const SlewSchedule& schedule,
                                            const std::vector<OpportunityTarget>& step_targets,
                                            const FovSpec& fov, const TimeGrid& grid,
                                            const EarthModel& earth = kEarth);

/// CSV with columns tau,alpha_deg,beta_deg,gamma_deg.
void write_schedule_csv(std::ostream& out, const SlewSchedule& schedule);

}  // namespace conops
