#include "conops/agility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace conops {

void validate(const AgilityConfig& c) {
    if (c.max_rate_x < 0.0 || c.max_rate_y < 0.0 || c.max_rate_z < 0.0)
        throw std::invalid_argument("agility: slew rates must be non-negative");
    if (c.max_angle < 0.0 || c.max_angle > kPi / 2.0)
        throw std::invalid_argument("agility: max slew angle must lie in [0, pi/2]");
    if (!(c.control_step > 0.0)) throw std::invalid_argument("agility: control step must be positive");
}

double EulerAngles::l1() const { return std::abs(alpha) + std::abs(beta) + std::abs(gamma); }

Mat3 rotation_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << 1, 0, 0,
         0, c, s,
         0, -s, c;
    return m;
}

Mat3 rotation_y(double b) {
    const double c = std::cos(b), s = std::sin(b);
    Mat3 m;
    m << c, 0, -s,
         0, 1, 0,
         s, 0, c;
    return m;
}

Mat3 rotation_z(double g) {
    const double c = std::cos(g), s = std::sin(g);
    Mat3 m;
    m << c, s, 0,
         -s, c, 0,
         0, 0, 1;
    return m;
}

Mat3 rotation_matrix(double alpha, double beta, double gamma) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cb = std::cos(beta), sb = std::sin(beta);
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    Mat3 m;
    m << cb * cg,                  cb * sg,                  -sb,
         sa * sb * cg - ca * sg,   sa * sb * sg + ca * cg,   sa * cb,
         ca * sb * cg + sa * sg,   ca * sb * sg - sa * cg,   ca * cb;
    return m;
}

Vec3 pointing_direction(const Vec3& nadir, const EulerAngles& a) {
    return rotation_matrix(a.alpha, a.beta, a.gamma) * nadir;
}

double angular_difference(const Vec3& d, const Vec3& t) {
    const double nd = d.norm(), nt = t.norm();
    if (nd == 0.0 || nt == 0.0) throw std::invalid_argument("angular_difference: zero vector");
    return std::acos(std::clamp(d.dot(t) / (nd * nt), -1.0, 1.0));
}

Mat3 lvlh_frame(const StateVector& state) {
    const Vec3 z = -state.position / state.position.norm();
    Vec3 x = state.velocity - state.velocity.dot(z) * z;
    x /= x.norm();
    const Vec3 y = z.cross(x);
    Mat3 R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    return R;
}

std::int64_t control_index(std::int64_t t, const TimeGrid& grid) { return t / grid.steps_per_control(); }

namespace {

struct Box {
    double lo[3];
    double hi[3];
};

// Largest value within [lo, hi] that also satisfies |x - prev| <= d as evaluated in doubles.
double rate_clamp(double x, double prev, double d, double lo, double hi) {
    x = std::clamp(x, lo, hi);
    while (std::abs(x - prev) > d) x = std::nextafter(x, prev);
    return x;
}

Box feasible_box(const EulerAngles& prev, const AgilityConfig& c) {
    const double prevs[3] = {prev.alpha, prev.beta, prev.gamma};
    const double rates[3] = {c.max_rate_x, c.max_rate_y, c.max_rate_z};
    Box b{};
    for (int i = 0; i < 3; ++i) {
        const double d = rates[i] * c.control_step;
        b.lo[i] = rate_clamp(std::max(-c.max_angle, prevs[i] - d), prevs[i], d, -c.max_angle, c.max_angle);
        b.hi[i] = rate_clamp(std::min(c.max_angle, prevs[i] + d), prevs[i], d, -c.max_angle, c.max_angle);
    }
    return b;
}

struct Point {
    double v[3];
    EulerAngles angles() const { return {v[0], v[1], v[2]}; }
    double l1() const { return std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]); }
};

Point project(Point p, const Box& b) {
    for (int i = 0; i < 3; ++i) p.v[i] = std::clamp(p.v[i], b.lo[i], b.hi[i]);
    return p;
}

// Pointing problem at one opportunity, expressed in the LVLH frame where nadir is +z.
struct PointingProblem {
    Vec3 target;  // unit, LVLH

    double theta(const Point& p) const {
        const Vec3 d = rotation_matrix(p.v[0], p.v[1], p.v[2]) * Vec3::UnitZ();
        return std::atan2(d.cross(target).norm(), d.dot(target));
    }

    // Gradient of -D . T.
    void gradient(const Point& p, double g[3]) const {
        const Vec3 e = Vec3::UnitZ();
        const Mat3 mx = rotation_x(p.v[0]), my = rotation_y(p.v[1]), mz = rotation_z(p.v[2]);
        const double ca = std::cos(p.v[0]), sa = std::sin(p.v[0]);
        const double cb = std::cos(p.v[1]), sb = std::sin(p.v[1]);
        const double cg = std::cos(p.v[2]), sg = std::sin(p.v[2]);
        Mat3 dx, dy, dz;
        dx << 0, 0, 0, 0, -sa, ca, 0, -ca, -sa;
        dy << -sb, 0, -cb, 0, 0, 0, cb, 0, -sb;
        dz << -sg, cg, 0, -cg, -sg, 0, 0, 0, 0;
        g[0] = -target.dot(dx * my * mz * e);
        g[1] = -target.dot(mx * dy * mz * e);
        g[2] = -target.dot(mx * my * dz * e);
    }
};

bool better(double f_new, const Point& p_new, double f_old, const Point& p_old) {
    constexpr double kTie = 1e-12;
    if (f_new < f_old - kTie) return true;
    if (f_new > f_old + kTie) return false;
    return p_new.l1() < p_old.l1();
}

Point descend(const PointingProblem& prob, Point x, const Box& box) {
    double fx = prob.theta(x);
    for (int iter = 0; iter < 500; ++iter) {
        double g[3];
        prob.gradient(x, g);
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            Point y = x;
            for (int i = 0; i < 3; ++i) y.v[i] -= step * g[i];
            y = project(y, box);
            const double fy = prob.theta(y);
            if (fy < fx) {
                double shift = 0.0;
                for (int i = 0; i < 3; ++i) shift = std::max(shift, std::abs(y.v[i] - x.v[i]));
                x = y;
                fx = fy;
                moved = shift > 1e-15;
                break;
            }
        }
        if (!moved) break;
    }
    return x;
}

// Moves coordinates toward zero while the objective stays within the tie tolerance.
Point shrink_toward_zero(const PointingProblem& prob, Point x, const Box& box) {
    const double f0 = prob.theta(x);
    for (int i = 0; i < 3; ++i) {
        Point y = x;
        y.v[i] = std::clamp(0.0, box.lo[i], box.hi[i]);
        if (prob.theta(y) <= f0 + 1e-12) x = y;
    }
    return x;
}

Point nearest_zero(const Box& box) {
    Point p{};
    for (int i = 0; i < 3; ++i) p.v[i] = std::clamp(0.0, box.lo[i], box.hi[i]);
    return p;
}

Point solve_opportunity(const PointingProblem& prob, const EulerAngles& prev, const Box& box) {
    Point start{{prev.alpha, prev.beta, prev.gamma}};
    start = project(start, box);

    constexpr int kGrid = 7;
    Point best_grid = nearest_zero(box);
    double best_grid_f = prob.theta(best_grid);
    for (int a = 0; a < kGrid; ++a)
        for (int b = 0; b < kGrid; ++b)
            for (int c = 0; c < kGrid; ++c) {
                const int idx[3] = {a, b, c};
                Point p{};
                for (int i = 0; i < 3; ++i)
                    p.v[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (kGrid - 1);
                const double f = prob.theta(p);
                if (better(f, p, best_grid_f, best_grid)) {
                    best_grid = p;
                    best_grid_f = f;
                }
            }

    const Point seeds[3] = {start, best_grid, nearest_zero(box)};
    Point best = nearest_zero(box);
    double best_f = prob.theta(best);
    for (const Point& seed : seeds) {
        const Point x = shrink_toward_zero(prob, descend(prob, seed, box), box);
        const double f = prob.theta(x);
        if (better(f, x, best_f, best)) {
            best = x;
            best_f = f;
        }
    }
    return best;
}

Vec3 lvlh_target(const StateVector& st, const Vec3& target_eci) {
    const Mat3 R = lvlh_frame(st);
    return R.transpose() * target_pointing(st.position, target_eci);
}

}  // namespace

double schedule_objective(const ClassicalOrbitalElements& orbit, const std::vector<EulerAngles>& angles,
                          const std::vector<OpportunityTarget>& targets, const TimeGrid& grid,
                          const EarthModel& earth) {
    double total = 0.0;
    for (std::size_t tau = 0; tau < angles.size() && tau < targets.size(); ++tau) {
        if (!targets[tau].active) continue;
        const StateVector st =
            coe_to_state(propagate(orbit, static_cast<double>(tau) * grid.control_step(), earth), earth);
        const Vec3 D = pointing_direction(Vec3::UnitZ(), angles[tau]);
        total += angular_difference(D, lvlh_target(st, targets[tau].position));
    }
    return total;
}

SlewSchedule optimize_slew_schedule(const ClassicalOrbitalElements& orbit,
                                    const std::vector<OpportunityTarget>& targets,
                                    const AgilityConfig& config, const TimeGrid& grid,
                                    const EarthModel& earth) {
    validate(config);
    if (std::abs(config.control_step - grid.control_step()) > 1e-9)
        throw std::invalid_argument("optimize_slew_schedule: control step differs from the time grid");
    const std::int64_t n = grid.num_control();
    if (static_cast<std::int64_t>(targets.size()) != n)
        throw std::invalid_argument("optimize_slew_schedule: need one target entry per control opportunity");

    SlewSchedule schedule;
    schedule.angles.reserve(static_cast<std::size_t>(n));
    EulerAngles prev{};
    for (std::int64_t tau = 0; tau < n; ++tau) {
        const Box box = feasible_box(prev, config);
        Point chosen = nearest_zero(box);
        if (targets[static_cast<std::size_t>(tau)].active) {
            const StateVector st =
                coe_to_state(propagate(orbit, static_cast<double>(tau) * config.control_step, earth), earth);
            const PointingProblem prob{lvlh_target(st, targets[static_cast<std::size_t>(tau)].position)};
            chosen = solve_opportunity(prob, prev, box);
        }
        prev = chosen.angles();
        schedule.angles.push_back(prev);
    }
    schedule.objective = schedule_objective(orbit, schedule.angles, targets, grid, earth);

    // The all-nadir schedule is always feasible; never return anything worse.
    const std::vector<EulerAngles> nadir(static_cast<std::size_t>(n));
    const double nadir_objective = schedule_objective(orbit, nadir, targets, grid, earth);
    if (nadir_objective < schedule.objective) {
        schedule.angles = nadir;
        schedule.objective = nadir_objective;
    }
    return schedule;
}

AgilityScore score_agility(const SlewSchedule& schedule, const std::vector<std::uint8_t>& visible,
                           const AgilityConfig& config, const TimeGrid& grid) {
    if (static_cast<std::int64_t>(visible.size()) != grid.num_steps())
        throw std::invalid_argument("score_agility: visibility length does not match the time grid");
    if (static_cast<std::int64_t>(schedule.angles.size()) != grid.num_control())
        throw std::invalid_argument("score_agility: schedule length does not match the control grid");
    AgilityScore score;
    score.objective_value = schedule.objective;
    score.per_step_reward.assign(visible.size(), 0.0);
    const double zeta = config.max_angle;
    for (std::size_t t = 0; t < visible.size(); ++t) {
        if (!visible[t]) continue;
        const EulerAngles& a = schedule.angles[static_cast<std::size_t>(control_index(static_cast<std::int64_t>(t), grid))];
        double reward = 1.0;
        if (zeta > 0.0)
            reward = 1.0 - (std::abs(a.alpha) / zeta + std::abs(a.beta) / zeta + std::abs(a.gamma) / zeta) / 6.0;
        score.per_step_reward[t] = reward;
        score.total_reward += reward;
    }
    return score;
}

std::vector<std::uint8_t> slewed_visibility(const ClassicalOrbitalElements& orbit, const SlewSchedule& schedule,
                                            const std::vector<OpportunityTarget>& step_targets,
                                            const FovSpec& fov, const TimeGrid& grid, const EarthModel& earth) {
    validate(fov);
    const std::int64_t T = grid.num_steps();
    if (static_cast<std::int64_t>(step_targets.size()) != T)
        throw std::invalid_argument("slewed_visibility: need one target entry per time step");
    std::vector<std::uint8_t> out(static_cast<std::size_t>(T), 0);
    for (std::int64_t t = 0; t < T; ++t) {
        const auto& tgt = step_targets[static_cast<std::size_t>(t)];
        if (!tgt.active) continue;
        const StateVector st = coe_to_state(propagate(orbit, grid.time_of(t), earth), earth);
        const EulerAngles& a = schedule.angles[static_cast<std::size_t>(control_index(t, grid))];
        const Vec3 axis = lvlh_frame(st) * pointing_direction(Vec3::UnitZ(), a);
        out[static_cast<std::size_t>(t)] = is_visible(st.position, tgt.position, fov.half_angle, axis, earth);
    }
    return out;
}

void write_schedule_csv(std::ostream& out, const SlewSchedule& schedule) {
    out << "tau,alpha_deg,beta_deg,gamma_deg\n";
    char buf[128];
    for (std::size_t tau = 0; tau < schedule.angles.size(); ++tau) {
        const auto& a = schedule.angles[tau];
        std::snprintf(buf, sizeof buf, "%zu,%.9f,%.9f,%.9f\n", tau + 1, a.alpha / kDeg, a.beta / kDeg,
                      a.gamma / kDeg);
        out << buf;
    }
}

}  // namespace conops
