#pragma once

#include "conops/astro.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace conops {

enum class AxisMode { Nadir, PointingDirection };

struct FovSpec {
    double half_angle = 45.0 * kDeg;
    AxisMode axis_mode = AxisMode::Nadir;
};

void validate(const FovSpec& fov);

/// Unit vector from the satellite to the target. Throws on coincident points.
Vec3 target_pointing(const Vec3& sat_pos, const Vec3& target_pos);

/// Target inside the cone (boundary inclusive) and not hidden behind the Earth.
/// In AxisMode::Nadir the cone_axis argument is ignored and -r/|r| is used.
bool is_visible(const StateVector& sat_state, const Vec3& target_eci, const FovSpec& fov,
                const Vec3& cone_axis, const EarthModel& earth = kEarth);
bool is_visible(const Vec3& sat_pos, const Vec3& target_eci, double half_angle,
                const Vec3& cone_axis, const EarthModel& earth = kEarth);

/// Line-of-sight test: the segment satellite -> target does not enter the Earth sphere.
bool line_of_sight(const Vec3& sat_pos, const Vec3& target_pos, const EarthModel& earth = kEarth);

// Target positions in ECI for every global time step, flat [t * num_targets + p].
// When `only` is non-empty, step t evaluates just target only[t] (-1: none)
// and every other (t, p) entry of a tensor is left at 0.
struct TargetEphemeris {
    std::int64_t num_steps = 0;
    std::int64_t num_targets = 0;
    std::vector<Vec3> positions;
    std::vector<std::int32_t> only;

    const Vec3& at(std::int64_t t, std::int64_t p) const { return positions[t * num_targets + p]; }
    bool evaluated(std::int64_t t, std::int64_t p) const { return only.empty() || only[t] == p; }
};

/// Candidate slots indexed [stage][satellite][slot]; stage 0 here is the first
/// reconfiguration stage (the initial stage-0 slot is not part of the tensor).
using StageSlots = std::vector<std::vector<std::vector<ClassicalOrbitalElements>>>;

// Binary visibility V[s][k][j][t][p]. Internally each (s, k, j) row of
// T_s * P bits starts on a 64-bit word boundary; the file format is densely
// packed with p fastest, then t, j, k, s.
class VisibilityTensor {
public:
    VisibilityTensor() = default;
    VisibilityTensor(std::int64_t stages, std::int64_t sats, std::int64_t max_slots,
                     std::int64_t steps_per_stage, std::int64_t targets);

    std::int64_t num_stages() const { return S_; }
    std::int64_t num_sats() const { return K_; }
    std::int64_t max_slots() const { return J_; }
    std::int64_t steps_per_stage() const { return T_; }
    std::int64_t num_targets() const { return P_; }

    /// Number of usable slots J_s^k; entries at j >= slot_count(s, k) are always 0.
    std::int64_t slot_count(std::int64_t s, std::int64_t k) const { return counts_[s * K_ + k]; }
    void set_slot_count(std::int64_t s, std::int64_t k, std::int64_t n);

    bool get(std::int64_t s, std::int64_t k, std::int64_t j, std::int64_t t, std::int64_t p) const;
    void set(std::int64_t s, std::int64_t k, std::int64_t j, std::int64_t t, std::int64_t p,
             bool value = true);

    /// Words of the (s, k, j) row; bit (t * P + p).
    std::span<const std::uint64_t> row(std::int64_t s, std::int64_t k, std::int64_t j) const;
    std::span<std::uint64_t> row(std::int64_t s, std::int64_t k, std::int64_t j);
    std::int64_t row_words() const { return row_words_; }

    std::uint64_t count_ones() const;

    /// Re-cut a single-stage tensor into `stages` equal stages (identical slot sets).
    VisibilityTensor split_stages(std::int64_t stages) const;

    void write(std::ostream& out) const;
    static VisibilityTensor read(std::istream& in);
    void save(const std::string& path) const;
    static VisibilityTensor load(const std::string& path);

    bool operator==(const VisibilityTensor& other) const;

private:
    std::int64_t S_ = 0, K_ = 0, J_ = 0, T_ = 0, P_ = 0;
    std::int64_t row_words_ = 0;
    std::vector<std::int64_t> counts_;
    std::vector<std::uint64_t> words_;
};

// Nadir-axis visibility of every (stage, sat, slot, step, target). Slots are
// propagated to the global time of stage s, local step t. OpenMP-parallel over
// (s, k, j) rows.
VisibilityTensor compute_vtw_tensor(const StageSlots& slots, const TargetEphemeris& targets,
                                    const TimeGrid& grid, const FovSpec& fov,
                                    const EarthModel& earth = kEarth);

/// Straight scalar loop over all indices; reference for tests and benchmarks.
VisibilityTensor compute_vtw_tensor_serial(const StageSlots& slots, const TargetEphemeris& targets,
                                           const TimeGrid& grid, const FovSpec& fov,
                                           const EarthModel& earth = kEarth);

}  // namespace conops
