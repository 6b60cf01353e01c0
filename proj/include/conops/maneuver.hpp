#pragma once

#include "conops/astro.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string_view>
#include <vector>

namespace conops {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Transfer types, in the order they are tried when costs tie.
enum class Strategy {
    Stay,
    Phasing,
    Inclination,
    Raan,
    CombinedPlane,
    InclinationPhasing,
    RaanPhasing,
    CombinedPhasing,
    None,  // no realizable strategy; delta_v is infinite
};

std::string_view to_string(Strategy s);

struct TransferCost {
    double delta_v = 0.0;        // km/s, or kInfiniteCost
    Strategy strategy = Strategy::Stay;
    double transfer_time = 0.0;  // s

    bool finite() const { return delta_v < kInfiniteCost; }
};

enum class GridMode { PhasingOnly, Unrestricted };

struct SlotGridSpec {
    int num_phases = 1;       // l
    int num_plane_axis = 1;   // m, options per axis including the initial plane
    double incl_span = 0.0;   // rad, extreme inclination offset; 0 = size from the budget
    double raan_span = 0.0;   // rad, extreme RAAN offset; 0 = size from the budget
    bool include_initial = true;
};

/// Per-stage transfer costs c[s][k][i][j] (km/s) and per-satellite budgets.
/// Stage 0 here is the first reconfiguration stage; its source set is the
/// stage-0 (initial) slot set.
struct CostMatrix {
    std::vector<std::vector<std::vector<std::vector<double>>>> entries;
    std::vector<std::vector<std::vector<std::vector<Strategy>>>> strategies;
    std::vector<double> budget;

    std::size_t num_stages() const { return entries.size(); }
    double at(std::size_t s, std::size_t k, std::size_t i, std::size_t j) const { return entries[s][k][i][j]; }
};

// Two-impulse coplanar phasing rendezvous on a near-circular orbit. The
// target slot trails the chaser by phase_offset (rad); the chaser flies
// k_tfr revolutions of a phasing ellipse while the target flies k_tgt
// revolutions plus the offset, k_tgt, k_tfr in 1..max_revs. Pairs whose
// phasing ellipse dips below R_E + 100 km are discarded.
TransferCost phasing_cost(const ClassicalOrbitalElements& orbit, double phase_offset, int max_revs = 4,
                          const EarthModel& earth = kEarth);

/// Single node impulse 2 v sin(|di| / 2).
TransferCost inclination_change_cost(const ClassicalOrbitalElements& orbit, double di,
                                     const EarthModel& earth = kEarth);

/// RAAN-only change at fixed inclination; cos(theta) = cos^2 i + sin^2 i cos(dRAAN).
TransferCost raan_change_cost(const ClassicalOrbitalElements& orbit, double draan,
                              const EarthModel& earth = kEarth);

/// Simultaneous change: cos(theta) = cos i1 cos i2 + sin i1 sin i2 cos(dRAAN), i2 = i1 + di.
TransferCost combined_plane_cost(const ClassicalOrbitalElements& orbit, double di, double draan,
                                 const EarthModel& earth = kEarth);

/// Plane-to-plane rotation angle between the two orbit normals.
double plane_angle(double i1, double raan1, double i2, double raan2);

/// Phase of a near-circular orbit: argument of latitude omega + nu.
double orbit_phase(const ClassicalOrbitalElements& coe);

// Cheapest of the seven transfer types (plane change first, then phasing
// priced on the destination orbit). Both orbits must share a semi-major axis.
TransferCost transfer_cost(const ClassicalOrbitalElements& from, const ClassicalOrbitalElements& to,
                           int max_revs = 4, const EarthModel& earth = kEarth);

// Candidate slots for one satellite. Index 0 is always the initial slot.
// Unrestricted layout: plane 0 is the initial plane, then the inclination-axis
// planes, then the RAAN-axis planes; each plane carries num_phases phases in
// increasing order starting from the initial phase.
std::vector<ClassicalOrbitalElements> generate_slot_grid(const ClassicalOrbitalElements& initial,
                                                         const SlotGridSpec& spec, double budget,
                                                         GridMode mode, const EarthModel& earth = kEarth);

/// Largest inclination offset a single budget-sized impulse can buy.
double inclination_span_for_budget(const ClassicalOrbitalElements& orbit, double budget,
                                   const EarthModel& earth = kEarth);
/// Largest RAAN offset a single budget-sized impulse can buy at fixed inclination.
double raan_span_for_budget(const ClassicalOrbitalElements& orbit, double budget,
                            const EarthModel& earth = kEarth);

/// Signed plane offsets for m options on one axis, initial plane excluded.
std::vector<double> axis_offsets(int m, double span);

// Per-satellite slot lists by stage: grids[s][k], s = 0 is the initial
// (stage-0) set. Cost entry c[s][k][i][j] prices grids[s][k][i] ->
// grids[s+1][k][j], both propagated to the start of stage s+1.
// OpenMP-parallel over matrix rows.
CostMatrix build_cost_matrix(const std::vector<std::vector<std::vector<ClassicalOrbitalElements>>>& grids,
                             const std::vector<double>& stage_start_times, int max_revs,
                             const std::vector<double>& budget, const EarthModel& earth = kEarth);

/// Single-threaded reference for build_cost_matrix.
CostMatrix build_cost_matrix_serial(const std::vector<std::vector<std::vector<ClassicalOrbitalElements>>>& grids,
                                    const std::vector<double>& stage_start_times, int max_revs,
                                    const std::vector<double>& budget, const EarthModel& earth = kEarth);

/// CSV with columns stage,sat,from_slot,to_slot,delta_v_km_s,strategy (1-based indices).
void write_cost_csv(std::ostream& out, const CostMatrix& costs);

}  // namespace conops
