#pragma once

#include "conops/maneuver.hpp"
#include "conops/visibility.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace conops {

/// Observation reward pi[s][t][p] and coverage requirement r[s][t][p], flat (s, t, p).
struct RewardMatrix {
    std::int64_t num_stages = 0;
    std::int64_t steps_per_stage = 0;
    std::int64_t num_targets = 0;
    std::vector<double> pi;
    std::vector<std::int32_t> requirement;

    RewardMatrix() = default;
    RewardMatrix(std::int64_t stages, std::int64_t steps_per_stage, std::int64_t targets);

    std::size_t index(std::int64_t s, std::int64_t t, std::int64_t p) const {
        return static_cast<std::size_t>((s * steps_per_stage + t) * num_targets + p);
    }
    double reward(std::int64_t s, std::int64_t t, std::int64_t p) const { return pi[index(s, t, p)]; }
    std::int32_t req(std::int64_t s, std::int64_t t, std::int64_t p) const { return requirement[index(s, t, p)]; }

    bool operator==(const RewardMatrix&) const = default;
};

void validate(const RewardMatrix& rewards);

/// Global 0-based step range [first, last) during which point p (0-based) holds the reward.
std::pair<std::int64_t, std::int64_t> reward_window(std::int64_t p, std::int64_t num_steps, std::int64_t num_points);

/// One active point per step, unit reward, single-satellite requirement.
RewardMatrix build_reward_matrix(std::int64_t num_steps, std::int64_t num_points, std::int64_t num_stages);

// paths[k] has S + 1 entries; entry 0 indexes the initial (stage-0) set and
// entry s + 1 indexes the slots of tensor stage s.
struct ReconfigPlan {
    std::vector<std::vector<std::int64_t>> paths;
    std::vector<std::vector<double>> stage_cost;  // [k][s], km/s
    double objective = 0.0;
    double total_delta_v = 0.0;
    bool optimal = true;        // false when the node limit stopped the search
    double upper_bound = 0.0;   // proven bound on the optimum
    std::int64_t nodes = 0;
};

/// y[s][t][p] in {0, 1}, flat like RewardMatrix.
struct CoverageProfile {
    std::int64_t num_stages = 0;
    std::int64_t steps_per_stage = 0;
    std::int64_t num_targets = 0;
    std::vector<std::uint8_t> y;
};

ReconfigPlan all_stay_plan(std::int64_t num_sats, std::int64_t num_stages);

/// Throws std::invalid_argument on dimension mismatches between the three inputs.
void check_instance(const VisibilityTensor& v, const RewardMatrix& rewards, const CostMatrix& costs);

// Fills stage_cost and total_delta_v from the cost matrix. Throws on
// out-of-range indices, a path not starting at slot 0, infinite edges, or a
// budget overrun beyond `tolerance`.
void price_plan(ReconfigPlan& plan, const CostMatrix& costs, double tolerance = 1e-9);

CoverageProfile coverage_profile(const ReconfigPlan& plan, const VisibilityTensor& v, const RewardMatrix& rewards);

/// z = sum of pi * y, summed in (s, t, p) order.
double score_plan(const ReconfigPlan& plan, const VisibilityTensor& v, const RewardMatrix& rewards);

struct McrpOptions {
    std::int64_t node_limit = 5'000'000;
    double budget_tolerance = 1e-9;          // km/s slack on the per-satellite budget
    std::vector<ReconfigPlan> warm_starts;   // priced and scored before the search
};

// Exact depth-first branch and bound over (satellite, stage) decisions.
// Ties: larger z, then smaller total delta-v, then lexicographically smaller
// path vector (satellite-major). If node_limit is hit the incumbent is
// returned with optimal = false and upper_bound set.
ReconfigPlan solve_mcrp(const VisibilityTensor& v, const RewardMatrix& rewards, const CostMatrix& costs,
                        const McrpOptions& options = {});

/// Enumerates every joint path; throws if there are more than 1e7.
ReconfigPlan solve_mcrp_exhaustive(const VisibilityTensor& v, const RewardMatrix& rewards,
                                   const CostMatrix& costs, double budget_tolerance = 1e-9);

/// CSV with columns sat,stage,from_slot,to_slot,delta_v_km_s (1-based).
void write_plan_csv(std::ostream& out, const ReconfigPlan& plan);

// Self-contained solver instance. Binary layout (little-endian):
//   magic "MCRPINST", u64 version = 1, u64 S, K, J, T_s, P,
//   f64 budget[K], for each (s, k): u64 rows, u64 cols, f64 costs[rows * cols],
//   f64 pi[S * T_s * P], u64 r[S * T_s * P], then the visibility tensor dump.
struct McrpInstance {
    VisibilityTensor visibility;
    RewardMatrix rewards;
    CostMatrix costs;
};

void write_instance(std::ostream& out, const McrpInstance& instance);
McrpInstance read_instance(std::istream& in);
void save_instance(const std::string& path, const McrpInstance& instance);
McrpInstance load_instance(const std::string& path);

}  // namespace conops
