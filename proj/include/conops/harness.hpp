#pragma once

#include "conops/agility.hpp"
#include "conops/maneuver.hpp"
#include "conops/mcrp.hpp"
#include "conops/tc_data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conops {

enum class ModelKind { Baseline, Agile, Phasing, Unrestricted };

/// One CONOPS configuration. Phasing models use num_plane_axis = 1.
struct ModelSpec {
    std::string name;
    ModelKind kind = ModelKind::Baseline;
    int stages = 1;
    int num_phases = 1;      // l
    int num_plane_axis = 1;  // m
    double budget = 2.0;     // km/s per satellite

    int slots_per_stage() const { return num_phases * (2 * num_plane_axis - 1); }
};

/// Reference models B, A, P1-P4, U1, U2 in report order.
std::vector<ModelSpec> standard_models(double budget = 2.0);
ModelSpec standard_model(const std::string& name, double budget = 2.0);

// Comma-separated names; "X..Y" expands to the reference models from X to Y
// inclusive, e.g. "B,A,P1..U2".
std::vector<ModelSpec> parse_model_list(const std::string& list, double budget = 2.0);

struct SatelliteSpec {
    std::string name;
    ClassicalOrbitalElements orbit;
};

/// The five reference disaster-monitoring orbits at the scenario epoch.
std::vector<SatelliteSpec> reference_satellites();

struct ScenarioConfig {
    std::vector<SatelliteSpec> satellites = reference_satellites();
    double fov_half_angle = 45.0 * kDeg;
    double dt = 100.0;
    AgilityConfig agility;
    int max_revs = 4;
    double budget = 2.0;
    std::int64_t node_limit = 2'000'000;
    std::vector<ModelSpec> models = standard_models();
    std::vector<std::string> track_paths;
    EarthModel earth = kEarth;
};

void validate(const ScenarioConfig& config);

// Flat "key = value" text, '#' starts a comment. Keys:
//   dt, control_step, fov_deg, max_rate_deg_s, max_angle_deg, max_revs,
//   budget_km_s, node_limit, j2 (on|off), models,
//   satellite = NAME a_km e i_deg raan_deg argp_deg nu_deg   (repeatable;
//     the first occurrence replaces the reference set),
//   track = PATH (repeatable), track_dir = DIR (every *.csv, sorted).
// Relative paths resolve against base_dir.
ScenarioConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);

struct ModelResult {
    std::string model;
    double z = 0.0;
    bool optimal = true;
    double upper_bound = 0.0;
    std::optional<ReconfigPlan> plan;     // P and U models
    std::vector<SlewSchedule> schedules;  // A, one per satellite
};

struct TrackResult {
    std::string track;
    std::vector<ModelResult> models;  // in config.models order
};

/// Runs every configured model on one track. Deterministic.
TrackResult run_track(const ScenarioConfig& config, const TcTrack& track);

/// Single model; P2/P4 style warm starts are skipped.
ModelResult run_model(const ScenarioConfig& config, const ModelSpec& model, const TcTrack& track);

/// The solver input of a P or U model on one track, for dumping and benchmarking.
McrpInstance build_mcrp_instance(const ScenarioConfig& config, const ModelSpec& model, const TcTrack& track);

struct PercentStats {
    std::string model;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n - 1) standard deviation; 0 when n < 2
    double min = 0.0;
    double max = 0.0;
    std::int64_t count = 0;     // tracks with a positive baseline
    std::int64_t excluded = 0;  // tracks with a zero baseline
};

struct ComparisonReport {
    std::vector<std::string> tracks;
    std::vector<std::string> models;
    std::vector<std::vector<double>> z;  // [track][model]
    std::vector<std::vector<bool>> optimal;
    double fov_deg = 45.0;
    double dt = 100.0;
};

/// 100 (z - zb) / zb, or nullopt when zb is not positive.
std::optional<double> percent_increase(double z_model, double z_baseline);

/// Statistics for every model except the baseline column "B". Throws if "B" is absent.
std::vector<PercentStats> percent_stats(const ComparisonReport& report);

/// counts[r][c] = number of tracks where model c scores strictly above model r.
std::vector<std::vector<std::int64_t>> outperformance_matrix(const std::vector<std::vector<double>>& z);

ComparisonReport make_report(const std::vector<TrackResult>& results, const ScenarioConfig& config);

enum class ReportFormat { Csv, Text };

// Csv: long-format track,model,z table (rewards.csv). Text: fixed-width tables
// of rewards, percent increase and outperformance with caveat notes.
std::string emit_report(const ComparisonReport& report, ReportFormat format);
std::string emit_pct_increase_csv(const ComparisonReport& report);
std::string emit_outperform_csv(const ComparisonReport& report);
/// track,seq,lat_deg,lon_deg rows for external plotting.
std::string emit_polylines_csv(const std::vector<TcTrack>& tracks);

// Runs every track (parallel over tracks with `threads` workers) and writes
// rewards.csv, pct_increase.csv, outperform.csv, report.txt, polylines.csv,
// plans/ and schedules/ under out_dir. Throws if any track fails, after
// all tracks have been attempted.
ComparisonReport run_corpus(const ScenarioConfig& config, const std::string& out_dir, int threads);

}  // namespace conops
