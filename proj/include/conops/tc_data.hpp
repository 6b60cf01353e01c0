#pragma once

#include "conops/astro.hpp"
#include "conops/visibility.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace conops {

struct TrackSample {
    double time = 0.0;       // s from the first sample
    double latitude = 0.0;   // rad
    double longitude = 0.0;  // rad

    bool operator==(const TrackSample&) const = default;
};

/// Cyclone track sampled at a fixed interval (six hours by default).
struct TcTrack {
    std::string name;
    std::vector<TrackSample> samples;
    double sample_interval = 21600.0;  // s

    double duration() const {
        return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) * sample_interval;
    }
    bool operator==(const TcTrack&) const = default;
};

/// Malformed CSV input; line() is 1-based and includes the header.
class TrackParseError : public std::runtime_error {
public:
    TrackParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// CSV with header name,time_hours,lat_deg,lon_deg. Samples must be uniformly
// spaced (tolerance 1e-6 h), at least two, with |lat| <= 90 and
// lon in [-180, 360). Times are re-based so the first sample sits at 0.
TcTrack parse_track_csv(std::string_view text);
TcTrack load_track_csv(const std::string& path);

/// Canonical CSV text: fixed 6-decimal hours and degrees, longitudes in [-180, 180).
std::string serialize_track(const TcTrack& track);

/// Static target points with their global active step ranges [first, last).
struct TargetSet {
    std::vector<GeodeticPoint> points;
    std::vector<std::pair<std::int64_t, std::int64_t>> windows;

    /// Index of the point active at global step t.
    std::int64_t active_point(std::int64_t t) const;
};

/// Throws std::invalid_argument unless the grid duration equals the track duration.
TargetSet track_to_targets(const TcTrack& track, const TimeGrid& grid);

/// ECI position of every point at every step of the grid.
TargetEphemeris target_ephemeris(const TargetSet& targets, const TimeGrid& grid, const EarthModel& earth = kEarth);

enum class Region { WestHemisphere, EastHemisphere };

// Deterministic synthetic track: tropical genesis (|lat0| <= 30 deg), westward
// drift that recurves poleward, at most 200 km per six hours. Duration must
// be a whole number of six-hour intervals within [2.75, 15.5] days.
TcTrack synthesize_track(std::uint64_t seed, double duration_days, Region region);

/// Corpus duration for a seed: a whole number of six-hour intervals in [2.75, 15.5] days.
double synthetic_duration_days(std::uint64_t seed);

/// Haversine distance on a sphere of the given radius, km.
double great_circle_distance(double lat1, double lon1, double lat2, double lon2, double radius = kEarth.radius);

}  // namespace conops
