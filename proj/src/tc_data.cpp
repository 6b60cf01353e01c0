#include "conops/tc_data.hpp"

#include "conops/mcrp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace conops {

namespace {

constexpr double kSixHours = 21600.0;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line, const char* what) {
    field = trim(field);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(x))
        throw TrackParseError(line, std::string("cannot parse ") + what + " '" + std::string(field) + "'");
    return x;
}

double wrap_longitude(double lon) {
    double x = wrap_pi(lon);
    if (x >= kPi) x -= kTwoPi;
    return x;
}

}  // namespace

TcTrack parse_track_csv(std::string_view text) {
    TcTrack track;
    std::vector<double> hours;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "name,time_hours,lat_deg,lon_deg")
                throw TrackParseError(line_no, "expected header name,time_hours,lat_deg,lon_deg");
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        for (std::size_t start = 0;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 4)
            throw TrackParseError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
        const std::string name(trim(fields[0]));
        if (name.empty()) throw TrackParseError(line_no, "empty track name");
        if (track.samples.empty()) track.name = name;
        else if (name != track.name) throw TrackParseError(line_no, "track name changes to '" + name + "'");
        const double h = parse_number(fields[1], line_no, "time_hours");
        const double lat = parse_number(fields[2], line_no, "lat_deg");
        const double lon = parse_number(fields[3], line_no, "lon_deg");
        if (std::abs(lat) > 90.0) throw TrackParseError(line_no, "latitude outside [-90, 90]");
        if (lon < -180.0 || lon >= 360.0) throw TrackParseError(line_no, "longitude outside [-180, 360)");
        hours.push_back(h);
        track.samples.push_back({0.0, lat * kDeg, wrap_longitude(lon * kDeg)});
    }
    if (!header_seen) throw TrackParseError(line_no == 0 ? 1 : line_no, "missing header");
    if (track.samples.size() < 2) throw std::invalid_argument("track: at least two samples are required");

    const double step_h = hours[1] - hours[0];
    if (!(step_h > 0.0)) throw std::invalid_argument("track: sample times must increase");
    for (std::size_t i = 1; i < hours.size(); ++i)
        if (std::abs((hours[i] - hours[i - 1]) - step_h) > 1e-6)
            throw std::invalid_argument("track: non-uniform sample spacing at sample " + std::to_string(i + 1));
    track.sample_interval = step_h * 3600.0;
    for (std::size_t i = 0; i < track.samples.size(); ++i)
        track.samples[i].time = static_cast<double>(i) * track.sample_interval;
    return track;
}

TcTrack load_track_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_track_csv(buf.str());
}

std::string serialize_track(const TcTrack& track) {
    std::string out = "name,time_hours,lat_deg,lon_deg\n";
    char buf[160];
    for (const auto& s : track.samples) {
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f\n", s.time / 3600.0, s.latitude / kDeg,
                      wrap_longitude(s.longitude) / kDeg);
        out += track.name;
        out += buf;
    }
    return out;
}

std::int64_t TargetSet::active_point(std::int64_t t) const {
    const auto it = std::upper_bound(windows.begin(), windows.end(), t,
                                     [](std::int64_t x, const auto& w) { return x < w.second; });
    if (it == windows.end() || t < it->first) throw std::out_of_range("TargetSet: step outside every window");
    return it - windows.begin();
}

TargetSet track_to_targets(const TcTrack& track, const TimeGrid& grid) {
    if (track.samples.size() < 2) throw std::invalid_argument("track_to_targets: track needs two samples");
    if (std::abs(grid.duration() - track.duration()) > 1e-6)
        throw std::invalid_argument("track_to_targets: grid duration differs from the track duration");
    TargetSet set;
    const auto P = static_cast<std::int64_t>(track.samples.size());
    for (std::int64_t p = 0; p < P; ++p) {
        set.points.push_back({track.samples[p].latitude, track.samples[p].longitude, 0.0});
        set.windows.push_back(reward_window(p, grid.num_steps(), P));
    }
    return set;
}

TargetEphemeris target_ephemeris(const TargetSet& targets, const TimeGrid& grid, const EarthModel& earth) {
    TargetEphemeris eph;
    eph.num_steps = grid.num_steps();
    eph.num_targets = static_cast<std::int64_t>(targets.points.size());
    eph.positions.resize(static_cast<std::size_t>(eph.num_steps * eph.num_targets));
    for (std::int64_t t = 0; t < eph.num_steps; ++t)
        for (std::int64_t p = 0; p < eph.num_targets; ++p)
            eph.positions[t * eph.num_targets + p] = geodetic_to_eci(targets.points[p], grid.time_of(t), earth);
    return eph;
}

double great_circle_distance(double lat1, double lon1, double lat2, double lon2, double radius) {
    const double sl = std::sin((lat2 - lat1) / 2.0);
    const double so = std::sin((lon2 - lon1) / 2.0);
    const double h = sl * sl + std::cos(lat1) * std::cos(lat2) * so * so;
    return 2.0 * radius * std::asin(std::min(1.0, std::sqrt(h)));
}

double synthetic_duration_days(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return 2.75 + 0.25 * static_cast<double>(rng() % 52);
}

TcTrack synthesize_track(std::uint64_t seed, double duration_days, Region region) {
    if (!(duration_days >= 2.75 - 1e-12 && duration_days <= 15.5 + 1e-12))
        throw std::invalid_argument("synthesize_track: duration must lie in [2.75, 15.5] days");
    const double intervals = duration_days * 86400.0 / kSixHours;
    if (std::abs(intervals - std::round(intervals)) > 1e-9)
        throw std::invalid_argument("synthesize_track: duration must be a whole number of six-hour intervals");
    const auto n = static_cast<int>(std::round(intervals)) + 1;

    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + (region == Region::WestHemisphere ? 1 : 2));
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1p-53; };

    const bool west = region == Region::WestHemisphere;
    double lat = (west ? 10.0 : 8.0) + 12.0 * uniform();
    double lon = west ? -75.0 + 40.0 * uniform() : 125.0 + 35.0 * uniform();
    double heading = 275.0 + 20.0 * uniform();  // deg clockwise from north
    double speed = 70.0 + 50.0 * uniform();     // km per six hours
    const int recurve_at = static_cast<int>(n * (0.3 + 0.3 * uniform()));
    const double turn_rate = 8.0 + 6.0 * uniform();

    TcTrack track;
    track.name = std::string(west ? "SYN-W" : "SYN-E") + std::to_string(seed);
    track.sample_interval = kSixHours;
    for (int i = 0; i < n; ++i) {
        track.samples.push_back({i * kSixHours, lat * kDeg, wrap_longitude(lon * kDeg)});
        if (i >= recurve_at) {
            heading = std::min(heading + turn_rate, 405.0);
            speed += 5.0;
        }
        heading += 6.0 * (uniform() - 0.5);
        speed = std::clamp(speed + 10.0 * (uniform() - 0.5), 40.0, 190.0);
        const double course = lat > 55.0 ? 430.0 : heading;  // drift east at high latitude

        const double d = speed / kEarth.radius;
        const double az = course * kDeg;
        const double p1 = lat * kDeg, l1 = lon * kDeg;
        const double p2 = std::asin(std::sin(p1) * std::cos(d) + std::cos(p1) * std::sin(d) * std::cos(az));
        const double l2 =
            l1 + std::atan2(std::sin(az) * std::sin(d) * std::cos(p1), std::cos(d) - std::sin(p1) * std::sin(p2));
        lat = p2 / kDeg;
        lon = wrap_longitude(l2) / kDeg;
    }
    return track;
}

}  // namespace conops
