#include "conops/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace conops {

namespace {

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string file_stem(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::optional<double> percent_increase(double z_model, double z_baseline) {
    if (!(z_baseline > 0.0)) return std::nullopt;
    return 100.0 * (z_model - z_baseline) / z_baseline;
}

std::vector<PercentStats> percent_stats(const ComparisonReport& report) {
    const auto b = std::find(report.models.begin(), report.models.end(), "B");
    if (b == report.models.end()) throw std::invalid_argument("percent_stats: baseline model B is not in the report");
    const auto base = static_cast<std::size_t>(b - report.models.begin());
    std::vector<PercentStats> out;
    for (std::size_t m = 0; m < report.models.size(); ++m) {
        if (m == base) continue;
        PercentStats st{report.models[m]};
        std::vector<double> values;
        for (const auto& row : report.z) {
            if (auto pct = percent_increase(row[m], row[base])) values.push_back(*pct);
            else ++st.excluded;
        }
        st.count = static_cast<std::int64_t>(values.size());
        if (!values.empty()) {
            double sum = 0.0;
            for (double x : values) sum += x;
            st.mean = sum / static_cast<double>(values.size());
            double ss = 0.0;
            for (double x : values) ss += (x - st.mean) * (x - st.mean);
            st.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
            st.min = *std::min_element(values.begin(), values.end());
            st.max = *std::max_element(values.begin(), values.end());
        }
        out.push_back(st);
    }
    return out;
}

std::vector<std::vector<std::int64_t>> outperformance_matrix(const std::vector<std::vector<double>>& z) {
    const std::size_t M = z.empty() ? 0 : z.front().size();
    std::vector<std::vector<std::int64_t>> counts(M, std::vector<std::int64_t>(M, 0));
    for (const auto& row : z) {
        if (row.size() != M) throw std::invalid_argument("outperformance_matrix: ragged table");
        for (std::size_t r = 0; r < M; ++r)
            for (std::size_t c = 0; c < M; ++c)
                if (r != c && row[c] > row[r]) ++counts[r][c];
    }
    return counts;
}

ComparisonReport make_report(const std::vector<TrackResult>& results, const ScenarioConfig& config) {
    ComparisonReport rep;
    rep.fov_deg = config.fov_half_angle / kDeg;
    rep.dt = config.dt;
    for (const auto& m : config.models) rep.models.push_back(m.name);
    for (const auto& tr : results) {
        rep.tracks.push_back(tr.track);
        std::vector<double> z;
        std::vector<bool> opt;
        for (const auto& mr : tr.models) {
            z.push_back(mr.z);
            opt.push_back(mr.optimal);
        }
        rep.z.push_back(std::move(z));
        rep.optimal.push_back(std::move(opt));
    }
    return rep;
}

std::string emit_report(const ComparisonReport& rep, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out = "track,model,z\n";
        for (std::size_t t = 0; t < rep.tracks.size(); ++t)
            for (std::size_t m = 0; m < rep.models.size(); ++m)
                out += csv_field(rep.tracks[t]) + "," + rep.models[m] + "," + fmt("%.6f", rep.z[t][m]) + "\n";
        return out;
    }

    std::string out;
    out += "CONOPS comparison: FOV half-angle " + fmt("%.1f", rep.fov_deg) + " deg, dt " + fmt("%.0f", rep.dt) +
           " s, " + std::to_string(rep.tracks.size()) + " tracks\n";
    out += "Note: orbits use two-body plus J2 secular propagation in place of SGP4.\n";
    out += "Note: Model A sums per-satellite rewards without deduplication; reconfiguration models count each\n";
    out += "      (step, point) once regardless of how many satellites see it.\n\n";

    out += "Observation reward z\n" + pad("track", 16);
    for (const auto& m : rep.models) out += pad(m, 12);
    out += "\n";
    bool any_gap = false;
    for (std::size_t t = 0; t < rep.tracks.size(); ++t) {
        out += pad(rep.tracks[t], 16);
        for (std::size_t m = 0; m < rep.models.size(); ++m) {
            const bool gap = !rep.optimal.empty() && !rep.optimal[t][m];
            any_gap = any_gap || gap;
            out += pad(fmt("%.2f", rep.z[t][m]) + (gap ? "*" : ""), 12);
        }
        out += "\n";
    }
    if (any_gap) out += "* node limit reached; value is the best plan found, not proven optimal\n";

    if (std::find(rep.models.begin(), rep.models.end(), "B") != rep.models.end()) {
        out += "\nPercent increase over Model B\n";
        out += pad("model", 8) + pad("mean", 12) + pad("std", 12) + pad("min", 12) + pad("max", 12) + pad("n", 6) +
               pad("excl", 6) + "\n";
        for (const auto& st : percent_stats(rep))
            out += pad(st.model, 8) + pad(fmt("%.2f", st.mean), 12) + pad(fmt("%.2f", st.stddev), 12) +
                   pad(fmt("%.2f", st.min), 12) + pad(fmt("%.2f", st.max), 12) + pad(std::to_string(st.count), 6) +
                   pad(std::to_string(st.excluded), 6) + "\n";
    }

    out += "\nTracks on which the column model beats the row model\n" + pad("", 8);
    for (const auto& m : rep.models) out += pad(m, 6);
    out += "\n";
    const auto counts = outperformance_matrix(rep.z);
    for (std::size_t r = 0; r < rep.models.size(); ++r) {
        out += pad(rep.models[r], 8);
        for (std::size_t c = 0; c < rep.models.size(); ++c)
            out += pad(r == c ? "-" : std::to_string(rep.z.empty() ? 0 : counts[r][c]), 6);
        out += "\n";
    }
    return out;
}

std::string emit_pct_increase_csv(const ComparisonReport& rep) {
    std::string out = "model,mean_pct,std_pct,min_pct,max_pct,n,excluded\n";
    if (rep.tracks.empty() || std::find(rep.models.begin(), rep.models.end(), "B") == rep.models.end()) return out;
    for (const auto& st : percent_stats(rep))
        out += st.model + "," + fmt("%.6f", st.mean) + "," + fmt("%.6f", st.stddev) + "," + fmt("%.6f", st.min) +
               "," + fmt("%.6f", st.max) + "," + std::to_string(st.count) + "," + std::to_string(st.excluded) + "\n";
    return out;
}

std::string emit_outperform_csv(const ComparisonReport& rep) {
    std::string out = "row";
    for (const auto& m : rep.models) out += "," + m;
    out += "\n";
    const auto counts = outperformance_matrix(rep.z);
    for (std::size_t r = 0; r < rep.models.size(); ++r) {
        out += rep.models[r];
        for (std::size_t c = 0; c < rep.models.size(); ++c)
            out += "," + (r == c ? std::string("-") : std::to_string(rep.z.empty() ? 0 : counts[r][c]));
        out += "\n";
    }
    return out;
}

std::string emit_polylines_csv(const std::vector<TcTrack>& tracks) {
    std::string out = "track,seq,lat_deg,lon_deg\n";
    for (const auto& tr : tracks)
        for (std::size_t i = 0; i < tr.samples.size(); ++i)
            out += csv_field(tr.name) + "," + std::to_string(i + 1) + "," + fmt("%.6f", tr.samples[i].latitude / kDeg) +
                   "," + fmt("%.6f", tr.samples[i].longitude / kDeg) + "\n";
    return out;
}

ComparisonReport run_corpus(const ScenarioConfig& config, const std::string& out_dir, int threads) {
    namespace fs = std::filesystem;
    validate(config);
    if (threads < 1) throw std::invalid_argument("run_corpus: threads must be >= 1");

    const auto n = static_cast<std::int64_t>(config.track_paths.size());
    std::vector<TcTrack> tracks(static_cast<std::size_t>(n));
    std::vector<TrackResult> results(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            tracks[i] = load_track_csv(config.track_paths[i]);
            results[i] = run_track(config, tracks[i]);
        } catch (const std::exception& e) {
            errors[i] = config.track_paths[i] + ": " + e.what();
        }
    }
    std::string failed;
    for (const auto& e : errors)
        if (!e.empty()) failed += e + "\n";
    if (!failed.empty()) throw std::runtime_error("failed tracks:\n" + failed);

    const ComparisonReport rep = make_report(results, config);
    const fs::path out(out_dir);
    fs::create_directories(out / "plans");
    fs::create_directories(out / "schedules");
    write_file(out / "rewards.csv", emit_report(rep, ReportFormat::Csv));
    write_file(out / "pct_increase.csv", emit_pct_increase_csv(rep));
    write_file(out / "outperform.csv", emit_outperform_csv(rep));
    write_file(out / "report.txt", emit_report(rep, ReportFormat::Text));
    write_file(out / "polylines.csv", emit_polylines_csv(tracks));
    for (const auto& tr : results) {
        const std::string stem = file_stem(tr.track);
        for (const auto& mr : tr.models) {
            if (mr.plan) {
                std::ofstream f(out / "plans" / (stem + "_" + mr.model + ".csv"), std::ios::binary);
                write_plan_csv(f, *mr.plan);
            }
            for (std::size_t k = 0; k < mr.schedules.size(); ++k) {
                std::ofstream f(out / "schedules" / (stem + "_" + mr.model + "_sat" + std::to_string(k + 1) + ".csv"),
                                std::ios::binary);
                write_schedule_csv(f, mr.schedules[k]);
            }
        }
    }
    return rep;
}

}  // namespace conops
