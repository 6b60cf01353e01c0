#include "conops/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace conops;

namespace {

ScenarioConfig quick_config() {
    ScenarioConfig c;
    c.dt = 300.0;
    c.satellites.resize(2);
    return c;
}

ComparisonReport table(std::vector<std::vector<double>> z, std::vector<std::string> models) {
    ComparisonReport r;
    r.models = std::move(models);
    for (std::size_t i = 0; i < z.size(); ++i) r.tracks.push_back("T" + std::to_string(i + 1));
    r.z = std::move(z);
    return r;
}

}  // namespace

TEST_CASE("model table") {
    const auto models = standard_models();
    REQUIRE(models.size() == 8);
    CHECK(models[0].name == "B");
    CHECK(standard_model("P1").slots_per_stage() == 10);
    CHECK(standard_model("P4").slots_per_stage() == 20);
    CHECK(standard_model("P4").stages == 4);
    CHECK(standard_model("U1").stages == 2);
    CHECK(standard_model("U2").slots_per_stage() == 135);
    CHECK(standard_model("U2").stages == 4);
    CHECK(parse_model_list("B,A,P1..U2").size() == 8);
    CHECK(parse_model_list("P2..P4").size() == 3);
    CHECK_THROWS(parse_model_list("X1"));
    CHECK_THROWS(parse_model_list("U2..P1"));
    CHECK_THROWS(parse_model_list("B,B"));
    CHECK_THROWS(standard_model("P9"));
}

TEST_CASE("config parsing") {
    const auto c = parse_config(
        "# comment\n"
        "dt = 300\n control_step = 3600\n fov_deg = 30  # trailing\n"
        "max_rate_deg_s = 2\nmax_angle_deg = 20\nmax_revs = 3\nbudget_km_s = 1.5\nnode_limit = 1000\n"
        "j2 = off\nmodels = B,P1\n"
        "satellite = \"SAT ONE\" 7000 0.001 97.5 10 20 30\n"
        "track = tracks/a.csv\n",
        "/base");
    CHECK(c.dt == 300.0);
    CHECK(c.agility.control_step == 3600.0);
    CHECK(c.fov_half_angle == doctest::Approx(30.0 * kDeg));
    CHECK(c.agility.max_rate_y == doctest::Approx(2.0 * kDeg));
    CHECK(c.agility.max_angle == doctest::Approx(20.0 * kDeg));
    CHECK(c.max_revs == 3);
    CHECK(c.node_limit == 1000);
    CHECK(c.earth.j2 == 0.0);
    REQUIRE(c.models.size() == 2);
    CHECK(c.models[1].budget == 1.5);
    REQUIRE(c.satellites.size() == 1);
    CHECK(c.satellites[0].name == "SAT ONE");
    CHECK(c.satellites[0].orbit.inclination == doctest::Approx(97.5 * kDeg));
    CHECK(c.track_paths == std::vector<std::string>{"/base/tracks/a.csv"});

    CHECK_THROWS(parse_config("bogus = 1\n"));
    CHECK_THROWS(parse_config("dt 100\n"));
    CHECK_THROWS(parse_config("fov_deg = 95\n"));
    CHECK_THROWS(parse_config("j2 = maybe\n"));
    CHECK_THROWS(parse_config("satellite = X 7000 0\n"));
    CHECK(parse_config("").satellites.size() == 5);
}

TEST_CASE("percent increase and statistics") {
    CHECK(*percent_increase(20.0, 10.0) == 100.0);
    CHECK(*percent_increase(10.0, 10.0) == 0.0);
    CHECK_FALSE(percent_increase(3.0, 0.0).has_value());

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> z(0, 30);
    std::vector<std::vector<double>> raw;
    for (int t = 0; t < 25; ++t) raw.push_back({double(z(rng)), double(z(rng)), double(z(rng))});
    const auto rep = table(raw, {"B", "X", "Y"});
    const auto stats = percent_stats(rep);
    REQUIRE(stats.size() == 2);
    for (std::size_t m = 0; m < 2; ++m) {
        std::vector<double> v;
        int excluded = 0;
        for (const auto& row : raw) {
            if (row[0] > 0) v.push_back(100.0 * (row[m + 1] - row[0]) / row[0]);
            else ++excluded;
        }
        double mean = 0.0;
        for (double x : v) mean += x / v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        CHECK(stats[m].mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(stats[m].stddev == doctest::Approx(std::sqrt(ss / (v.size() - 1))).epsilon(1e-12));
        CHECK(stats[m].min == *std::min_element(v.begin(), v.end()));
        CHECK(stats[m].max == *std::max_element(v.begin(), v.end()));
        CHECK(stats[m].excluded == excluded);
        CHECK(stats[m].count == static_cast<std::int64_t>(v.size()));
    }
    CHECK_THROWS(percent_stats(table(raw, {"X", "Y", "Z"})));
}

TEST_CASE("outperformance counts") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> z(0, 4);
    std::vector<std::vector<double>> raw;
    for (int t = 0; t < 40; ++t) raw.push_back({double(z(rng)), double(z(rng)), double(z(rng)), double(z(rng))});
    const auto c = outperformance_matrix(raw);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t q = 0; q < 4; ++q) {
            if (r == q) continue;
            std::int64_t ties = 0;
            for (const auto& row : raw) ties += row[r] == row[q];
            CHECK(c[r][q] + c[q][r] + ties == 40);
        }
    const auto same = outperformance_matrix({{1, 1}, {2, 2}});
    CHECK(same[0][1] == 0);
    CHECK(same[1][0] == 0);
    const auto dom = outperformance_matrix({{1, 2}, {0, 5}, {3, 4}});
    CHECK(dom[0][1] == 3);
}

TEST_CASE("report emitters") {
    const auto empty = table({}, {"B", "P1"});
    CHECK(emit_report(empty, ReportFormat::Csv) == "track,model,z\n");
    CHECK(emit_pct_increase_csv(empty) == "model,mean_pct,std_pct,min_pct,max_pct,n,excluded\n");
    const auto one = table({{2.0, 3.0}}, {"B", "P1"});
    CHECK(emit_report(one, ReportFormat::Csv) == "track,model,z\nT1,B,2.000000\nT1,P1,3.000000\n");
    CHECK(emit_outperform_csv(one) == "row,B,P1\nB,-,1\nP1,0,-\n");
    CHECK(emit_pct_increase_csv(one) == "model,mean_pct,std_pct,min_pct,max_pct,n,excluded\n"
                                        "P1,50.000000,0.000000,50.000000,50.000000,1,0\n");
    const auto no_base = table({{2.0}}, {"P1"});
    CHECK(emit_pct_increase_csv(no_base) == "model,mean_pct,std_pct,min_pct,max_pct,n,excluded\n");
    CHECK(emit_report(one, ReportFormat::Text) == emit_report(one, ReportFormat::Text));
    CHECK(emit_report(one, ReportFormat::Text).find("SGP4") != std::string::npos);
}

TEST_CASE("models on a short track") {
    auto cfg = quick_config();
    cfg.models = parse_model_list("B,A,P1,P2,U1");
    const auto track = synthesize_track(15, 3.75, Region::WestHemisphere);
    const auto a = run_track(cfg, track);
    const auto b = run_track(cfg, track);
    REQUIRE(a.models.size() == 5);
    const double zb = a.models[0].z;
    for (std::size_t m = 0; m < 5; ++m) {
        CHECK(a.models[m].z == b.models[m].z);
        if (m >= 2) {
            CHECK(a.models[m].z >= zb);
            CHECK(a.models[m].optimal);
            REQUIRE(a.models[m].plan);
        }
    }
    CHECK(a.models[3].z >= a.models[2].z);
    CHECK(a.models[1].schedules.size() == cfg.satellites.size());

    // a one-slot phasing model cannot move
    ModelSpec frozen{"P0", ModelKind::Phasing, 2, 1, 1, 2.0};
    CHECK(run_model(cfg, frozen, track).z == zb);

    const auto inst = build_mcrp_instance(cfg, standard_model("P1"), track);
    CHECK(inst.visibility.max_slots() == 10);
    CHECK(solve_mcrp(inst.visibility, inst.rewards, inst.costs).objective == a.models[2].z);
}

TEST_CASE("satellites that never see the storm") {
    auto cfg = quick_config();
    cfg.satellites = {{"LOW", {6900.0, 0.0, 20.0 * kDeg, 0.0, 0.0, 0.0, 0.0}}};
    cfg.models = parse_model_list("B,A,P1,U1");
    TcTrack track;
    track.name = "POLAR";
    for (int i = 0; i < 12; ++i) track.samples.push_back({21600.0 * i, 70.0 * kDeg, 0.1 * i});
    const auto r = run_track(cfg, track);
    for (const auto& m : r.models) CHECK(m.z == 0.0);
}

TEST_CASE("corpus outputs") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "conops_corpus_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "tracks");
    for (std::uint64_t seed : {15, 17}) {
        std::ofstream(dir / "tracks" / ("t" + std::to_string(seed) + ".csv"))
            << serialize_track(synthesize_track(seed, 3.0, Region::EastHemisphere));
    }
    auto cfg = quick_config();
    cfg.models = parse_model_list("B,P1");
    cfg.track_paths = {(dir / "tracks" / "t15.csv").string(), (dir / "tracks" / "t17.csv").string()};
    const auto rep = run_corpus(cfg, (dir / "out").string(), 2);
    CHECK(rep.z.size() == 2);
    for (const char* f : {"rewards.csv", "pct_increase.csv", "outperform.csv", "report.txt", "polylines.csv"})
        CHECK(fs::exists(dir / "out" / f));
    CHECK(fs::exists(dir / "out" / "plans"));

    cfg.track_paths.push_back((dir / "tracks" / "missing.csv").string());
    CHECK_THROWS(run_corpus(cfg, (dir / "out2").string(), 1));
    fs::remove_all(dir);
}
