// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.
//
//   acceptance [scenario.conf] [--skip-corpus]

#include "conops/agility.hpp"
#include "conops/astro.hpp"
#include "conops/harness.hpp"
#include "conops/maneuver.hpp"
#include "conops/mcrp.hpp"
#include "instances.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace conops;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_solver() {
    const auto t0 = std::chrono::steady_clock::now();
    int agree = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        const auto inst = testgen::random_instance(90000 + static_cast<std::uint64_t>(i));
        const auto fast = solve_mcrp(inst.visibility, inst.rewards, inst.costs);
        const auto slow = solve_mcrp_exhaustive(inst.visibility, inst.rewards, inst.costs);
        agree += fast.optimal && fast.objective == slow.objective &&
                 fast.objective == score_plan(fast, inst.visibility, inst.rewards);
    }
    const double secs = seconds_since(t0);
    report(1, agree == n && secs < 60.0, fmt("%.0f/200 instances match exhaustive search, %.2f s", agree, secs));
}

int index_of(const ComparisonReport& r, const std::string& model) {
    for (std::size_t m = 0; m < r.models.size(); ++m)
        if (r.models[m] == model) return static_cast<int>(m);
    return -1;
}

// Criteria 2 and 3 share the single-threaded corpus run, which 8 and 9 reuse.
ComparisonReport criteria_corpus(const ScenarioConfig& base, const fs::path& scratch) {
    // 2: reconfiguration never loses to the fixed constellation
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = run_corpus(base, (scratch / "run1").string(), 1);
    const double secs = seconds_since(t0);
    const int b = index_of(rep, "B");
    const std::vector<std::string> recon{"P1", "P2", "P3", "P4", "U1", "U2"};
    int ok_tracks = 0;
    bool all_optimal = true;
    for (std::size_t t = 0; t < rep.tracks.size(); ++t) {
        bool ok = true;
        for (const auto& m : recon) ok = ok && rep.z[t][index_of(rep, m)] >= rep.z[t][b];
        ok_tracks += ok;
    }
    for (const auto& row : rep.optimal)
        for (bool o : row) all_optimal = all_optimal && o;
    const double limit = base.dt >= 300.0 ? 300.0 : 600.0;
    report(2, ok_tracks == static_cast<int>(rep.tracks.size()) && rep.tracks.size() == 20 && secs < limit,
           fmt("%.0f/%.0f tracks with every P/U model >= B, corpus run %.1f s", ok_tracks,
               static_cast<double>(rep.tracks.size()), secs) +
               (all_optimal ? ", all solves proven optimal" : ", some solves hit the node limit"));

    // 3: more slots help, per track and on average
    int per_track = 0;
    const int p1 = index_of(rep, "P1"), p2 = index_of(rep, "P2"), p3 = index_of(rep, "P3"), p4 = index_of(rep, "P4");
    for (const auto& row : rep.z) per_track += row[p2] >= row[p1] && row[p4] >= row[p3];
    double mean[4] = {0, 0, 0, 0};
    for (const auto& s : percent_stats(rep)) {
        if (s.model == "P1") mean[0] = s.mean;
        if (s.model == "P2") mean[1] = s.mean;
        if (s.model == "P3") mean[2] = s.mean;
        if (s.model == "P4") mean[3] = s.mean;
    }
    report(3, per_track == static_cast<int>(rep.z.size()) && mean[0] <= mean[1] && mean[2] <= mean[3],
           fmt("%.0f tracks with P2>=P1 and P4>=P3; ", per_track) +
               fmt("mean %% increase P1 %.2f, P2 %.2f, ", mean[0], mean[1]) + fmt("P3 %.2f, P4 %.2f", mean[2], mean[3]));
    return rep;
}

void criteria_repeatability(const ScenarioConfig& base, const fs::path& scratch, const ComparisonReport& rep) {
    // 8: outputs do not depend on the thread count
    run_corpus(base, (scratch / "run2").string(), 2);
    bool same = true;
    for (const char* f : {"rewards.csv", "pct_increase.csv", "outperform.csv"}) {
        const auto a = slurp(scratch / "run1" / f), c = slurp(scratch / "run2" / f);
        same = same && !a.empty() && a == c;
    }
    report(8, same, "rewards.csv, pct_increase.csv and outperform.csv byte-identical for 1 and 2 threads");

    // 9: a narrower cone never sees more
    ScenarioConfig narrow = base;
    narrow.fov_half_angle = 30.0 * kDeg;
    narrow.models.clear();
    for (const auto& m : base.models)
        if (m.kind != ModelKind::Agile) narrow.models.push_back(m);
    const auto rep30 = run_corpus(narrow, (scratch / "fov30").string(), 1);
    int pairs = 0, ok_pairs = 0;
    for (std::size_t m = 0; m < rep30.models.size(); ++m) {
        const int m45 = index_of(rep, rep30.models[m]);
        for (std::size_t t = 0; t < rep30.tracks.size(); ++t) {
            ++pairs;
            ok_pairs += rep30.z[t][m] <= rep.z[t][m45];
        }
    }
    report(9, pairs > 0 && ok_pairs == pairs, fmt("%.0f/%.0f (track, model) pairs with z(30 deg) <= z(45 deg)", ok_pairs, pairs));
}

void criterion_costs() {
    std::mt19937_64 rng(4001);
    std::uniform_real_distribution<double> a(6800.0, 8000.0), inc(0.2, kPi - 0.2), d(-0.4, 0.4), phi(1e-3, kTwoPi - 1e-3);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const ClassicalOrbitalElements o{a(rng), 0.0, inc(rng), 1.0, 0.0, 0.0, 0.0};
        const double di = d(rng), dr = d(rng), dphi = phi(rng);
        const double v = oracle::vcirc(o.semi_major_axis), i = o.inclination;
        worst = std::max(worst, std::abs(inclination_change_cost(o, di).delta_v - 2.0 * v * std::sin(std::abs(di) / 2.0)));
        worst = std::max(worst, std::abs(raan_change_cost(o, dr).delta_v - oracle::plane_change(o.semi_major_axis, i, i, dr)));
        worst = std::max(worst, std::abs(combined_plane_cost(o, di, dr).delta_v -
                                         oracle::plane_change(o.semi_major_axis, i, i + di, dr)));
        const int revs = 1 + n % 4;
        const double want = oracle::phasing(o.semi_major_axis, dphi, revs);
        const double got = phasing_cost(o, dphi, revs).delta_v;
        if (std::isinf(want) != std::isinf(got)) worst = kInfiniteCost;
        else if (!std::isinf(want)) worst = std::max(worst, std::abs(got - want));
    }
    bool monotone = true;
    const auto ref = reference_satellites()[0].orbit;
    for (int n = 0; n < 500; ++n) {
        const double dphi = phi(rng);
        double prev = kInfiniteCost;
        for (int r = 1; r <= 6; ++r) {
            const double dv = phasing_cost(ref, dphi, r).delta_v;
            monotone = monotone && dv <= prev;
            prev = dv;
        }
    }
    const auto g = generate_slot_grid(ref, {15, 5}, 2.0, GridMode::Unrestricted);
    double max_incl = 0.0, max_raan = 0.0;
    for (auto c : g) {
        c.true_anomaly = ref.true_anomaly;
        const double dv = transfer_cost(ref, c).delta_v;
        if (c.raan == ref.raan) max_incl = std::max(max_incl, dv);
        if (c.inclination == ref.inclination) max_raan = std::max(max_raan, dv);
    }
    const bool grid_ok = std::abs(max_incl - 2.0) <= 1e-6 && std::abs(max_raan - 2.0) <= 1e-6;
    report(4, worst <= 1e-9 && monotone && grid_ok,
           fmt("max oracle error %.2e km/s over 1000 cases; extreme slots %.9f / %.9f km/s", worst, max_incl, max_raan) +
               (monotone ? "; phasing non-increasing in max_revs" : "; phasing NOT monotone"));
}

void criterion_agility(const ScenarioConfig& base, bool corpus) {
    const AgilityConfig cfg;
    const double zeta = cfg.max_angle;

    // exact degraded-reward values
    const auto g1 = TimeGrid::make(1800.0, 100.0, 1800.0);
    std::vector<std::uint8_t> one(18, 0);
    one[0] = 1;
    const double r56 = score_agility(SlewSchedule{{{zeta, 0, 0}}, 0.0}, one, cfg, g1).total_reward;
    const double r12 = score_agility(SlewSchedule{{{zeta, -zeta, zeta}}, 0.0}, one, cfg, g1).total_reward;
    bool ok = r56 == 5.0 / 6.0 && r12 == 0.5;

    // small instances against a 5 degree grid
    std::mt19937_64 rng(5001);
    double worst_gap = -kInfiniteCost;
    int small = 0;
    for (int n = 0; n < 60; ++n) {
        const int ops = 1 + n % 2;
        const auto orbit = reference_satellites()[rng() % 5].orbit;
        const auto grid = TimeGrid::make(1800.0 * ops, 100.0, 1800.0);
        std::uniform_real_distribution<double> off(-0.3, 0.3);
        std::vector<OpportunityTarget> targets;
        for (int tau = 0; tau < ops; ++tau) {
            const Vec3 sub = coe_to_position(propagate(orbit, 1800.0 * tau)).normalized();
            targets.push_back({true, (sub + Vec3(off(rng), off(rng), off(rng))).normalized() * kEarth.radius});
        }
        const auto s = optimize_slew_schedule(orbit, targets, cfg, grid);
        double grid_best = 0.0;
        for (int tau = 0; tau < ops; ++tau) {
            const auto st = coe_to_state(propagate(orbit, 1800.0 * tau));
            double best = 10.0;
            for (int i = -7; i <= 7; ++i)
                for (int j = -7; j <= 7; ++j)
                    for (int k = -7; k <= 7; ++k)
                        best = std::min(best, oracle::off_pointing(st, targets[tau].position, i * 5 * kDeg, j * 5 * kDeg,
                                                                   k * 5 * kDeg));
            grid_best += best;
        }
        worst_gap = std::max(worst_gap, s.objective - grid_best);
        ok = ok && oracle::schedule_feasible(s, cfg);
        ++small;
    }
    ok = ok && worst_gap <= 1e-3;

    // every corpus schedule is feasible and no worse than holding nadir
    int schedules = 0, good = 0;
    if (corpus) {
        for (const auto& path : base.track_paths) {
            const auto track = load_track_csv(path);
            const auto grid = TimeGrid::make(track.duration(), base.dt, base.agility.control_step);
            const auto targets = track_to_targets(track, grid);
            const auto eph = target_ephemeris(targets, grid, base.earth);
            std::vector<OpportunityTarget> opp(static_cast<std::size_t>(grid.num_control()));
            for (std::int64_t tau = 0; tau < grid.num_control(); ++tau) {
                const std::int64_t t = tau * grid.steps_per_control();
                opp[tau] = {true, eph.at(t, targets.active_point(t))};
            }
            const auto result = run_model(base, standard_model("A"), track);
            for (std::size_t k = 0; k < result.schedules.size(); ++k) {
                const auto& s = result.schedules[k];
                const auto& orbit = base.satellites[k].orbit;
                const double nadir = schedule_objective(orbit, std::vector<EulerAngles>(opp.size()), opp, grid, base.earth);
                const double mine = schedule_objective(orbit, s.angles, opp, grid, base.earth);
                ++schedules;
                good += oracle::schedule_feasible(s, base.agility) && mine <= nadir + 1e-12;
            }
        }
        ok = ok && schedules > 0 && good == schedules;
    }
    report(5, ok,
           fmt("scores %.15g and %.15g; ", r56, r12) + fmt("%.0f small cases, worst gap to 5 deg grid %.2e rad", small, worst_gap) +
               (corpus ? fmt("; %.0f/%.0f corpus schedules feasible and <= nadir", good, schedules) : ""));
}

void criterion_rotation() {
    std::mt19937_64 rng(6001);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    double err = 0.0, ortho = 0.0;
    for (int n = 0; n < 10000; ++n) {
        const double a = ang(rng), b = ang(rng), g = ang(rng);
        const Mat3 M = rotation_matrix(a, b, g);
        err = std::max(err, (M - oracle::factor_x(a) * oracle::factor_y(b) * oracle::factor_z(g)).cwiseAbs().maxCoeff());
        ortho = std::max(ortho, (M.transpose() * M - Mat3::Identity()).cwiseAbs().maxCoeff());
    }
    report(6, err <= 1e-12 && ortho <= 1e-12,
           fmt("10000 triples: max factor-product error %.2e, max orthonormality error %.2e", err, ortho));
}

void criterion_propagation() {
    EarthModel two_body;
    two_body.j2 = 0.0;
    std::mt19937_64 rng(7001);
    std::uniform_real_distribution<double> a(6700.0, 42000.0), e(0.0, 0.7), i(0.0, kPi), ang(0.0, kTwoPi);
    double closure = 0.0;
    for (int n = 0; n < 1000; ++n) {
        ClassicalOrbitalElements c{a(rng), e(rng), i(rng), ang(rng), ang(rng), ang(rng), 0.0};
        if (c.semi_major_axis * (1.0 - c.eccentricity) < 6500.0) c.eccentricity = 1.0 - 6500.0 / c.semi_major_axis;
        const auto end = propagate(c, orbital_period(c.semi_major_axis, two_body), two_body);
        closure = std::max(closure, std::abs(wrap_pi(end.true_anomaly - c.true_anomaly)));
    }
    double worst_rel = 0.0;
    for (const auto& sat : reference_satellites()) {
        const auto later = propagate(sat.orbit, 86400.0);
        const double rate = wrap_pi(later.raan - sat.orbit.raan) / kDeg;
        worst_rel = std::max(worst_rel, std::abs(rate - 0.9856) / 0.9856);
    }
    report(7, closure <= 1e-9 && worst_rel <= 0.05,
           fmt("two-body period closure %.2e rad; J2 nodal drift within %.2f%% of 0.9856 deg/day", closure, 100.0 * worst_rel));
}

}  // namespace

int main(int argc, char** argv) {
    std::string conf = CONOPS_DATA_DIR "/scenario.conf";
    bool corpus = true;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--skip-corpus") corpus = false;
        else conf = arg;
    }
    try {
        const ScenarioConfig base = load_config(conf);
        const fs::path scratch = fs::temp_directory_path() / ("conops_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(scratch);

        criterion_solver();
        ComparisonReport rep;
        if (corpus) rep = criteria_corpus(base, scratch);
        criterion_costs();
        criterion_agility(base, corpus);
        criterion_rotation();
        criterion_propagation();
        if (corpus) criteria_repeatability(base, scratch, rep);
        fs::remove_all(scratch);
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    if (!corpus) std::printf("criteria 2, 3, 8 and 9 skipped (--skip-corpus)\n");
    return failures == 0 ? 0 : 1;
}
