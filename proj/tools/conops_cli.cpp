#include "conops/harness.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::string& models, int threads,
            double fov_deg, double dt, long long node_limit) {
    conops::ScenarioConfig config = conops::load_config(config_path);
    if (!models.empty()) config.models = conops::parse_model_list(models, config.budget);
    if (fov_deg > 0.0) config.fov_half_angle = fov_deg * conops::kDeg;
    if (dt > 0.0) config.dt = dt;
    if (node_limit > 0) config.node_limit = node_limit;
    omp_set_num_threads(threads);
    const auto start = std::chrono::steady_clock::now();
    const auto report = conops::run_corpus(config, out_dir, threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << conops::emit_report(report, conops::ReportFormat::Text);
    std::fprintf(stderr, "%zu tracks in %.1f s, outputs in %s\n", report.tracks.size(), secs, out_dir.c_str());
    return 0;
}

int cmd_synth(const std::string& out_dir, std::uint64_t first, int count) {
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed = first + static_cast<std::uint64_t>(i);
        const auto region = seed % 2 == 1 ? conops::Region::WestHemisphere : conops::Region::EastHemisphere;
        const auto track = conops::synthesize_track(seed, conops::synthetic_duration_days(seed), region);
        char name[64];
        std::snprintf(name, sizeof name, "syn_%03llu.csv", static_cast<unsigned long long>(seed));
        std::ofstream(std::filesystem::path(out_dir) / name, std::ios::binary) << conops::serialize_track(track);
        std::printf("%s  %zu samples  %.2f days\n", name, track.samples.size(), track.duration() / 86400.0);
    }
    return 0;
}

int cmd_instance(const std::string& config_path, const std::string& track_path, const std::string& model,
                 const std::string& out) {
    const auto config = conops::load_config(config_path);
    const auto track = conops::load_track_csv(track_path);
    const auto inst = conops::build_mcrp_instance(config, conops::standard_model(model, config.budget), track);
    conops::save_instance(out, inst);
    std::printf("wrote %s: S=%lld K=%lld J=%lld T_s=%lld P=%lld\n", out.c_str(),
                static_cast<long long>(inst.visibility.num_stages()), static_cast<long long>(inst.visibility.num_sats()),
                static_cast<long long>(inst.visibility.max_slots()),
                static_cast<long long>(inst.visibility.steps_per_stage()),
                static_cast<long long>(inst.visibility.num_targets()));
    return 0;
}

int cmd_solve(const std::string& path, bool exhaustive, long long node_limit, const std::string& plan_out) {
    const auto inst = conops::load_instance(path);
    conops::McrpOptions opt;
    if (node_limit > 0) opt.node_limit = node_limit;
    const auto start = std::chrono::steady_clock::now();
    const auto plan = exhaustive ? conops::solve_mcrp_exhaustive(inst.visibility, inst.rewards, inst.costs)
                                 : conops::solve_mcrp(inst.visibility, inst.rewards, inst.costs, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("z = %.6f  delta_v = %.6f km/s  optimal = %s  bound = %.6f  nodes = %lld  (%.3f s)\n", plan.objective,
                plan.total_delta_v, plan.optimal ? "yes" : "no", plan.upper_bound,
                static_cast<long long>(plan.nodes), secs);
    if (!plan_out.empty()) {
        std::ofstream f(plan_out, std::ios::binary);
        conops::write_plan_csv(f, plan);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compare nadir, agile and reconfigurable Earth-observation CONOPS on cyclone tracks"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run models over the configured track corpus");
    std::string config_path, out_dir = "out", models;
    int threads = 1;
    double fov_deg = 0.0, dt = 0.0;
    long long node_limit = 0;
    run->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--models", models, "Model list, e.g. B,A,P1..U2 (overrides the config)");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--fov-deg", fov_deg, "FOV half-angle in degrees (overrides the config)");
    run->add_option("--dt", dt, "Time step in seconds (overrides the config)");
    run->add_option("--node-limit", node_limit, "Branch-and-bound node limit (overrides the config)");

    auto* synth = app.add_subcommand("synth", "Write synthetic cyclone tracks");
    std::string synth_out = "data/tracks";
    std::uint64_t first_seed = 1;
    int count = 20;
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--first-seed", first_seed, "First seed");
    synth->add_option("--count", count, "Number of tracks")->check(CLI::PositiveNumber);

    auto* instance = app.add_subcommand("instance", "Dump the solver instance of one model on one track");
    std::string inst_track, inst_model = "U2", inst_out = "instance.mcrp", inst_config;
    instance->add_option("--config", inst_config, "Scenario file")->required()->check(CLI::ExistingFile);
    instance->add_option("--track", inst_track, "Track CSV")->required()->check(CLI::ExistingFile);
    instance->add_option("--model", inst_model, "P1..P4, U1 or U2");
    instance->add_option("--out", inst_out, "Instance file");

    auto* solve = app.add_subcommand("solve", "Solve a dumped solver instance");
    std::string solve_in, plan_out;
    bool exhaustive = false;
    long long solve_limit = 0;
    solve->add_option("instance", solve_in, "Instance file")->required()->check(CLI::ExistingFile);
    solve->add_flag("--exhaustive", exhaustive, "Enumerate every joint path instead of branch and bound");
    solve->add_option("--node-limit", solve_limit, "Branch-and-bound node limit");
    solve->add_option("--plan", plan_out, "Write the plan CSV here");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config_path, out_dir, models, threads, fov_deg, dt, node_limit);
        if (*synth) return cmd_synth(synth_out, first_seed, count);
        if (*instance) return cmd_instance(inst_config, inst_track, inst_model, inst_out);
        if (*solve) return cmd_solve(solve_in, exhaustive, solve_limit, plan_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
