#include "conops/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace conops {

namespace {

const char* const kStandardNames[] = {"B", "A", "P1", "P2", "P3", "P4", "U1", "U2"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
    return x;
}

}  // namespace

std::vector<ModelSpec> standard_models(double budget) {
    std::vector<ModelSpec> out;
    for (const char* n : kStandardNames) out.push_back(standard_model(n, budget));
    return out;
}

ModelSpec standard_model(const std::string& name, double budget) {
    using K = ModelKind;
    static const std::map<std::string, std::tuple<K, int, int, int>> table = {
        {"B", {K::Baseline, 1, 1, 1}},  {"A", {K::Agile, 1, 1, 1}},
        {"P1", {K::Phasing, 2, 10, 1}}, {"P2", {K::Phasing, 2, 20, 1}},
        {"P3", {K::Phasing, 4, 10, 1}}, {"P4", {K::Phasing, 4, 20, 1}},
        {"U1", {K::Unrestricted, 2, 15, 5}}, {"U2", {K::Unrestricted, 4, 15, 5}},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown model '" + name + "'");
    const auto [kind, stages, phases, axis] = it->second;
    return {name, kind, stages, phases, axis, budget};
}

std::vector<ModelSpec> parse_model_list(const std::string& list, double budget) {
    std::vector<ModelSpec> out;
    std::stringstream ss(list);
    std::string item;
    auto index_of = [](const std::string& n) {
        for (int i = 0; i < 8; ++i)
            if (n == kStandardNames[i]) return i;
        throw std::invalid_argument("unknown model '" + n + "'");
    };
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(standard_model(item, budget));
            continue;
        }
        const int a = index_of(trim(item.substr(0, dots))), b = index_of(trim(item.substr(dots + 2)));
        if (a > b) throw std::invalid_argument("model range '" + item + "' runs backwards");
        for (int i = a; i <= b; ++i) out.push_back(standard_model(kStandardNames[i], budget));
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i].name == out[j].name) throw std::invalid_argument("model '" + out[i].name + "' listed twice");
    if (out.empty()) throw std::invalid_argument("empty model list");
    return out;
}

std::vector<SatelliteSpec> reference_satellites() {
    auto sat = [](const char* name, double a, double e, double i, double raan, double argp, double nu) {
        return SatelliteSpec{name, {a, e, i * kDeg, raan * kDeg, argp * kDeg, nu * kDeg, 0.0}};
    };
    return {
        sat("DMC 3-FM3", 7006.01, 17.07e-4, 97.72, 307.83, 77.52, 104.88),
        sat("DMC 3-FM1", 6992.54, 8.03e-4, 97.72, 306.02, 116.04, 302.43),
        sat("HUANJING 1B", 7003.07, 48.93e-4, 97.80, 89.49, 107.47, 140.62),
        sat("HUANJING 1A", 7007.36, 39.24e-4, 97.79, 85.41, 116.27, 189.24),
        sat("NIGERIASAT 1", 6992.76, 41.58e-4, 97.85, 228.61, 260.58, 149.89),
    };
}

void validate(const ScenarioConfig& c) {
    if (c.satellites.empty()) throw std::invalid_argument("config: at least one satellite is required");
    for (const auto& s : c.satellites) validate(s.orbit, c.earth);
    validate(FovSpec{c.fov_half_angle, AxisMode::Nadir});
    validate(c.agility);
    if (!(c.dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (c.max_revs < 1) throw std::invalid_argument("config: max_revs must be >= 1");
    if (!(c.budget >= 0.0)) throw std::invalid_argument("config: budget must be >= 0");
    if (c.node_limit < 1) throw std::invalid_argument("config: node_limit must be >= 1");
    if (c.models.empty()) throw std::invalid_argument("config: no models selected");
    for (const auto& m : c.models) {
        if (m.stages < 1 || m.num_phases < 1 || m.num_plane_axis < 1)
            throw std::invalid_argument("config: model '" + m.name + "' has non-positive grid parameters");
        if (m.kind == ModelKind::Phasing && m.num_plane_axis != 1)
            throw std::invalid_argument("config: phasing model '" + m.name + "' cannot change planes");
    }
}

ScenarioConfig parse_config(const std::string& text, const std::string& base_dir) {
    namespace fs = std::filesystem;
    ScenarioConfig c;
    std::string models = "B,A,P1..U2";
    bool own_satellites = false;
    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return (path.is_absolute() ? path : fs::path(base_dir) / path).lexically_normal().string();
    };
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "dt") c.dt = to_double(key, value);
        else if (key == "control_step") c.agility.control_step = to_double(key, value);
        else if (key == "fov_deg") c.fov_half_angle = to_double(key, value) * kDeg;
        else if (key == "max_rate_deg_s") {
            const double r = to_double(key, value) * kDeg;
            c.agility.max_rate_x = c.agility.max_rate_y = c.agility.max_rate_z = r;
        } else if (key == "max_angle_deg") c.agility.max_angle = to_double(key, value) * kDeg;
        else if (key == "max_revs") c.max_revs = static_cast<int>(to_double(key, value));
        else if (key == "budget_km_s") c.budget = to_double(key, value);
        else if (key == "node_limit") c.node_limit = static_cast<std::int64_t>(to_double(key, value));
        else if (key == "j2") {
            if (value != "on" && value != "off") throw std::invalid_argument("config: j2 expects on or off");
            c.earth.j2 = value == "on" ? kEarth.j2 : 0.0;
        } else if (key == "models") models = value;
        else if (key == "satellite") {
            std::istringstream fields(value);
            std::string name;
            double v[6];
            fields >> std::quoted(name);
            for (double& x : v)
                if (!(fields >> x)) throw std::invalid_argument("config line " + std::to_string(line_no) +
                                                                ": satellite = NAME a e i raan argp nu");
            if (!own_satellites) c.satellites.clear();
            own_satellites = true;
            c.satellites.push_back({name, {v[0], v[1], v[2] * kDeg, v[3] * kDeg, v[4] * kDeg, v[5] * kDeg, 0.0}});
        } else if (key == "track") c.track_paths.push_back(resolve(value));
        else if (key == "track_dir") {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(resolve(value)))
                if (entry.path().extension() == ".csv") found.push_back(entry.path().lexically_normal().string());
            std::sort(found.begin(), found.end());
            c.track_paths.insert(c.track_paths.end(), found.begin(), found.end());
        } else
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    c.models = parse_model_list(models, c.budget);
    validate(c);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

namespace {

// Everything shared by the models of one track.
struct TrackContext {
    const ScenarioConfig& config;
    TimeGrid grid;
    TargetSet targets;
    TargetEphemeris ephemeris;
    std::int64_t num_points = 0;

    struct GridVisibility {
        std::vector<std::vector<ClassicalOrbitalElements>> slots;  // [k][j]
        VisibilityTensor single_stage;
    };
    std::map<std::tuple<int, int, int>, GridVisibility> cache;

    TrackContext(const ScenarioConfig& c, const TcTrack& track)
        : config(c), grid(TimeGrid::make(track.duration(), c.dt, c.agility.control_step, 1)),
          targets(track_to_targets(track, grid)), ephemeris(target_ephemeris(targets, grid, c.earth)),
          num_points(static_cast<std::int64_t>(track.samples.size())) {
        ephemeris.only.resize(static_cast<std::size_t>(grid.num_steps()));
        for (std::int64_t t = 0; t < grid.num_steps(); ++t)
            ephemeris.only[t] = static_cast<std::int32_t>(targets.active_point(t));
    }

    const GridVisibility& visibility(GridMode mode, int phases, int axis, double budget) {
        const auto key = std::make_tuple(static_cast<int>(mode), phases, mode == GridMode::Unrestricted ? axis : 1);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        GridVisibility gv;
        for (const auto& sat : config.satellites)
            gv.slots.push_back(generate_slot_grid(sat.orbit, {phases, axis, 0.0, 0.0, true}, budget, mode, config.earth));
        gv.single_stage = compute_vtw_tensor(StageSlots{gv.slots}, ephemeris, grid,
                                             FovSpec{config.fov_half_angle, AxisMode::Nadir}, config.earth);
        return cache.emplace(key, std::move(gv)).first->second;
    }
};

// Maps a plan onto another slot grid by identical elements; nullopt if any slot is missing.
std::optional<ReconfigPlan> map_plan(const ReconfigPlan& plan,
                                     const std::vector<std::vector<ClassicalOrbitalElements>>& from,
                                     const std::vector<std::vector<ClassicalOrbitalElements>>& to) {
    ReconfigPlan out = plan;
    for (std::size_t k = 0; k < plan.paths.size(); ++k)
        for (std::size_t s = 1; s < plan.paths[k].size(); ++s) {
            const auto& slot = from[k][plan.paths[k][s]];
            const auto it = std::find(to[k].begin(), to[k].end(), slot);
            if (it == to[k].end()) return std::nullopt;
            out.paths[k][s] = it - to[k].begin();
        }
    return out;
}

ModelResult run_baseline(TrackContext& ctx, const ModelSpec& spec) {
    const auto& gv = ctx.visibility(GridMode::PhasingOnly, 1, 1, spec.budget);
    const RewardMatrix rewards = build_reward_matrix(ctx.grid.num_steps(), ctx.num_points, 1);
    const auto K = static_cast<std::int64_t>(ctx.config.satellites.size());
    ModelResult r;
    r.model = spec.name;
    r.z = score_plan(all_stay_plan(K, 1), gv.single_stage, rewards);
    r.upper_bound = r.z;
    return r;
}

ModelResult run_agile(TrackContext& ctx, const ModelSpec& spec) {
    const auto& grid = ctx.grid;
    std::vector<OpportunityTarget> opportunities(static_cast<std::size_t>(grid.num_control()));
    for (std::int64_t tau = 0; tau < grid.num_control(); ++tau) {
        const std::int64_t t = tau * grid.steps_per_control();
        opportunities[tau] = {true, ctx.ephemeris.at(t, ctx.targets.active_point(t))};
    }
    std::vector<OpportunityTarget> steps(static_cast<std::size_t>(grid.num_steps()));
    for (std::int64_t t = 0; t < grid.num_steps(); ++t) steps[t] = {true, ctx.ephemeris.at(t, ctx.targets.active_point(t))};

    ModelResult r;
    r.model = spec.name;
    const FovSpec fov{ctx.config.fov_half_angle, AxisMode::PointingDirection};
    for (const auto& sat : ctx.config.satellites) {
        SlewSchedule schedule = optimize_slew_schedule(sat.orbit, opportunities, ctx.config.agility, grid, ctx.config.earth);
        const auto visible = slewed_visibility(sat.orbit, schedule, steps, fov, grid, ctx.config.earth);
        r.z += score_agility(schedule, visible, ctx.config.agility, grid).total_reward;
        r.schedules.push_back(std::move(schedule));
    }
    r.upper_bound = r.z;
    return r;
}

McrpInstance make_instance(TrackContext& ctx, const ModelSpec& spec) {
    if (spec.kind != ModelKind::Phasing && spec.kind != ModelKind::Unrestricted)
        throw std::invalid_argument("model '" + spec.name + "' is not a reconfiguration model");
    const GridMode mode = spec.kind == ModelKind::Unrestricted ? GridMode::Unrestricted : GridMode::PhasingOnly;
    const auto& gv = ctx.visibility(mode, spec.num_phases, spec.num_plane_axis, spec.budget);
    const int S = spec.stages;
    const TimeGrid staged = ctx.grid.with_stages(S);

    const auto K = ctx.config.satellites.size();
    std::vector<std::vector<std::vector<ClassicalOrbitalElements>>> grids(static_cast<std::size_t>(S + 1));
    for (const auto& sat : ctx.config.satellites) grids[0].push_back({sat.orbit});
    for (int s = 1; s <= S; ++s) grids[s] = gv.slots;
    std::vector<double> starts(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) starts[s] = staged.time_of(s * staged.steps_per_stage());

    McrpInstance inst;
    inst.visibility = S == 1 ? gv.single_stage : gv.single_stage.split_stages(S);
    inst.rewards = build_reward_matrix(ctx.grid.num_steps(), ctx.num_points, S);
    inst.costs =
        build_cost_matrix(grids, starts, ctx.config.max_revs, std::vector<double>(K, spec.budget), ctx.config.earth);
    return inst;
}

ModelResult run_reconfiguration(TrackContext& ctx, const ModelSpec& spec, const std::vector<ModelResult>& earlier,
                                const std::vector<ModelSpec>& earlier_specs) {
    const McrpInstance inst = make_instance(ctx, spec);
    const auto& v = inst.visibility;
    const auto& rewards = inst.rewards;
    const auto& costs = inst.costs;
    const int S = spec.stages;
    const GridMode mode = spec.kind == ModelKind::Unrestricted ? GridMode::Unrestricted : GridMode::PhasingOnly;
    const auto& gv = ctx.visibility(mode, spec.num_phases, spec.num_plane_axis, spec.budget);

    McrpOptions options;
    options.node_limit = ctx.config.node_limit;
    for (std::size_t i = 0; i < earlier.size(); ++i) {
        const auto& prev = earlier_specs[i];
        if (!earlier[i].plan || prev.stages != S) continue;
        const GridMode prev_mode = prev.kind == ModelKind::Unrestricted ? GridMode::Unrestricted : GridMode::PhasingOnly;
        const auto& prev_gv = ctx.visibility(prev_mode, prev.num_phases, prev.num_plane_axis, prev.budget);
        if (auto mapped = map_plan(*earlier[i].plan, prev_gv.slots, gv.slots)) options.warm_starts.push_back(*mapped);
    }

    ReconfigPlan plan = solve_mcrp(v, rewards, costs, options);
    const double rescored = score_plan(plan, v, rewards);
    if (rescored != plan.objective) throw std::logic_error("solver objective disagrees with re-scoring");
    ModelResult r;
    r.model = spec.name;
    r.z = plan.objective;
    r.optimal = plan.optimal;
    r.upper_bound = plan.upper_bound;
    r.plan = std::move(plan);
    return r;
}

ModelResult run_one(TrackContext& ctx, const ModelSpec& spec, const std::vector<ModelResult>& earlier,
                    const std::vector<ModelSpec>& earlier_specs) {
    switch (spec.kind) {
        case ModelKind::Baseline: return run_baseline(ctx, spec);
        case ModelKind::Agile: return run_agile(ctx, spec);
        default: return run_reconfiguration(ctx, spec, earlier, earlier_specs);
    }
}

}  // namespace

TrackResult run_track(const ScenarioConfig& config, const TcTrack& track) {
    validate(config);
    TrackContext ctx(config, track);
    TrackResult out{track.name, {}};
    std::vector<ModelSpec> done;
    for (const auto& spec : config.models) {
        out.models.push_back(run_one(ctx, spec, out.models, done));
        done.push_back(spec);
    }
    return out;
}

McrpInstance build_mcrp_instance(const ScenarioConfig& config, const ModelSpec& model, const TcTrack& track) {
    validate(config);
    TrackContext ctx(config, track);
    return make_instance(ctx, model);
}

ModelResult run_model(const ScenarioConfig& config, const ModelSpec& model, const TcTrack& track) {
    validate(config);
    TrackContext ctx(config, track);
    return run_one(ctx, model, {}, {});
}

}  // namespace conops
