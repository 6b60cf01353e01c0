#include "conops/maneuver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace conops {

namespace {

constexpr double kAngleTol = 1e-12;
constexpr double kMinPhasingAltitude = 100.0;  // km above the Earth radius

bool is_zero_angle(double a) { return std::abs(a) < kAngleTol; }

bool is_zero_phase(double phi) { return phi < kAngleTol || phi > kTwoPi - kAngleTol; }

double plane_cost_from_half_sine(double v, double half_sine) {
    return 2.0 * v * std::min(1.0, half_sine);
}

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Stay: return "stay";
        case Strategy::Phasing: return "phasing";
        case Strategy::Inclination: return "inclination";
        case Strategy::Raan: return "raan";
        case Strategy::CombinedPlane: return "combined";
        case Strategy::InclinationPhasing: return "inclination+phasing";
        case Strategy::RaanPhasing: return "raan+phasing";
        case Strategy::CombinedPhasing: return "combined+phasing";
        case Strategy::None: return "none";
    }
    return "none";
}

TransferCost phasing_cost(const ClassicalOrbitalElements& orbit, double phase_offset, int max_revs,
                          const EarthModel& earth) {
    if (max_revs < 1) throw std::invalid_argument("phasing_cost: max_revs must be >= 1");
    if (!(phase_offset >= 0.0 && phase_offset < kTwoPi))
        throw std::invalid_argument("phasing_cost: phase offset must lie in [0, 2pi)");
    if (phase_offset == 0.0) return {0.0, Strategy::Stay, 0.0};

    const double a = orbit.semi_major_axis;
    const double n = mean_motion(a, earth);
    const double v_circ = circular_speed(a, earth);
    const double min_periapsis = earth.radius + kMinPhasingAltitude;

    TransferCost best{kInfiniteCost, Strategy::None, 0.0};
    for (int k_tgt = 1; k_tgt <= max_revs; ++k_tgt)
        for (int k_tfr = 1; k_tfr <= max_revs; ++k_tfr) {
            const double t_phase = (kTwoPi * k_tgt + phase_offset) / n;
            const double a_phase = std::cbrt(earth.mu) * std::pow(t_phase / (kTwoPi * k_tfr), 2.0 / 3.0);
            const double periapsis = std::min(a, 2.0 * a_phase - a);
            if (periapsis < min_periapsis) continue;
            const double v_burn = std::sqrt(2.0 * earth.mu / a - earth.mu / a_phase);
            const double dv = 2.0 * std::abs(v_burn - v_circ);
            if (dv < best.delta_v) best = {dv, Strategy::Phasing, t_phase};
        }
    return best;
}

TransferCost inclination_change_cost(const ClassicalOrbitalElements& orbit, double di, const EarthModel& earth) {
    if (di == 0.0) return {0.0, Strategy::Stay, 0.0};
    const double v = circular_speed(orbit.semi_major_axis, earth);
    return {plane_cost_from_half_sine(v, std::sin(std::abs(di) / 2.0)), Strategy::Inclination, 0.0};
}

TransferCost raan_change_cost(const ClassicalOrbitalElements& orbit, double draan, const EarthModel& earth) {
    if (draan == 0.0 || orbit.inclination == 0.0) return {0.0, Strategy::Stay, 0.0};
    const double v = circular_speed(orbit.semi_major_axis, earth);
    const double half_sine = std::abs(std::sin(orbit.inclination) * std::sin(draan / 2.0));
    return {plane_cost_from_half_sine(v, half_sine), Strategy::Raan, 0.0};
}

double plane_angle(double i1, double raan1, double i2, double raan2) {
    const double sdi = std::sin((i2 - i1) / 2.0);
    const double sdo = std::sin((raan2 - raan1) / 2.0);
    const double h2 = sdi * sdi + std::sin(i1) * std::sin(i2) * sdo * sdo;
    return 2.0 * std::asin(std::min(1.0, std::sqrt(std::max(0.0, h2))));
}

TransferCost combined_plane_cost(const ClassicalOrbitalElements& orbit, double di, double draan,
                                 const EarthModel& earth) {
    if (di == 0.0 && draan == 0.0) return {0.0, Strategy::Stay, 0.0};
    const double v = circular_speed(orbit.semi_major_axis, earth);
    const double i1 = orbit.inclination;
    const double i2 = i1 + di;
    const double sdi = std::sin(di / 2.0);
    const double sdo = std::sin(draan / 2.0);
    const double h2 = sdi * sdi + std::sin(i1) * std::sin(i2) * sdo * sdo;
    return {plane_cost_from_half_sine(v, std::sqrt(std::max(0.0, h2))), Strategy::CombinedPlane, 0.0};
}

double orbit_phase(const ClassicalOrbitalElements& coe) { return wrap_two_pi(coe.arg_periapsis + coe.true_anomaly); }

TransferCost transfer_cost(const ClassicalOrbitalElements& from, const ClassicalOrbitalElements& to, int max_revs,
                           const EarthModel& earth) {
    if (std::abs(from.semi_major_axis - to.semi_major_axis) > 1e-6 * from.semi_major_axis)
        throw std::invalid_argument("transfer_cost: semi-major axes differ; altitude transfers are not modeled");

    const double di = to.inclination - from.inclination;
    const double draan = wrap_pi(to.raan - from.raan);
    const double dphi = wrap_two_pi(orbit_phase(from) - orbit_phase(to));
    const bool same_i = is_zero_angle(di);
    const bool same_raan = is_zero_angle(draan);
    const bool same_phase = is_zero_phase(dphi);

    // Phasing is flown on the destination plane after any plane change.
    const TransferCost phase = same_phase ? TransferCost{0.0, Strategy::Stay, 0.0}
                                          : phasing_cost(to, dphi, max_revs, earth);
    const double incl = inclination_change_cost(from, di, earth).delta_v;
    const double raan = raan_change_cost(from, draan, earth).delta_v;
    const double comb = combined_plane_cost(from, di, draan, earth).delta_v;

    TransferCost best{kInfiniteCost, Strategy::None, 0.0};
    auto consider = [&](bool applicable, double dv, Strategy s, double time) {
        if (applicable && dv < best.delta_v) best = {dv, s, time};
    };
    const bool same_plane = same_i && same_raan;
    consider(same_plane && same_phase, 0.0, Strategy::Stay, 0.0);
    consider(same_plane, phase.delta_v, Strategy::Phasing, phase.transfer_time);
    consider(same_raan && same_phase, incl, Strategy::Inclination, 0.0);
    consider(same_i && same_phase, raan, Strategy::Raan, 0.0);
    consider(same_phase, comb, Strategy::CombinedPlane, 0.0);
    consider(same_raan, incl + phase.delta_v, Strategy::InclinationPhasing, phase.transfer_time);
    consider(same_i, raan + phase.delta_v, Strategy::RaanPhasing, phase.transfer_time);
    consider(true, comb + phase.delta_v, Strategy::CombinedPhasing, phase.transfer_time);
    if (!best.finite()) best.strategy = Strategy::None;
    return best;
}

double inclination_span_for_budget(const ClassicalOrbitalElements& orbit, double budget, const EarthModel& earth) {
    const double v = circular_speed(orbit.semi_major_axis, earth);
    return 2.0 * std::asin(std::min(1.0, budget / (2.0 * v)));
}

double raan_span_for_budget(const ClassicalOrbitalElements& orbit, double budget, const EarthModel& earth) {
    const double v = circular_speed(orbit.semi_major_axis, earth);
    const double si = std::abs(std::sin(orbit.inclination));
    if (si == 0.0) return 0.0;
    return 2.0 * std::asin(std::min(1.0, budget / (2.0 * v) / si));
}

std::vector<double> axis_offsets(int m, double span) {
    if (m < 1) throw std::invalid_argument("axis_offsets: m must be >= 1");
    const int pos = m / 2;          // ceil((m - 1) / 2)
    const int neg = (m - 1) / 2;    // floor((m - 1) / 2)
    std::vector<double> out;
    auto offset = [&](int q) { return q == pos ? span : span * q / pos; };
    for (int q = neg; q >= 1; --q) out.push_back(-offset(q));
    for (int q = 1; q <= pos; ++q) out.push_back(offset(q));
    return out;
}

std::vector<ClassicalOrbitalElements> generate_slot_grid(const ClassicalOrbitalElements& initial,
                                                         const SlotGridSpec& spec, double budget, GridMode mode,
                                                         const EarthModel& earth) {
    if (spec.num_phases < 1) throw std::invalid_argument("slot grid: num_phases must be >= 1");
    if (spec.num_plane_axis < 1) throw std::invalid_argument("slot grid: num_plane_axis must be >= 1");
    if (!spec.include_initial) throw std::invalid_argument("slot grid: the initial slot is required (stay option)");

    struct Plane {
        double di, draan;
    };
    std::vector<Plane> planes{{0.0, 0.0}};
    if (mode == GridMode::Unrestricted) {
        const double ispan = spec.incl_span > 0.0 ? spec.incl_span : inclination_span_for_budget(initial, budget, earth);
        const double ospan = spec.raan_span > 0.0 ? spec.raan_span : raan_span_for_budget(initial, budget, earth);
        for (double d : axis_offsets(spec.num_plane_axis, ispan)) planes.push_back({d, 0.0});
        for (double d : axis_offsets(spec.num_plane_axis, ospan)) planes.push_back({0.0, d});
    }

    std::vector<ClassicalOrbitalElements> slots;
    slots.reserve(planes.size() * static_cast<std::size_t>(spec.num_phases));
    for (const Plane& plane : planes) {
        for (int q = 0; q < spec.num_phases; ++q) {
            ClassicalOrbitalElements c = initial;
            c.inclination = initial.inclination + plane.di;
            if (c.inclination < 0.0 || c.inclination > kPi)
                throw std::invalid_argument("slot grid: inclination offset leaves [0, pi]");
            if (plane.draan != 0.0) c.raan = wrap_two_pi(initial.raan + plane.draan);
            if (q != 0)
                c.true_anomaly = wrap_two_pi(initial.true_anomaly +
                                             kTwoPi * (static_cast<double>(q) / static_cast<double>(spec.num_phases)));
            slots.push_back(c);
        }
    }
    return slots;
}

namespace {

CostMatrix cost_matrix_impl(const std::vector<std::vector<std::vector<ClassicalOrbitalElements>>>& grids,
                            const std::vector<double>& stage_start_times, int max_revs,
                            const std::vector<double>& budget, const EarthModel& earth, bool parallel) {
    if (grids.size() < 2) throw std::invalid_argument("build_cost_matrix: need the initial set and at least one stage");
    const std::size_t S = grids.size() - 1;
    if (stage_start_times.size() != S)
        throw std::invalid_argument("build_cost_matrix: need one start time per stage");
    const std::size_t K = grids.front().size();
    if (budget.size() != K) throw std::invalid_argument("build_cost_matrix: need one budget per satellite");
    for (const auto& g : grids)
        if (g.size() != K) throw std::invalid_argument("build_cost_matrix: satellite count differs between stages");

    CostMatrix m;
    m.budget = budget;
    m.entries.resize(S);
    m.strategies.resize(S);
    struct Row {
        std::size_t s, k, i;
    };
    std::vector<Row> rows;
    std::vector<std::vector<std::vector<ClassicalOrbitalElements>>> from(S), to(S);
    for (std::size_t s = 0; s < S; ++s) {
        m.entries[s].resize(K);
        m.strategies[s].resize(K);
        from[s].resize(K);
        to[s].resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            const auto& src = grids[s][k];
            const auto& dst = grids[s + 1][k];
            m.entries[s][k].assign(src.size(), std::vector<double>(dst.size(), 0.0));
            m.strategies[s][k].assign(src.size(), std::vector<Strategy>(dst.size(), Strategy::Stay));
            for (const auto& c : src) from[s][k].push_back(propagate(c, stage_start_times[s] - c.epoch, earth));
            for (const auto& c : dst) to[s][k].push_back(propagate(c, stage_start_times[s] - c.epoch, earth));
            for (std::size_t i = 0; i < src.size(); ++i) rows.push_back({s, k, i});
        }
    }

#pragma omp parallel for schedule(dynamic, 4) if (parallel)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows.size()); ++r) {
        const Row& row = rows[static_cast<std::size_t>(r)];
        const auto& a = from[row.s][row.k][row.i];
        const auto& targets = to[row.s][row.k];
        auto& out = m.entries[row.s][row.k][row.i];
        auto& strat = m.strategies[row.s][row.k][row.i];
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const TransferCost c = transfer_cost(a, targets[j], max_revs, earth);
            out[j] = c.delta_v;
            strat[j] = c.strategy;
        }
    }
    return m;
}

}  // namespace

CostMatrix build_cost_matrix(const std::vector<std::vector<std::vector<ClassicalOrbitalElements>>>& grids,
                             const std::vector<double>& stage_start_times, int max_revs,
                             const std::vector<double>& budget, const EarthModel& earth) {
    return cost_matrix_impl(grids, stage_start_times, max_revs, budget, earth, true);
}

CostMatrix build_cost_matrix_serial(const std::vector<std::vector<std::vector<ClassicalOrbitalElements>>>& grids,
                                    const std::vector<double>& stage_start_times, int max_revs,
                                    const std::vector<double>& budget, const EarthModel& earth) {
    return cost_matrix_impl(grids, stage_start_times, max_revs, budget, earth, false);
}

void write_cost_csv(std::ostream& out, const CostMatrix& costs) {
    out << "stage,sat,from_slot,to_slot,delta_v_km_s,strategy\n";
    char buf[160];
    for (std::size_t s = 0; s < costs.entries.size(); ++s)
        for (std::size_t k = 0; k < costs.entries[s].size(); ++k)
            for (std::size_t i = 0; i < costs.entries[s][k].size(); ++i)
                for (std::size_t j = 0; j < costs.entries[s][k][i].size(); ++j) {
                    const double dv = costs.entries[s][k][i][j];
                    const auto strat = costs.strategies.empty() ? Strategy::Stay : costs.strategies[s][k][i][j];
                    if (dv < kInfiniteCost)
                        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.9f,%s\n", s + 1, k + 1, i + 1, j + 1, dv,
                                      std::string(to_string(strat)).c_str());
                    else
                        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,inf,%s\n", s + 1, k + 1, i + 1, j + 1,
                                      std::string(to_string(strat)).c_str());
                    out << buf;
                }
}

}  // namespace conops
