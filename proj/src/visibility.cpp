#include "conops/visibility.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace conops {

namespace {

constexpr double kBoundarySlack = 1e-12;  // rad

void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("visibility tensor: truncated header");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void check_inputs(const StageSlots& slots, const TargetEphemeris& targets, const TimeGrid& grid) {
    if (static_cast<std::int64_t>(slots.size()) != grid.num_stages())
        throw std::invalid_argument("compute_vtw_tensor: slot stages do not match the time grid");
    if (targets.num_steps != grid.num_steps())
        throw std::invalid_argument("compute_vtw_tensor: target ephemeris length does not match the time grid");
    if (static_cast<std::int64_t>(targets.positions.size()) != targets.num_steps * targets.num_targets)
        throw std::invalid_argument("compute_vtw_tensor: malformed target ephemeris");
    if (!targets.only.empty() && static_cast<std::int64_t>(targets.only.size()) != targets.num_steps)
        throw std::invalid_argument("compute_vtw_tensor: target filter length does not match the time grid");
    for (const auto& stage : slots)
        if (stage.size() != slots.front().size())
            throw std::invalid_argument("compute_vtw_tensor: satellite count differs between stages");
}

VisibilityTensor allocate(const StageSlots& slots, const TargetEphemeris& targets, const TimeGrid& grid) {
    std::int64_t K = slots.empty() ? 0 : static_cast<std::int64_t>(slots.front().size());
    std::int64_t J = 0;
    for (const auto& stage : slots)
        for (const auto& list : stage) J = std::max<std::int64_t>(J, static_cast<std::int64_t>(list.size()));
    VisibilityTensor V(grid.num_stages(), K, J, grid.steps_per_stage(), targets.num_targets);
    for (std::size_t s = 0; s < slots.size(); ++s)
        for (std::size_t k = 0; k < slots[s].size(); ++k)
            V.set_slot_count(static_cast<std::int64_t>(s), static_cast<std::int64_t>(k),
                             static_cast<std::int64_t>(slots[s][k].size()));
    return V;
}

}  // namespace

void validate(const FovSpec& fov) {
    if (!(fov.half_angle > 0.0 && fov.half_angle < kPi / 2.0))
        throw std::invalid_argument("FOV half-angle must lie in (0, pi/2)");
}

Vec3 target_pointing(const Vec3& sat_pos, const Vec3& target_pos) {
    const Vec3 d = target_pos - sat_pos;
    const double n = d.norm();
    if (n == 0.0) throw std::invalid_argument("target_pointing: satellite and target coincide");
    return d / n;
}

bool line_of_sight(const Vec3& sat_pos, const Vec3& target_pos, const EarthModel& earth) {
    const Vec3 u = sat_pos - target_pos;
    const double uu = u.squaredNorm();
    if (uu == 0.0) return true;
    double s = -target_pos.dot(u) / uu;
    s = std::clamp(s, 0.0, 1.0);
    const double closest = (target_pos + s * u).squaredNorm();
    const double r2 = earth.radius * earth.radius;
    return closest >= r2 * (1.0 - 1e-12);
}

bool is_visible(const Vec3& sat_pos, const Vec3& target_eci, double half_angle, const Vec3& cone_axis,
                const EarthModel& earth) {
    const Vec3 d = target_eci - sat_pos;
    const double angle = std::atan2(cone_axis.cross(d).norm(), cone_axis.dot(d));
    if (angle > half_angle + kBoundarySlack) return false;
    return line_of_sight(sat_pos, target_eci, earth);
}

bool is_visible(const StateVector& sat_state, const Vec3& target_eci, const FovSpec& fov,
                const Vec3& cone_axis, const EarthModel& earth) {
    const Vec3& r = sat_state.position;
    const Vec3 axis = fov.axis_mode == AxisMode::Nadir ? Vec3(-r / r.norm()) : cone_axis;
    return is_visible(sat_state.position, target_eci, fov.half_angle, axis, earth);
}

VisibilityTensor::VisibilityTensor(std::int64_t stages, std::int64_t sats, std::int64_t max_slots,
                                   std::int64_t steps_per_stage, std::int64_t targets)
    : S_(stages), K_(sats), J_(max_slots), T_(steps_per_stage), P_(targets) {
    if (S_ < 0 || K_ < 0 || J_ < 0 || T_ < 0 || P_ < 0)
        throw std::invalid_argument("visibility tensor: negative dimension");
    row_words_ = (T_ * P_ + 63) / 64;
    counts_.assign(static_cast<std::size_t>(S_ * K_), J_);
    words_.assign(static_cast<std::size_t>(S_ * K_ * J_ * row_words_), 0);
}

void VisibilityTensor::set_slot_count(std::int64_t s, std::int64_t k, std::int64_t n) {
    if (n < 0 || n > J_) throw std::out_of_range("visibility tensor: slot count out of range");
    counts_[s * K_ + k] = n;
    for (std::int64_t j = n; j < J_; ++j) {
        auto r = row(s, k, j);
        std::fill(r.begin(), r.end(), 0);
    }
}

std::span<const std::uint64_t> VisibilityTensor::row(std::int64_t s, std::int64_t k, std::int64_t j) const {
    return {words_.data() + ((s * K_ + k) * J_ + j) * row_words_, static_cast<std::size_t>(row_words_)};
}

std::span<std::uint64_t> VisibilityTensor::row(std::int64_t s, std::int64_t k, std::int64_t j) {
    return {words_.data() + ((s * K_ + k) * J_ + j) * row_words_, static_cast<std::size_t>(row_words_)};
}

bool VisibilityTensor::get(std::int64_t s, std::int64_t k, std::int64_t j, std::int64_t t,
                           std::int64_t p) const {
    const std::int64_t bit = t * P_ + p;
    return (row(s, k, j)[bit >> 6] >> (bit & 63)) & 1u;
}

void VisibilityTensor::set(std::int64_t s, std::int64_t k, std::int64_t j, std::int64_t t, std::int64_t p,
                           bool value) {
    if (j >= slot_count(s, k)) {
        if (value) throw std::out_of_range("visibility tensor: slot index beyond J_s^k");
        return;
    }
    const std::int64_t bit = t * P_ + p;
    auto r = row(s, k, j);
    const std::uint64_t mask = std::uint64_t{1} << (bit & 63);
    if (value)
        r[bit >> 6] |= mask;
    else
        r[bit >> 6] &= ~mask;
}

std::uint64_t VisibilityTensor::count_ones() const {
    std::uint64_t n = 0;
    for (auto w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
}

VisibilityTensor VisibilityTensor::split_stages(std::int64_t stages) const {
    if (S_ != 1) throw std::invalid_argument("split_stages: source must be single-stage");
    if (stages < 1 || T_ % stages != 0)
        throw std::invalid_argument("split_stages: steps not divisible by stage count");
    const std::int64_t Ts = T_ / stages;
    VisibilityTensor out(stages, K_, J_, Ts, P_);
    for (std::int64_t s = 0; s < stages; ++s)
        for (std::int64_t k = 0; k < K_; ++k) out.set_slot_count(s, k, slot_count(0, k));
    for (std::int64_t k = 0; k < K_; ++k)
        for (std::int64_t j = 0; j < slot_count(0, k); ++j) {
            const auto src = row(0, k, j);
            for (std::int64_t s = 0; s < stages; ++s) {
                auto dst = out.row(s, k, j);
                const std::int64_t first = s * Ts * P_;
                const std::int64_t n = Ts * P_;
                for (std::int64_t b = 0; b < n; ++b) {
                    const std::int64_t sb = first + b;
                    if ((src[sb >> 6] >> (sb & 63)) & 1u) dst[b >> 6] |= std::uint64_t{1} << (b & 63);
                }
            }
        }
    return out;
}

void VisibilityTensor::write(std::ostream& out) const {
    write_u64(out, static_cast<std::uint64_t>(S_));
    write_u64(out, static_cast<std::uint64_t>(K_));
    write_u64(out, static_cast<std::uint64_t>(J_));
    write_u64(out, static_cast<std::uint64_t>(T_));
    write_u64(out, static_cast<std::uint64_t>(P_));
    const std::int64_t row_bits = T_ * P_;
    const std::int64_t total = S_ * K_ * J_ * row_bits;
    std::vector<unsigned char> bytes(static_cast<std::size_t>((total + 7) / 8), 0);
    std::int64_t idx = 0;
    for (std::int64_t s = 0; s < S_; ++s)
        for (std::int64_t k = 0; k < K_; ++k)
            for (std::int64_t j = 0; j < J_; ++j) {
                const auto r = row(s, k, j);
                for (std::int64_t b = 0; b < row_bits; ++b, ++idx)
                    if ((r[b >> 6] >> (b & 63)) & 1u) bytes[idx >> 3] |= static_cast<unsigned char>(1u << (idx & 7));
            }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

VisibilityTensor VisibilityTensor::read(std::istream& in) {
    std::int64_t dims[5];
    for (auto& d : dims) {
        const std::uint64_t v = read_u64(in);
        if (v > (std::uint64_t{1} << 40)) throw std::runtime_error("visibility tensor: implausible dimension");
        d = static_cast<std::int64_t>(v);
    }
    VisibilityTensor V(dims[0], dims[1], dims[2], dims[3], dims[4]);
    const std::int64_t row_bits = V.T_ * V.P_;
    const std::int64_t total = V.S_ * V.K_ * V.J_ * row_bits;
    std::vector<unsigned char> bytes(static_cast<std::size_t>((total + 7) / 8));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in && !bytes.empty()) throw std::runtime_error("visibility tensor: truncated bitset");
    std::int64_t idx = 0;
    for (std::int64_t s = 0; s < V.S_; ++s)
        for (std::int64_t k = 0; k < V.K_; ++k)
            for (std::int64_t j = 0; j < V.J_; ++j) {
                auto r = V.row(s, k, j);
                for (std::int64_t b = 0; b < row_bits; ++b, ++idx)
                    if ((bytes[idx >> 3] >> (idx & 7)) & 1u) r[b >> 6] |= std::uint64_t{1} << (b & 63);
            }
    // Slot counts are not part of the file; every J_s^k reads back as J_max.
    return V;
}

void VisibilityTensor::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    write(out);
}

VisibilityTensor VisibilityTensor::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read(in);
}

bool VisibilityTensor::operator==(const VisibilityTensor& o) const {
    return S_ == o.S_ && K_ == o.K_ && J_ == o.J_ && T_ == o.T_ && P_ == o.P_ && counts_ == o.counts_ &&
           words_ == o.words_;
}

VisibilityTensor compute_vtw_tensor_serial(const StageSlots& slots, const TargetEphemeris& targets,
                                           const TimeGrid& grid, const FovSpec& fov, const EarthModel& earth) {
    validate(fov);
    check_inputs(slots, targets, grid);
    VisibilityTensor V = allocate(slots, targets, grid);
    const std::int64_t Ts = grid.steps_per_stage();
    for (std::int64_t s = 0; s < V.num_stages(); ++s)
        for (std::int64_t k = 0; k < V.num_sats(); ++k)
            for (std::int64_t j = 0; j < V.slot_count(s, k); ++j)
                for (std::int64_t t = 0; t < Ts; ++t)
                    for (std::int64_t p = 0; p < targets.num_targets; ++p) {
                        const std::int64_t g = s * Ts + t;
                        if (!targets.evaluated(g, p)) continue;
                        const auto coe = propagate(slots[s][k][j], grid.time_of(g), earth);
                        const StateVector st = coe_to_state(coe, earth);
                        if (is_visible(st, targets.at(g, p), fov, Vec3::Zero(), earth)) V.set(s, k, j, t, p);
                    }
    return V;
}

VisibilityTensor compute_vtw_tensor(const StageSlots& slots, const TargetEphemeris& targets,
                                    const TimeGrid& grid, const FovSpec& fov, const EarthModel& earth) {
    validate(fov);
    check_inputs(slots, targets, grid);
    VisibilityTensor V = allocate(slots, targets, grid);
    const std::int64_t S = V.num_stages(), K = V.num_sats(), J = V.max_slots();
    const std::int64_t Ts = grid.steps_per_stage();
    const std::int64_t P = targets.num_targets;

    // Per-target unit radials and radii for a conservative horizon cull.
    std::vector<double> target_radius(static_cast<std::size_t>(targets.positions.size()));
    std::vector<Vec3> target_unit(targets.positions.size());
    for (std::size_t i = 0; i < targets.positions.size(); ++i) {
        target_radius[i] = targets.positions[i].norm();
        target_unit[i] = targets.positions[i] / target_radius[i];
    }

    const std::int64_t rows = S * K * J;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t idx = 0; idx < rows; ++idx) {
        const std::int64_t j = idx % J;
        const std::int64_t k = (idx / J) % K;
        const std::int64_t s = idx / (J * K);
        if (j >= V.slot_count(s, k)) continue;
        const ClassicalOrbitalElements& slot = slots[s][k][j];
        auto out = V.row(s, k, j);
        for (std::int64_t t = 0; t < Ts; ++t) {
            const std::int64_t g = s * Ts + t;
            const Vec3 r = coe_to_position(propagate(slot, grid.time_of(g), earth));
            const double rn = r.norm();
            const Vec3 axis = -r / rn;
            const double sat_horizon = std::acos(std::min(1.0, earth.radius / rn));
            for (std::int64_t p = 0; p < P; ++p) {
                if (!targets.evaluated(g, p)) continue;
                const std::size_t ti = static_cast<std::size_t>(g * P + p);
                const double tgt_horizon = std::acos(std::min(1.0, earth.radius / target_radius[ti]));
                const double cos_sep = -axis.dot(target_unit[ti]);
                if (cos_sep < std::cos(std::min(kPi, sat_horizon + tgt_horizon + 1e-6))) continue;
                if (is_visible(r, targets.positions[ti], fov.half_angle, axis, earth)) {
                    const std::int64_t bit = t * P + p;
                    out[bit >> 6] |= std::uint64_t{1} << (bit & 63);
                }
            }
        }
    }
    return V;
}

}  // namespace conops
