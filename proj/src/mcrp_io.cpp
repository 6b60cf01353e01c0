#include "conops/mcrp.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace conops {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'R', 'P', 'I', 'N', 'S', 'T'};
constexpr std::uint64_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(buf, 8);
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("MCRP instance: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::int64_t get_dim(std::istream& in) {
    const std::uint64_t v = get_u64(in);
    if (v > (std::uint64_t{1} << 32)) throw std::runtime_error("MCRP instance: implausible dimension");
    return static_cast<std::int64_t>(v);
}

}  // namespace

void write_instance(std::ostream& out, const McrpInstance& inst) {
    check_instance(inst.visibility, inst.rewards, inst.costs);
    const auto& v = inst.visibility;
    out.write(kMagic, sizeof kMagic);
    put_u64(out, kVersion);
    for (std::int64_t d : {v.num_stages(), v.num_sats(), v.max_slots(), v.steps_per_stage(), v.num_targets()})
        put_u64(out, static_cast<std::uint64_t>(d));
    for (double b : inst.costs.budget) put_f64(out, b);
    for (const auto& stage : inst.costs.entries)
        for (const auto& m : stage) {
            put_u64(out, m.size());
            put_u64(out, m.empty() ? 0 : m.front().size());
            for (const auto& row : m)
                for (double c : row) put_f64(out, c);
        }
    for (double x : inst.rewards.pi) put_f64(out, x);
    for (std::int32_t r : inst.rewards.requirement) put_u64(out, static_cast<std::uint32_t>(r));
    v.write(out);
}

McrpInstance read_instance(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("MCRP instance: bad magic");
    if (get_u64(in) != kVersion) throw std::runtime_error("MCRP instance: unsupported version");
    const std::int64_t S = get_dim(in), K = get_dim(in), J = get_dim(in), T = get_dim(in), P = get_dim(in);

    McrpInstance inst;
    inst.costs.budget.resize(static_cast<std::size_t>(K));
    for (auto& b : inst.costs.budget) b = get_f64(in);
    inst.costs.entries.resize(static_cast<std::size_t>(S));
    std::vector<std::int64_t> cols(static_cast<std::size_t>(S * K));
    for (std::int64_t s = 0; s < S; ++s) {
        inst.costs.entries[s].resize(static_cast<std::size_t>(K));
        for (std::int64_t k = 0; k < K; ++k) {
            const std::int64_t rows = get_dim(in), c = get_dim(in);
            if (rows > J + 1 || c > J) throw std::runtime_error("MCRP instance: cost block exceeds slot count");
            cols[s * K + k] = c;
            auto& m = inst.costs.entries[s][k];
            m.assign(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(c)));
            for (auto& row : m)
                for (auto& x : row) x = get_f64(in);
        }
    }
    inst.rewards = RewardMatrix(S, T, P);
    for (auto& x : inst.rewards.pi) x = get_f64(in);
    for (auto& r : inst.rewards.requirement) r = static_cast<std::int32_t>(get_u64(in));

    inst.visibility = VisibilityTensor::read(in);
    auto& v = inst.visibility;
    if (v.num_stages() != S || v.num_sats() != K || v.max_slots() != J || v.steps_per_stage() != T ||
        v.num_targets() != P)
        throw std::runtime_error("MCRP instance: visibility header disagrees with instance header");
    for (std::int64_t s = 0; s < S; ++s)
        for (std::int64_t k = 0; k < K; ++k) v.set_slot_count(s, k, cols[s * K + k]);
    check_instance(inst.visibility, inst.rewards, inst.costs);
    return inst;
}

void save_instance(const std::string& path, const McrpInstance& instance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    write_instance(out, instance);
}

McrpInstance load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_instance(in);
}

}  // namespace conops
