#include "conops/mcrp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace conops {

RewardMatrix::RewardMatrix(std::int64_t stages, std::int64_t steps, std::int64_t targets)
    : num_stages(stages), steps_per_stage(steps), num_targets(targets) {
    if (stages < 1 || steps < 1 || targets < 1)
        throw std::invalid_argument("RewardMatrix: dimensions must be positive");
    const auto n = static_cast<std::size_t>(stages * steps * targets);
    pi.assign(n, 0.0);
    requirement.assign(n, 1);
}

void validate(const RewardMatrix& rewards) {
    const auto n = static_cast<std::size_t>(rewards.num_stages * rewards.steps_per_stage * rewards.num_targets);
    if (rewards.pi.size() != n || rewards.requirement.size() != n)
        throw std::invalid_argument("RewardMatrix: storage does not match dimensions");
    for (double x : rewards.pi)
        if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("RewardMatrix: rewards must be finite and >= 0");
    for (auto r : rewards.requirement)
        if (r < 1) throw std::invalid_argument("RewardMatrix: coverage requirements must be >= 1");
}

std::pair<std::int64_t, std::int64_t> reward_window(std::int64_t p, std::int64_t num_steps, std::int64_t num_points) {
    if (num_points < 1 || num_steps < num_points)
        throw std::invalid_argument("reward_window: need 1 <= num_points <= num_steps");
    if (p < 0 || p >= num_points) throw std::out_of_range("reward_window: point index out of range");
    return {p * num_steps / num_points, (p + 1) * num_steps / num_points};
}

RewardMatrix build_reward_matrix(std::int64_t num_steps, std::int64_t num_points, std::int64_t num_stages) {
    if (num_stages < 1 || num_steps % num_stages != 0)
        throw std::invalid_argument("build_reward_matrix: stage count " + std::to_string(num_stages) +
                                    " does not divide " + std::to_string(num_steps) +
                                    " steps; adjust the time step or duration");
    const std::int64_t ts = num_steps / num_stages;
    RewardMatrix m(num_stages, ts, num_points);
    for (std::int64_t p = 0; p < num_points; ++p) {
        const auto [first, last] = reward_window(p, num_steps, num_points);
        for (std::int64_t t = first; t < last; ++t) m.pi[m.index(t / ts, t % ts, p)] = 1.0;
    }
    return m;
}

ReconfigPlan all_stay_plan(std::int64_t num_sats, std::int64_t num_stages) {
    ReconfigPlan plan;
    plan.paths.assign(static_cast<std::size_t>(num_sats), std::vector<std::int64_t>(num_stages + 1, 0));
    plan.stage_cost.assign(static_cast<std::size_t>(num_sats), std::vector<double>(num_stages, 0.0));
    return plan;
}

namespace {

std::int64_t level_size(const VisibilityTensor& v, std::int64_t level, std::int64_t k) {
    return level == 0 ? 1 : v.slot_count(level - 1, k);
}

}  // namespace

void check_instance(const VisibilityTensor& v, const RewardMatrix& rewards, const CostMatrix& costs) {
    validate(rewards);
    const auto S = v.num_stages(), K = v.num_sats();
    if (rewards.num_stages != S || rewards.steps_per_stage != v.steps_per_stage() ||
        rewards.num_targets != v.num_targets())
        throw std::invalid_argument("MCRP instance: reward and visibility dimensions differ");
    if (static_cast<std::int64_t>(costs.entries.size()) != S)
        throw std::invalid_argument("MCRP instance: cost matrix stage count differs from visibility");
    if (static_cast<std::int64_t>(costs.budget.size()) != K)
        throw std::invalid_argument("MCRP instance: need one budget per satellite");
    for (std::int64_t s = 0; s < S; ++s) {
        if (static_cast<std::int64_t>(costs.entries[s].size()) != K)
            throw std::invalid_argument("MCRP instance: cost matrix satellite count differs");
        for (std::int64_t k = 0; k < K; ++k) {
            const auto& m = costs.entries[s][k];
            if (static_cast<std::int64_t>(m.size()) != level_size(v, s, k))
                throw std::invalid_argument("MCRP instance: cost rows at stage " + std::to_string(s + 1) +
                                            " do not match the previous slot set");
            for (const auto& row : m)
                if (static_cast<std::int64_t>(row.size()) != level_size(v, s + 1, k))
                    throw std::invalid_argument("MCRP instance: cost columns at stage " + std::to_string(s + 1) +
                                                " do not match the slot set");
        }
    }
}

void price_plan(ReconfigPlan& plan, const CostMatrix& costs, double tolerance) {
    const std::size_t S = costs.entries.size();
    if (plan.paths.size() != costs.budget.size()) throw std::invalid_argument("plan: satellite count mismatch");
    plan.stage_cost.assign(plan.paths.size(), std::vector<double>(S, 0.0));
    plan.total_delta_v = 0.0;
    for (std::size_t k = 0; k < plan.paths.size(); ++k) {
        const auto& path = plan.paths[k];
        if (path.size() != S + 1) throw std::invalid_argument("plan: path length must be stages + 1");
        if (path[0] != 0) throw std::invalid_argument("plan: path must start at the initial slot");
        double spent = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            const auto& m = costs.entries[s][k];
            const auto i = path[s], j = path[s + 1];
            if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(m.size()) ||
                j >= static_cast<std::int64_t>(m[i].size()))
                throw std::out_of_range("plan: slot index out of range");
            const double c = m[i][j];
            if (!(c < kInfiniteCost)) throw std::invalid_argument("plan: uses an unrealizable transfer");
            plan.stage_cost[k][s] = c;
            spent += c;
            plan.total_delta_v += c;
        }
        if (spent > costs.budget[k] + tolerance) throw std::invalid_argument("plan: delta-v budget exceeded");
    }
}

CoverageProfile coverage_profile(const ReconfigPlan& plan, const VisibilityTensor& v, const RewardMatrix& rewards) {
    const auto S = v.num_stages(), K = v.num_sats(), T = v.steps_per_stage(), P = v.num_targets();
    if (static_cast<std::int64_t>(plan.paths.size()) != K) throw std::invalid_argument("plan: satellite count mismatch");
    for (const auto& path : plan.paths) {
        if (static_cast<std::int64_t>(path.size()) != S + 1)
            throw std::invalid_argument("plan: path length must be stages + 1");
    }
    CoverageProfile y{S, T, P, std::vector<std::uint8_t>(static_cast<std::size_t>(S * T * P), 0)};
    std::vector<std::int32_t> count(static_cast<std::size_t>(T * P));
    for (std::int64_t s = 0; s < S; ++s) {
        std::fill(count.begin(), count.end(), 0);
        for (std::int64_t k = 0; k < K; ++k) {
            const auto j = plan.paths[k][s + 1];
            if (j < 0 || j >= v.slot_count(s, k)) throw std::out_of_range("plan: slot index out of range");
            for (std::int64_t t = 0; t < T; ++t)
                for (std::int64_t p = 0; p < P; ++p) count[t * P + p] += v.get(s, k, j, t, p) ? 1 : 0;
        }
        for (std::int64_t t = 0; t < T; ++t)
            for (std::int64_t p = 0; p < P; ++p)
                y.y[rewards.index(s, t, p)] = count[t * P + p] >= rewards.req(s, t, p) ? 1 : 0;
    }
    return y;
}

double score_plan(const ReconfigPlan& plan, const VisibilityTensor& v, const RewardMatrix& rewards) {
    const CoverageProfile y = coverage_profile(plan, v, rewards);
    double z = 0.0;
    for (std::size_t i = 0; i < y.y.size(); ++i)
        if (y.y[i]) z += rewards.pi[i];
    return z;
}

namespace {

using Words = std::vector<std::uint64_t>;

struct Incumbent {
    bool valid = false;
    double z = -std::numeric_limits<double>::infinity();
    double dv = 0.0;
    std::vector<std::int64_t> flat;  // satellite-major decisions, levels 1..S
};

// Strictly better under (z desc, delta-v asc, lexicographic path asc).
bool better(double z, double dv, const std::vector<std::int64_t>& flat, const Incumbent& inc) {
    if (!inc.valid) return true;
    if (z != inc.z) return z > inc.z;
    if (dv != inc.dv) return dv < inc.dv;
    return flat < inc.flat;
}

class Solver {
public:
    Solver(const VisibilityTensor& v, const RewardMatrix& rewards, const CostMatrix& costs, const McrpOptions& opt)
        : v_(v), costs_(costs), opt_(opt), S_(v.num_stages()), K_(v.num_sats()) {
        build_elements(rewards);
        build_reach();
        for (std::int64_t L = 0; L <= S_; ++L)
            for (std::int64_t k = 0; k < K_; ++k) stride_ = std::max(stride_, size(L, k));
        // Multipliers in reward units per km/s; the bound takes the best of them.
        const double unit = uniform_ ? uniform_weight_ : 1.0;
        lambdas_ = {0.0};
        for (double lam = 0.25; lam <= 1024.0; lam *= 2.0) lambdas_.push_back(lam * unit);
        // With integer rewards the search maximizes z - w * total_dv, w small
        // enough that one unit of reward outweighs any delta-v difference.
        if (exact_) {
            double total = 0.0;
            for (std::int64_t k = 0; k < K_; ++k) total += loose_limit(k);
            dv_weight_ = 0.25 / (1.0 + total);
        }
    }

    ReconfigPlan run() {
        for (const auto& warm : opt_.warm_starts) consider_plan(warm);
        consider_plan(all_stay_plan(K_, S_));
        if (single_requirement_) greedy();

        assign_.assign(static_cast<std::size_t>(K_), std::vector<std::int64_t>(S_ + 1, 0));
        spent_.assign(static_cast<std::size_t>(K_), 0.0);
        flat_.assign(static_cast<std::size_t>(K_ * S_), 0);
        reset_cover();
        dv_total_ = 0.0;
        value_ = 0.0;
        open_bound_ = -std::numeric_limits<double>::infinity();
        if (single_requirement_) {
            tables_.assign(static_cast<std::size_t>(K_), {});
            best_lambda_.assign(static_cast<std::size_t>(K_), 0);
            build_tables(0);
            const double root = future_bound(0, 0);
            if (!prunable_score(root, 0)) dfs(0, root);
        } else {
            const double root = finish_bound(count_bound(0));
            if (!prunable(root, 0)) dfs_general(0, root);
        }

        if (!inc_.valid) throw std::runtime_error("solve_mcrp: no plan satisfies the delta-v budgets");
        ReconfigPlan plan = to_plan(inc_.flat);
        plan.objective = inc_.z;
        plan.optimal = !aborted_;
        plan.upper_bound = aborted_ ? std::max(inc_.z, open_bound_) : inc_.z;
        plan.nodes = nodes_;
        return plan;
    }

private:
    // ---- instance preprocessing ----
    void build_elements(const RewardMatrix& rewards) {
        const auto T = v_.steps_per_stage(), P = v_.num_targets();
        elem_.resize(S_);
        weight_.resize(S_);
        req_.resize(S_);
        words_.resize(S_);
        cov_.resize(S_);
        double total = 0.0;
        bool integral = true;
        for (std::int64_t s = 0; s < S_; ++s) {
            for (std::int64_t t = 0; t < T; ++t)
                for (std::int64_t p = 0; p < P; ++p) {
                    const double w = rewards.reward(s, t, p);
                    if (w <= 0.0) continue;
                    elem_[s].push_back(t * P + p);
                    weight_[s].push_back(w);
                    req_[s].push_back(rewards.req(s, t, p));
                    total += w;
                    integral = integral && w == std::floor(w);
                    single_requirement_ = single_requirement_ && rewards.req(s, t, p) == 1;
                }
            const std::size_t E = elem_[s].size();
            words_[s] = (E + 63) / 64;
            cov_[s].resize(K_);
            for (std::int64_t k = 0; k < K_; ++k) {
                const auto J = v_.slot_count(s, k);
                cov_[s][k].assign(static_cast<std::size_t>(J), Words(words_[s], 0));
                for (std::int64_t j = 0; j < J; ++j) {
                    const auto row = v_.row(s, k, j);
                    for (std::size_t e = 0; e < E; ++e) {
                        const auto b = elem_[s][e];
                        if ((row[b >> 6] >> (b & 63)) & 1u) cov_[s][k][j][e >> 6] |= std::uint64_t{1} << (e & 63);
                    }
                }
            }
        }
        exact_ = integral && total < 9.0e15;
        uniform_ = exact_;
        for (std::int64_t s = 0; s < S_ && uniform_; ++s)
            for (double w : weight_[s]) {
                if (uniform_weight_ == 0.0) uniform_weight_ = w;
                uniform_ = uniform_ && w == uniform_weight_;
            }
        eps_ = exact_ ? 0.0 : 1e-9 * std::max(1.0, total);
    }

    // dist_[k][a][b]: cheapest multi-stage cost from level a slot i to level b slot j (a < b).
    void build_reach() {
        dist_.resize(K_);
        for (std::int64_t k = 0; k < K_; ++k) {
            dist_[k].assign(static_cast<std::size_t>(S_ + 1), std::vector<std::vector<double>>(S_ + 1));
            for (std::int64_t a = 0; a < S_; ++a) {
                const auto Ja = size(a, k);
                for (std::int64_t b = a + 1; b <= S_; ++b) {
                    const auto Jb = size(b, k);
                    auto& d = dist_[k][a][b];
                    d.assign(static_cast<std::size_t>(Ja * Jb), kInfiniteCost);
                    const auto& step = costs_.entries[b - 1][k];
                    for (std::int64_t i = 0; i < Ja; ++i)
                        for (std::int64_t j = 0; j < Jb; ++j) {
                            if (b == a + 1) {
                                d[i * Jb + j] = step[i][j];
                                continue;
                            }
                            const auto& prev = dist_[k][a][b - 1];
                            const auto Jm = size(b - 1, k);
                            double best = kInfiniteCost;
                            for (std::int64_t m = 0; m < Jm; ++m) best = std::min(best, prev[i * Jm + m] + step[m][j]);
                            d[i * Jb + j] = best;
                        }
                }
            }
        }
    }

    std::int64_t size(std::int64_t level, std::int64_t k) const { return level_size(v_, level, k); }
    double limit(std::int64_t k) const { return costs_.budget[k] + opt_.budget_tolerance; }
    // Reachability in the bound gets extra slack so rounding can never make it inadmissible.
    double loose_limit(std::int64_t k) const { return costs_.budget[k] + 2.0 * opt_.budget_tolerance + 1e-12; }

    // ---- coverage state ----
    void reset_cover() {
        covered_.assign(static_cast<std::size_t>(S_), {});
        count_.assign(static_cast<std::size_t>(S_), {});
        for (std::int64_t s = 0; s < S_; ++s) {
            covered_[s].assign(words_[s], 0);
            count_[s].assign(elem_[s].size(), 0);
        }
    }

    double masked_weight(std::int64_t s, const Words& a, const Words* minus) const {
        if (uniform_) {
            std::int64_t n = 0;
            for (std::size_t w = 0; w < words_[s]; ++w)
                n += std::popcount(a[w] & (minus ? ~(*minus)[w] : ~std::uint64_t{0}));
            return static_cast<double>(n) * uniform_weight_;
        }
        double g = 0.0;
        for (std::size_t w = 0; w < words_[s]; ++w) {
            std::uint64_t bits = a[w] & (minus ? ~(*minus)[w] : ~std::uint64_t{0});
            while (bits) {
                const int b = std::countr_zero(bits);
                g += weight_[s][w * 64 + static_cast<std::size_t>(b)];
                bits &= bits - 1;
            }
        }
        return g;
    }

    double gain(std::int64_t s, std::int64_t k, std::int64_t j) const {
        return masked_weight(s, cov_[s][k][j], &covered_[s]);
    }

    // Adds one decision's coverage.
    void apply(std::int64_t s, std::int64_t k, std::int64_t j) {
        if (single_requirement_) {
            auto& c = covered_[s];
            const auto& add = cov_[s][k][j];
            for (std::size_t w = 0; w < words_[s]; ++w) c[w] |= add[w];
        } else {
            const auto& add = cov_[s][k][j];
            for (std::size_t e = 0; e < elem_[s].size(); ++e)
                if ((add[e >> 6] >> (e & 63)) & 1u) ++count_[s][e];
        }
    }
    // General-requirement undo; requirement-1 callers restore covered_ directly.
    void unapply(std::int64_t s, std::int64_t k, std::int64_t j) {
        const auto& add = cov_[s][k][j];
        for (std::size_t e = 0; e < elem_[s].size(); ++e)
            if ((add[e >> 6] >> (e & 63)) & 1u) --count_[s][e];
    }

    double current_value() const {
        double z = 0.0;
        for (std::int64_t s = 0; s < S_; ++s) {
            if (single_requirement_) {
                for (std::size_t e = 0; e < elem_[s].size(); ++e)
                    if ((covered_[s][e >> 6] >> (e & 63)) & 1u) z += weight_[s][e];
            } else {
                for (std::size_t e = 0; e < elem_[s].size(); ++e)
                    if (count_[s][e] >= req_[s][e]) z += weight_[s][e];
            }
        }
        return z;
    }

    bool reachable(std::int64_t k, std::int64_t from_level, std::int64_t from_slot, double spent,
                   std::int64_t to_level, std::int64_t j) const {
        const auto& d = dist_[k][from_level][to_level];
        return spent + d[from_slot * size(to_level, k) + j] <= loose_limit(k);
    }

    // ---- bounds ----
    // Count-based bound for general requirements once `made` decisions are
    // fixed: an element can still be met if fixed coverage plus every free
    // decision able to reach it attains the requirement.
    double count_bound(std::int64_t made) const {
        double ub = 0.0;
        for (std::int64_t s = 0; s < S_; ++s) {
            std::vector<std::int32_t> possible(elem_[s].size(), 0);
            for (std::int64_t k = 0; k < K_; ++k) {
                if (k * S_ + s < made) continue;
                const std::int64_t from_level = (made > k * S_) ? (made - k * S_) : 0;
                const std::int64_t from_slot = assign_[k][from_level];
                Words any(words_[s], 0);
                for (std::int64_t j = 0; j < size(s + 1, k); ++j)
                    if (reachable(k, from_level, from_slot, spent_[k], s + 1, j))
                        for (std::size_t w = 0; w < words_[s]; ++w) any[w] |= cov_[s][k][j][w];
                for (std::size_t e = 0; e < elem_[s].size(); ++e)
                    if ((any[e >> 6] >> (e & 63)) & 1u) ++possible[e];
            }
            for (std::size_t e = 0; e < elem_[s].size(); ++e)
                if (count_[s][e] + possible[e] >= req_[s][e]) ub += weight_[s][e];
        }
        return ub + eps_;
    }

    // Lagrangian path tables for requirement-1 instances. For satellite k and
    // multiplier lam, value[lam][L * stride + i] is the best completion from
    // slot i at level L of sum(gain - (lam + w) * cost), with gains measured
    // against the coverage fixed when the table set was built and w the
    // delta-v weight of the score. For any completion within remaining budget
    // R: gain - w * cost <= lam * R + value.
    // With integer rewards and a small gain range a satellite gets an exact
    // table instead: mincost[(L * stride + i) * (gmax + 1) + g] is the least
    // delta-v of a completion from slot i at level L gaining at least g.
    struct TableSet {
        std::vector<std::vector<double>> mincost;              // [k]
        std::vector<std::int64_t> gmax;                         // [k], -1 when the Lagrangian tables are used
        std::vector<std::vector<std::vector<double>>> value;  // [k][l][L * stride + i]
        std::vector<std::vector<std::size_t>> lambda;         // [k][l] index into lambdas_
        std::vector<double> future;                           // [k] bound from the initial slot
    };

    // Multipliers for satellite k in table set q: all of them for the
    // satellite being decided (its tables also bound partial paths), a window
    // around the last minimizer for later satellites.
    std::vector<std::size_t> lambda_choice(std::int64_t q, std::int64_t k) const {
        std::vector<std::size_t> out;
        if (q == 0 || k == q) {
            for (std::size_t l = 0; l < lambdas_.size(); ++l) out.push_back(l);
            return out;
        }
        const std::size_t c = best_lambda_[k];
        for (std::size_t l = c > 0 ? c - 1 : 0; l <= std::min(c + 1, lambdas_.size() - 1); ++l) out.push_back(l);
        return out;
    }

    void build_tables(std::int64_t q) {
        TableSet& ts = tables_[q];
        ts.mincost.assign(static_cast<std::size_t>(K_), {});
        ts.gmax.assign(static_cast<std::size_t>(K_), -1);
        ts.value.assign(static_cast<std::size_t>(K_), {});
        ts.lambda.assign(static_cast<std::size_t>(K_), {});
        ts.future.assign(static_cast<std::size_t>(K_), 0.0);
        const double ninf = -std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> g(static_cast<std::size_t>(S_));
        for (std::int64_t k = q; k < K_; ++k) {
            for (std::int64_t s = 0; s < S_; ++s) {
                g[s].resize(static_cast<std::size_t>(size(s + 1, k)));
                for (std::int64_t j = 0; j < size(s + 1, k); ++j) g[s][j] = gain(s, k, j);
            }
            if (exact_) {
                double total = 0.0;
                for (const auto& gs : g)
                    if (!gs.empty()) total += *std::max_element(gs.begin(), gs.end());
                if (total <= kMaxExactGain) {
                    build_exact_table(ts, k, g, static_cast<std::int64_t>(std::llround(total)));
                    continue;
                }
            }
            auto& per_lambda = ts.value[k];
            ts.lambda[k] = lambda_choice(q, k);
            per_lambda.assign(ts.lambda[k].size(), std::vector<double>(static_cast<std::size_t>((S_ + 1) * stride_), ninf));
            double fut = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < per_lambda.size(); ++l) {
                const double lam = lambdas_[ts.lambda[k][l]];
                auto& val = per_lambda[l];
                for (std::int64_t i = 0; i < size(S_, k); ++i) val[S_ * stride_ + i] = 0.0;
                for (std::int64_t L = S_ - 1; L >= 0; --L) {
                    const auto& m = costs_.entries[L][k];
                    const double* next = &val[(L + 1) * stride_];
                    const double* gl = g[L].data();
                    const std::int64_t Jn = size(L + 1, k);
                    for (std::int64_t i = 0; i < size(L, k); ++i) {
                        const double* row = m[i].data();
                        double best = ninf;
                        for (std::int64_t j = 0; j < Jn; ++j) {
                            const double c = row[j];
                            if (!(c <= loose_limit(k))) continue;
                            best = std::max(best, gl[j] - (lam + dv_weight_) * c + next[j]);
                        }
                        val[L * stride_ + i] = best;
                    }
                }
                const double f = lam * loose_limit(k) + val[0];
                if (f < fut) {
                    fut = f;
                    best_lambda_[k] = ts.lambda[k][l];
                }
            }
            ts.future[k] = fut;
        }
    }

    static constexpr double kMaxExactGain = 4096.0;

    void build_exact_table(TableSet& ts, std::int64_t k, const std::vector<std::vector<double>>& g, std::int64_t G) {
        const double inf = std::numeric_limits<double>::infinity();
        const auto width = static_cast<std::size_t>(G + 1);
        auto& f = ts.mincost[k];
        f.assign(static_cast<std::size_t>((S_ + 1) * stride_) * width, inf);
        for (std::int64_t i = 0; i < size(S_, k); ++i) f[static_cast<std::size_t>(S_ * stride_ + i) * width] = 0.0;
        for (std::int64_t L = S_ - 1; L >= 0; --L) {
            const auto& m = costs_.entries[L][k];
            for (std::int64_t i = 0; i < size(L, k); ++i) {
                double* out = &f[static_cast<std::size_t>(L * stride_ + i) * width];
                for (std::int64_t j = 0; j < size(L + 1, k); ++j) {
                    const double c = m[i][j];
                    if (!(c <= loose_limit(k))) continue;
                    const double* next = &f[static_cast<std::size_t>((L + 1) * stride_ + j) * width];
                    const auto gj = std::min<std::int64_t>(std::llround(g[L][j]), G);
                    for (std::int64_t x = 0; x <= gj; ++x) out[x] = std::min(out[x], c + next[0]);
                    for (std::int64_t x = gj + 1; x <= G; ++x) out[x] = std::min(out[x], c + next[x - gj]);
                }
            }
        }
        ts.gmax[k] = G;
        ts.future[k] = exact_completion(ts, k, 0, 0, loose_limit(k));
    }

    // Best gain - w * cost over completions costing at most `remaining`.
    double exact_completion(const TableSet& ts, std::int64_t k, std::int64_t L, std::int64_t i, double remaining) const {
        const auto width = static_cast<std::size_t>(ts.gmax[k] + 1);
        const double* f = &ts.mincost[k][static_cast<std::size_t>(L * stride_ + i) * width];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < width; ++x) {
            if (!(f[x] <= remaining)) break;
            best = std::max(best, static_cast<double>(x) - dv_weight_ * f[x]);
        }
        return best;
    }

    // Bound on what satellite k can still add from slot i at level L having spent `spent`.
    double completion_bound(std::int64_t q, std::int64_t k, std::int64_t L, std::int64_t i, double spent) const {
        if (L == S_) return 0.0;
        const double remaining = loose_limit(k) - spent;
        if (tables_[q].gmax[k] >= 0) return exact_completion(tables_[q], k, L, i, remaining);
        double ub = std::numeric_limits<double>::infinity();
        const auto& per_lambda = tables_[q].value[k];
        const auto& index = tables_[q].lambda[k];
        for (std::size_t l = 0; l < per_lambda.size(); ++l)
            ub = std::min(ub, lambdas_[index[l]] * remaining + per_lambda[l][L * stride_ + i]);
        return ub;
    }

    double future_bound(std::int64_t q, std::int64_t first) const {
        double ub = 0.0;
        for (std::int64_t k = first; k < K_; ++k) ub += tables_[q].future[k];
        return ub;
    }

    // Rounds a computed bound outward so floating error never prunes a tie.
    double finish_bound(double ub) const {
        if (!std::isfinite(ub)) return ub;
        if (exact_) return std::floor(ub + 1e-7 * std::max(1.0, std::abs(ub)));
        return ub + eps_ + 1e-9 * std::abs(ub);
    }

    // Requirement-1 nodes carry a bound on the score z - w * total_dv.
    double score_to_objective(double score) const {
        double slack = 0.0;
        for (std::int64_t k = 0; k < K_; ++k) slack += loose_limit(k);
        return finish_bound(score + dv_weight_ * slack);
    }

    double node_score(double extra) const { return value_ - dv_weight_ * dv_total_ + extra; }

    bool prunable_score(double score, std::int64_t made) const {
        if (!inc_.valid) return false;
        if (prunable(score_to_objective(score), made)) return true;
        if (dv_weight_ == 0.0) return false;
        const double inc_score = inc_.z - dv_weight_ * inc_.dv;
        return score < inc_score - 1e-9 * std::max(1.0, std::abs(inc_score));
    }

    // True when no completion of the current prefix (first `made` decisions) can beat the incumbent.
    bool prunable(double ub, std::int64_t made) const {
        if (!inc_.valid) return false;
        if (ub < inc_.z) return true;
        if (!exact_ || ub > inc_.z) return false;
        if (dv_total_ > inc_.dv) return true;
        if (dv_total_ < inc_.dv) return false;
        for (std::int64_t d = 0; d < made; ++d) {
            if (flat_[d] != inc_.flat[d]) return flat_[d] > inc_.flat[d];
        }
        return false;
    }

    bool out_of_nodes() {
        if (++nodes_ > opt_.node_limit) aborted_ = true;
        return aborted_;
    }

    void record_leaf(double z) {
        if (better(z, dv_total_, flat_, inc_)) {
            inc_.valid = true;
            inc_.z = z;
            inc_.dv = dv_total_;
            inc_.flat = flat_;
        }
    }

    // Requirement-1 search. Table set k is built on entering satellite k.
    void dfs(std::int64_t depth, double node_bound) {
        const std::int64_t k = depth / S_, s = depth % S_;
        if (s == 0 && depth > 0) {
            build_tables(k);
            node_bound = std::min(node_bound, node_score(future_bound(k, k)));
            if (prunable_score(node_bound, depth)) return;
        }
        const std::int64_t from = assign_[k][s];
        const auto& edge = costs_.entries[s][k][from];
        const double rest = future_bound(k, k + 1);

        struct Child {
            std::int64_t j;
            double gain, cost, bound;
        };
        std::vector<Child> children;
        for (std::int64_t j = 0; j < size(s + 1, k); ++j) {
            const double c = edge[j];
            if (!(c < kInfiniteCost) || spent_[k] + c > limit(k)) continue;
            const double g = gain(s, k, j);
            const double b = node_score(g - dv_weight_ * c + completion_bound(k, k, s + 1, j, spent_[k] + c) + rest);
            children.push_back({j, g, c, b});
        }
        std::stable_sort(children.begin(), children.end(), [](const Child& a, const Child& b) {
            if (a.bound != b.bound) return a.bound > b.bound;
            if (a.gain != b.gain) return a.gain > b.gain;
            return a.cost < b.cost;
        });

        const Words saved = covered_[s];
        const double prev_value = value_, prev_spent = spent_[k], prev_total = dv_total_;
        for (const Child& ch : children) {
            if (out_of_nodes()) break;
            assign_[k][s + 1] = ch.j;
            spent_[k] = prev_spent + ch.cost;
            dv_total_ = prev_total + ch.cost;
            flat_[depth] = ch.j;
            if (!prunable_score(ch.bound, depth + 1)) {
                apply(s, k, ch.j);
                value_ = exact_ ? prev_value + ch.gain : current_value();
                if (depth + 1 == K_ * S_) record_leaf(exact_ ? value_ : current_value());
                else dfs(depth + 1, ch.bound);
                covered_[s] = saved;
                value_ = prev_value;
            }
            assign_[k][s + 1] = 0;
            spent_[k] = prev_spent;
            dv_total_ = prev_total;
            flat_[depth] = 0;
            if (aborted_) break;
        }
        if (aborted_) open_bound_ = std::max(open_bound_, score_to_objective(node_bound));
    }

    // General-requirement search with the count-based bound.
    void dfs_general(std::int64_t depth, double node_bound) {
        const std::int64_t k = depth / S_, s = depth % S_;
        const std::int64_t from = assign_[k][s];
        const auto& edge = costs_.entries[s][k][from];
        const double prev_spent = spent_[k], prev_total = dv_total_;
        for (std::int64_t j = 0; j < size(s + 1, k); ++j) {
            const double c = edge[j];
            if (!(c < kInfiniteCost) || prev_spent + c > limit(k)) continue;
            if (out_of_nodes()) break;
            assign_[k][s + 1] = j;
            spent_[k] = prev_spent + c;
            dv_total_ = prev_total + c;
            flat_[depth] = j;
            apply(s, k, j);
            if (depth + 1 == K_ * S_) {
                record_leaf(current_value());
            } else {
                const double ub = finish_bound(count_bound(depth + 1));
                if (!prunable(ub, depth + 1)) dfs_general(depth + 1, ub);
            }
            unapply(s, k, j);
            assign_[k][s + 1] = 0;
            spent_[k] = prev_spent;
            dv_total_ = prev_total;
            flat_[depth] = 0;
            if (aborted_) break;
        }
        if (aborted_) open_bound_ = std::max(open_bound_, node_bound);
    }

    // ---- incumbents ----
    ReconfigPlan to_plan(const std::vector<std::int64_t>& flat) const {
        ReconfigPlan plan = all_stay_plan(K_, S_);
        for (std::int64_t k = 0; k < K_; ++k)
            for (std::int64_t s = 0; s < S_; ++s) plan.paths[k][s + 1] = flat[k * S_ + s];
        price_plan(plan, costs_, opt_.budget_tolerance);
        return plan;
    }

    void consider_plan(const ReconfigPlan& candidate) {
        ReconfigPlan plan = candidate;
        try {
            price_plan(plan, costs_, opt_.budget_tolerance);
            for (std::int64_t k = 0; k < K_; ++k)
                for (std::int64_t s = 0; s < S_; ++s)
                    if (plan.paths[k][s + 1] >= v_.slot_count(s, k)) return;
        } catch (const std::exception&) {
            return;  // infeasible or mismatched candidates are ignored
        }
        std::vector<std::int64_t> flat(static_cast<std::size_t>(K_ * S_));
        reset_cover();
        for (std::int64_t k = 0; k < K_; ++k)
            for (std::int64_t s = 0; s < S_; ++s) {
                flat[k * S_ + s] = plan.paths[k][s + 1];
                apply(s, k, plan.paths[k][s + 1]);
            }
        const double z = current_value();
        if (better(z, plan.total_delta_v, flat, inc_)) inc_ = {true, z, plan.total_delta_v, flat};
    }

    void greedy() {
        ReconfigPlan plan = all_stay_plan(K_, S_);
        reset_cover();
        for (std::int64_t k = 0; k < K_; ++k) {
            double spent = 0.0;
            for (std::int64_t s = 0; s < S_; ++s) {
                const auto from = plan.paths[k][s];
                const auto& edge = costs_.entries[s][k][from];
                std::int64_t pick = -1;
                double pick_gain = -1.0, pick_cost = 0.0;
                for (std::int64_t j = 0; j < size(s + 1, k); ++j) {
                    const double c = edge[j];
                    if (!(c < kInfiniteCost) || spent + c > limit(k)) continue;
                    const double g = gain(s, k, j);
                    if (g > pick_gain || (g == pick_gain && c < pick_cost)) {
                        pick = j;
                        pick_gain = g;
                        pick_cost = c;
                    }
                }
                if (pick < 0) return;
                plan.paths[k][s + 1] = pick;
                spent += pick_cost;
                apply(s, k, pick);
            }
        }
        consider_plan(plan);
    }

    const VisibilityTensor& v_;
    const CostMatrix& costs_;
    const McrpOptions& opt_;
    const std::int64_t S_, K_;

    std::vector<std::vector<std::int64_t>> elem_;  // [s][e] -> bit t*P+p in the visibility row
    std::vector<std::vector<double>> weight_;
    std::vector<std::vector<std::int32_t>> req_;
    std::vector<std::size_t> words_;
    std::vector<std::vector<std::vector<Words>>> cov_;  // [s][k][j]
    std::vector<std::vector<std::vector<std::vector<double>>>> dist_;
    bool single_requirement_ = true;
    bool exact_ = true;
    bool uniform_ = false;  // all weights equal integers: gains are popcounts
    double uniform_weight_ = 0.0;
    double eps_ = 0.0;

    std::vector<double> lambdas_;
    std::int64_t stride_ = 0;  // largest slot count over levels and satellites
    std::vector<TableSet> tables_;
    double value_ = 0.0;  // objective of the fixed decisions
    double dv_weight_ = 0.0;
    std::vector<std::size_t> best_lambda_;  // [k] last minimizing multiplier

    std::vector<Words> covered_;
    std::vector<std::vector<std::int32_t>> count_;
    std::vector<std::vector<std::int64_t>> assign_;
    std::vector<double> spent_;
    std::vector<std::int64_t> flat_;
    double dv_total_ = 0.0;

    Incumbent inc_;
    std::int64_t nodes_ = 0;
    bool aborted_ = false;
    double open_bound_ = 0.0;
};

}  // namespace

ReconfigPlan solve_mcrp(const VisibilityTensor& v, const RewardMatrix& rewards, const CostMatrix& costs,
                        const McrpOptions& options) {
    check_instance(v, rewards, costs);
    Solver solver(v, rewards, costs, options);
    return solver.run();
}

ReconfigPlan solve_mcrp_exhaustive(const VisibilityTensor& v, const RewardMatrix& rewards, const CostMatrix& costs,
                                   double budget_tolerance) {
    check_instance(v, rewards, costs);
    const auto S = v.num_stages(), K = v.num_sats();

    double joint = 1.0;
    for (std::int64_t k = 0; k < K; ++k)
        for (std::int64_t s = 0; s < S; ++s) joint *= static_cast<double>(v.slot_count(s, k));
    if (joint > 1e7) throw std::invalid_argument("solve_mcrp_exhaustive: more than 1e7 joint paths");

    // Feasible single-satellite paths in lexicographic order.
    std::vector<std::vector<std::vector<std::int64_t>>> paths(static_cast<std::size_t>(K));
    for (std::int64_t k = 0; k < K; ++k) {
        std::vector<std::int64_t> path(S + 1, 0);
        auto rec = [&](auto&& self, std::int64_t s, double spent) -> void {
            if (s == S) {
                if (spent <= costs.budget[k] + budget_tolerance) paths[k].push_back(path);
                return;
            }
            for (std::int64_t j = 0; j < v.slot_count(s, k); ++j) {
                const double c = costs.entries[s][k][path[s]][j];
                if (!(c < kInfiniteCost)) continue;
                path[s + 1] = j;
                self(self, s + 1, spent + c);
            }
        };
        rec(rec, 0, 0.0);
        if (paths[k].empty()) throw std::runtime_error("solve_mcrp_exhaustive: no path satisfies the delta-v budget");
    }

    ReconfigPlan best;
    bool have = false;
    std::vector<std::size_t> pick(static_cast<std::size_t>(K), 0);
    ReconfigPlan plan = all_stay_plan(K, S);
    while (true) {
        for (std::int64_t k = 0; k < K; ++k) plan.paths[k] = paths[k][pick[k]];
        price_plan(plan, costs, budget_tolerance);
        plan.objective = score_plan(plan, v, rewards);
        bool take = !have;
        if (have) {
            if (plan.objective != best.objective) take = plan.objective > best.objective;
            else if (plan.total_delta_v != best.total_delta_v) take = plan.total_delta_v < best.total_delta_v;
            else take = plan.paths < best.paths;
        }
        if (take) {
            best = plan;
            have = true;
        }
        std::int64_t k = K - 1;
        while (k >= 0 && ++pick[k] == paths[k].size()) pick[k--] = 0;
        if (k < 0) break;
    }
    best.optimal = true;
    best.upper_bound = best.objective;
    best.nodes = static_cast<std::int64_t>(joint);
    return best;
}

void write_plan_csv(std::ostream& out, const ReconfigPlan& plan) {
    out << "sat,stage,from_slot,to_slot,delta_v_km_s\n";
    char buf[128];
    for (std::size_t k = 0; k < plan.paths.size(); ++k)
        for (std::size_t s = 0; s + 1 < plan.paths[k].size(); ++s) {
            const double dv = s < plan.stage_cost[k].size() ? plan.stage_cost[k][s] : 0.0;
            std::snprintf(buf, sizeof buf, "%zu,%zu,%lld,%lld,%.9f\n", k + 1, s + 1,
                          static_cast<long long>(plan.paths[k][s] + 1), static_cast<long long>(plan.paths[k][s + 1] + 1),
                          dv);
            out << buf;
        }
}

}  // namespace conops
