#include "conops/mcrp.hpp"
#include "instances.hpp"

#include <doctest.h>

#include <sstream>

using namespace conops;

namespace {

// Reward recomputed straight from the definition: coverage count per (s, t, p).
double oracle_score(const ReconfigPlan& plan, const McrpInstance& inst) {
    const auto& v = inst.visibility;
    const auto& r = inst.rewards;
    double z = 0.0;
    for (std::int64_t s = 0; s < v.num_stages(); ++s)
        for (std::int64_t t = 0; t < v.steps_per_stage(); ++t)
            for (std::int64_t p = 0; p < v.num_targets(); ++p) {
                int count = 0;
                for (std::int64_t k = 0; k < v.num_sats(); ++k) count += v.get(s, k, plan.paths[k][s + 1], t, p);
                if (count >= r.req(s, t, p)) z += r.reward(s, t, p);
            }
    return z;
}

bool within_budget(const ReconfigPlan& plan, const CostMatrix& costs) {
    for (std::size_t k = 0; k < plan.paths.size(); ++k) {
        double spent = 0.0;
        if (plan.paths[k][0] != 0) return false;
        for (std::size_t s = 0; s < costs.entries.size(); ++s)
            spent += costs.entries[s][k][plan.paths[k][s]][plan.paths[k][s + 1]];
        if (!(spent <= costs.budget[k] + 1e-9)) return false;
    }
    return true;
}

void cross_check(const McrpInstance& inst) {
    const auto fast = solve_mcrp(inst.visibility, inst.rewards, inst.costs);
    const auto slow = solve_mcrp_exhaustive(inst.visibility, inst.rewards, inst.costs);
    CHECK(fast.optimal);
    CHECK(fast.objective == slow.objective);
    CHECK(fast.paths == slow.paths);
    CHECK(fast.total_delta_v == slow.total_delta_v);
    CHECK(within_budget(fast, inst.costs));
    CHECK(oracle_score(fast, inst) == doctest::Approx(fast.objective).epsilon(1e-12));
    CHECK(fast.objective >= score_plan(all_stay_plan(inst.visibility.num_sats(), inst.visibility.num_stages()),
                                       inst.visibility, inst.rewards));
}

}  // namespace

TEST_CASE("reward windows") {
    CHECK(reward_window(0, 8, 2) == std::pair<std::int64_t, std::int64_t>{0, 4});
    CHECK(reward_window(1, 8, 2) == std::pair<std::int64_t, std::int64_t>{4, 8});
    CHECK(reward_window(0, 216, 2).second == 108);
    for (std::int64_t T : {7, 100, 216, 1000})
        for (std::int64_t P : {1, 2, 3, 7}) {
            std::int64_t next = 0;
            for (std::int64_t p = 0; p < P; ++p) {
                const auto [a, b] = reward_window(p, T, P);
                CHECK(a == next);
                CHECK(b > a);
                next = b;
            }
            CHECK(next == T);
        }
    CHECK_THROWS(reward_window(3, 10, 3));
}

TEST_CASE("reward matrix has one active point per step") {
    const auto m = build_reward_matrix(8, 2, 2);
    for (std::int64_t t = 0; t < 4; ++t) {
        CHECK(m.reward(0, t, 0) == 1.0);
        CHECK(m.reward(0, t, 1) == 0.0);
        CHECK(m.reward(1, t, 1) == 1.0);
    }
    const auto big = build_reward_matrix(2160, 11, 4);
    for (std::int64_t s = 0; s < 4; ++s)
        for (std::int64_t t = 0; t < big.steps_per_stage; ++t) {
            double col = 0.0;
            for (std::int64_t p = 0; p < 11; ++p) col += big.reward(s, t, p);
            CHECK(col == 1.0);
        }
    CHECK_THROWS_AS(build_reward_matrix(10, 2, 3), std::invalid_argument);
}

TEST_CASE("scoring plans") {
    const std::int64_t T = 6, P = 2;
    VisibilityTensor v(1, 2, 2, T, P);
    v.set_slot_count(0, 0, 2);
    v.set_slot_count(0, 1, 2);
    for (std::int64_t t = 0; t < T; ++t)
        for (std::int64_t p = 0; p < P; ++p) {
            v.set(0, 0, 1, t, p);
            v.set(0, 1, 1, t, p);
        }
    auto r = build_reward_matrix(T, P, 1);
    ReconfigPlan plan = all_stay_plan(2, 1);
    CHECK(score_plan(plan, v, r) == 0.0);
    plan.paths = {{0, 1}, {0, 1}};
    CHECK(score_plan(plan, v, r) == static_cast<double>(T));
    for (auto& x : r.requirement) x = 2;
    CHECK(score_plan(plan, v, r) == static_cast<double>(T));
    plan.paths = {{0, 1}, {0, 0}};
    CHECK(score_plan(plan, v, r) == 0.0);
    const auto y = coverage_profile(plan, v, r);
    for (auto b : y.y) CHECK(b == 0);
    plan.paths = {{0, 2}, {0, 0}};
    CHECK_THROWS(score_plan(plan, v, r));
}

TEST_CASE("pricing plans") {
    CostMatrix c;
    c.entries = {{{{0.0, 1.0, kInfiniteCost}}, {{0.0, 0.5}}}};
    c.budget = {1.0, 0.25};
    ReconfigPlan plan = all_stay_plan(2, 1);
    price_plan(plan, c);
    CHECK(plan.total_delta_v == 0.0);
    plan.paths = {{0, 1}, {0, 0}};
    price_plan(plan, c);
    CHECK(plan.total_delta_v == 1.0);
    CHECK(plan.stage_cost[0][0] == 1.0);
    plan.paths = {{0, 2}, {0, 0}};
    CHECK_THROWS_AS(price_plan(plan, c), std::invalid_argument);
    plan.paths = {{0, 0}, {0, 1}};
    CHECK_THROWS_AS(price_plan(plan, c), std::invalid_argument);
    plan.paths = {{1, 0}, {0, 0}};
    CHECK_THROWS_AS(price_plan(plan, c), std::invalid_argument);
    plan.paths = {{0, 3}, {0, 0}};
    CHECK_THROWS_AS(price_plan(plan, c), std::out_of_range);
}

TEST_CASE("solver small cases") {
    SUBCASE("single slot per stage gives the stay plan") {
        auto inst = testgen::random_instance(7, {1, 2, 1, 10, 2});
        const auto plan = solve_mcrp(inst.visibility, inst.rewards, inst.costs);
        CHECK(plan.paths == all_stay_plan(inst.visibility.num_sats(), inst.visibility.num_stages()).paths);
        CHECK(plan.objective == score_plan(plan, inst.visibility, inst.rewards));
    }
    SUBCASE("budget picks the best affordable slot") {
        VisibilityTensor v(1, 1, 3, 4, 1);
        v.set_slot_count(0, 0, 3);
        for (int t = 0; t < 4; ++t) v.set(0, 0, 2, t, 0);       // best slot, too expensive
        for (int t = 0; t < 3; ++t) v.set(0, 0, 1, t, 0);       // affordable
        v.set(0, 0, 0, 0, 0);
        const auto r = build_reward_matrix(4, 1, 1);
        CostMatrix c;
        c.entries = {{{{0.0, 1.0, 3.0}}}};
        c.budget = {2.0};
        const auto plan = solve_mcrp(v, r, c);
        CHECK(plan.paths[0][1] == 1);
        CHECK(plan.objective == 3.0);
    }
    SUBCASE("zero budget and unrealizable moves force the stay plan") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto inst = testgen::random_instance(seed);
            for (auto& b : inst.costs.budget) b = 0.0;
            for (auto& stage : inst.costs.entries)
                for (auto& m : stage)
                    for (auto& row : m)
                        for (auto& x : row) x = x == 0.0 ? 0.0 : 0.5;
            auto plan = solve_mcrp(inst.visibility, inst.rewards, inst.costs);
            CHECK(plan.total_delta_v == 0.0);
            auto inf = inst;
            for (std::size_t s = 0; s < inf.costs.entries.size(); ++s)
                for (auto& m : inf.costs.entries[s])
                    for (std::size_t i = 0; i < m.size(); ++i)
                        for (std::size_t j = 0; j < m[i].size(); ++j)
                            m[i][j] = (s == 0 ? j == 0 : i == j) ? 0.0 : kInfiniteCost;
            for (auto& b : inf.costs.budget) b = 100.0;
            plan = solve_mcrp(inf.visibility, inf.rewards, inf.costs);
            CHECK(plan.paths == all_stay_plan(inf.visibility.num_sats(), inf.visibility.num_stages()).paths);
        }
    }
}

TEST_CASE("solver agrees with exhaustive enumeration") {
    SUBCASE("unit rewards") {
        for (std::uint64_t seed = 1; seed <= 300; ++seed) cross_check(testgen::random_instance(seed));
    }
    SUBCASE("larger unit instances") {
        for (std::uint64_t seed = 1; seed <= 40; ++seed)
            cross_check(testgen::random_instance(1000 + seed, {3, 3, 4, 12, 2}));
    }
    SUBCASE("integer weights") {
        for (std::uint64_t seed = 1; seed <= 100; ++seed)
            cross_check(testgen::random_instance(2000 + seed, {}, testgen::Weights::Integer));
    }
    SUBCASE("fractional weights") {
        for (std::uint64_t seed = 1; seed <= 100; ++seed)
            cross_check(testgen::random_instance(3000 + seed, {}, testgen::Weights::Fractional));
    }
    SUBCASE("coverage requirement of two") {
        for (std::uint64_t seed = 1; seed <= 100; ++seed)
            cross_check(testgen::random_instance(4000 + seed, {3, 2, 3, 10, 2}, testgen::Weights::Unit, 2));
    }
}

TEST_CASE("monotonicity in budget") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto inst = testgen::random_instance(5000 + seed);
        double prev = -1.0;
        for (double b : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            for (auto& x : inst.costs.budget) x = b;
            const double z = solve_mcrp(inst.visibility, inst.rewards, inst.costs).objective;
            CHECK(z >= prev);
            prev = z;
        }
    }
}

TEST_CASE("node limit reports an incumbent and a bound") {
    auto inst = testgen::random_instance(77, {3, 3, 4, 20, 3});
    McrpOptions opt;
    opt.node_limit = 3;
    const auto limited = solve_mcrp(inst.visibility, inst.rewards, inst.costs, opt);
    const auto full = solve_mcrp(inst.visibility, inst.rewards, inst.costs);
    CHECK(limited.objective <= full.objective);
    if (!limited.optimal) CHECK(limited.upper_bound >= full.objective);
    CHECK(within_budget(limited, inst.costs));

    McrpOptions warm;
    warm.node_limit = 1;
    warm.warm_starts = {full};
    CHECK(solve_mcrp(inst.visibility, inst.rewards, inst.costs, warm).objective == full.objective);
}

TEST_CASE("instance IO round trip") {
    const auto inst = testgen::random_instance(99, {2, 2, 4, 20, 3}, testgen::Weights::Integer, 2);
    std::stringstream buf;
    write_instance(buf, inst);
    const auto back = read_instance(buf);
    CHECK(back.visibility == inst.visibility);
    CHECK(back.rewards == inst.rewards);
    CHECK(back.costs.entries == inst.costs.entries);
    CHECK(back.costs.budget == inst.costs.budget);

    std::stringstream bad("NOTANINSTANCE");
    CHECK_THROWS(read_instance(bad));
    std::string truncated = [&] {
        std::stringstream b;
        write_instance(b, inst);
        return b.str().substr(0, 100);
    }();
    std::stringstream tb(truncated);
    CHECK_THROWS(read_instance(tb));
}

TEST_CASE("plan CSV") {
    ReconfigPlan plan = all_stay_plan(1, 2);
    plan.paths = {{0, 1, 1}};
    plan.stage_cost = {{0.5, 0.0}};
    std::ostringstream out;
    write_plan_csv(out, plan);
    CHECK(out.str().rfind("sat,stage,from_slot,to_slot,delta_v_km_s\n", 0) == 0);
    CHECK(out.str().find("1,1,1,2,") != std::string::npos);
}
