#include <atomic>
#include <deque>

#include "doctest.h"
#include "fixtures.hpp"

using namespace ptamp;

namespace {

// Shortest skeleton length by breadth-first search over symbolic states.
int bfs_length(const Domain& d, const ProblemSpec& p) {
    auto acts = ground(d, p.typed_objects());
    std::map<AtomSet, int> dist{{p.init.atoms, 0}};
    std::deque<AtomSet> q{p.init.atoms};
    while (!q.empty()) {
        AtomSet s = q.front();
        q.pop_front();
        WorldState ws = p.init;
        ws.atoms = s;
        if (ws.holds(p.goal)) return dist[s];
        for (const auto& g : acts) {
            if (!applicable(ws, g)) continue;
            AtomSet n = apply(ws, g).atoms;
            if (dist.emplace(n, dist[s] + 1).second) q.push_back(n);
        }
    }
    return -1;
}

// Step-by-step replay of a blocks plan, written against the domain rules
// rather than the library validator. Returns the failing step or -1.
int blocks_replay(const ProblemSpec& p, const Plan& plan, const WorldModel& w) {
    const Domain& d = builtin_domain("blocks");
    WorldState s = p.init;
    std::set<std::string> held;
    for (size_t i = 0; i < plan.skeleton.size(); ++i) {
        const auto& st = plan.skeleton[i];
        const int fail = static_cast<int>(i);
        auto ga = ground_one(d, st.action, st.args);
        for (const auto& a : ga.pre_pos)
            if (!s.atoms.count(a)) return fail;
        const std::string& x = st.args[0];
        const Pose& key = st.key_poses.at(0);
        if (st.action == "pick" || st.action == "unstack") {
            if (!pose_near(key, s.poses.at(x), 1e-9)) return fail;
            held.insert(x);
        } else if (st.action == "place") {
            if (std::abs(key.z - 0.025) > 1e-9) return fail;
            if (!in_bounds(key, w.footprint(x), w)) return fail;
            for (const auto& o : s.movables()) {
                if (o == x || held.count(o)) continue;
                const Pose& q = s.poses.at(o);
                const bool over = std::abs(key.x - q.x) < 0.05 && std::abs(key.y - q.y) < 0.05 &&
                                  std::abs(key.z - q.z) < 0.05;
                if (over) return fail;
            }
            s.poses[x] = key;
            held.erase(x);
        } else {
            Pose want = s.poses.at(st.args[1]);
            want.z += 0.05;
            if (!pose_near(key, want, 1e-9)) return fail;
            s.poses[x] = key;
            held.erase(x);
        }
        for (const auto& a : ga.del) s.atoms.erase(a);
        for (const auto& a : ga.add) s.atoms.insert(a);
    }
    return s.holds(p.goal) ? -1 : static_cast<int>(plan.skeleton.size());
}

}  // namespace

TEST_SUITE("solver") {
    TEST_CASE("two-block swap takes four steps") {
        const Domain& d = builtin_domain("blocks");
        auto p = fx::block_problem("(clear A) (onblock A B) (ontable B T) (handempty)", "(onblock B A)", {"A", "B"});
        auto w = make_world(d, p);
        auto r = solve(d, p, w);
        REQUIRE(r.ok());
        std::vector<std::string> acts;
        for (const auto& s : r.plan.skeleton) acts.push_back(s.action);
        CHECK(acts == std::vector<std::string>{"unstack", "place", "pick", "stack"});
        CHECK(r.plan.horizon() == bfs_length(d, p));
        CHECK(validate(d, p, w, r.plan).ok);
    }

    TEST_CASE("satisfied goal gives the empty plan") {
        const Domain& d = builtin_domain("blocks");
        auto p = fx::block_problem("(clear A) (ontable A T) (handempty)", "(clear A)", {"A"});
        auto r = solve(d, p, make_world(d, p));
        REQUIRE(r.ok());
        CHECK(r.plan.horizon() == 0);
    }

    TEST_CASE("uniform-cost search matches breadth-first lengths") {
        const Domain& d = builtin_domain("blocks");
        SolverConfig ucs;
        ucs.heuristic = false;
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            Instance inst = gen_instance(parse_task("Block4"), seed);
            auto r = solve(d, inst.problem, inst.world, ucs);
            REQUIRE(r.ok());
            CHECK(r.plan.horizon() == bfs_length(d, inst.problem));
            CHECK(validate(d, inst.problem, inst.world, r.plan).ok);
        }
    }

    TEST_CASE("plans validate and a deleted step is caught") {
        for (const char* task : {"Block6", "Cook4"}) {
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                Instance inst = gen_instance(parse_task(task), seed);
                auto r = solve(*inst.domain, inst.problem, inst.world);
                REQUIRE(r.ok());
                REQUIRE(validate(*inst.domain, inst.problem, inst.world, r.plan).ok);
                if (r.plan.skeleton.empty()) continue;
                Plan cut = r.plan;
                cut.skeleton.erase(cut.skeleton.begin());
                auto v = validate(*inst.domain, inst.problem, inst.world, cut);
                CHECK_FALSE(v.ok);
                CHECK(v.failing_step >= 0);
            }
        }
    }

    TEST_CASE("validator agrees with an independent replay on swapped steps") {
        const Domain& d = builtin_domain("blocks");
        Rng rng(2024);
        int invalid = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Instance inst = gen_instance(parse_task("Block6"), seed);
            auto r = solve(d, inst.problem, inst.world);
            REQUIRE(r.ok());
            Plan m = r.plan;
            if (m.skeleton.size() >= 2) {
                size_t i = rng() % m.skeleton.size(), j = rng() % m.skeleton.size();
                std::swap(m.skeleton[i], m.skeleton[j]);
            }
            auto v = validate(d, inst.problem, inst.world, m);
            const int ref = blocks_replay(inst.problem, m, inst.world);
            CHECK(v.ok == (ref < 0));
            if (!v.ok) {
                CHECK(v.failing_step == ref);
                ++invalid;
            }
        }
        CHECK(invalid > 0);
    }

    TEST_CASE("fixed seed and config give the same plan") {
        Instance inst = gen_instance(parse_task("Block6"), 17);
        SolverConfig cfg;
        cfg.seed = 99;
        auto a = solve(*inst.domain, inst.problem, inst.world, cfg);
        auto b = solve(*inst.domain, inst.problem, inst.world, cfg);
        REQUIRE(a.ok());
        CHECK(a.plan.skeleton == b.plan.skeleton);
        CHECK(plan_to_json(a.plan, false) == plan_to_json(b.plan, false));
    }

    TEST_CASE("failure kinds are distinguished") {
        const Domain& d = builtin_domain("blocks");
        // the only free table spot is covered, so the placement can never bind
        auto p = fx::block_problem("(clear A) (onblock A B) (ontable B T) (handempty)", "(ontable A T)", {"A", "B"});
        auto w = make_world(d, p);
        w.fixtures.push_back({"cover", Pose{0, 0, 0.05, 0}, Footprint{0.5, 0.3, 0.05}});
        w.max_attempts = 5;
        auto r = solve(d, p, w);
        CHECK(r.status == SolveStatus::BindingExhausted);

        auto q = fx::block_problem("(clear A) (ontable A T) (handempty)", "(onblock A A)", {"A"});
        CHECK(solve(d, q, make_world(d, q)).status == SolveStatus::SymbolicUnsat);

        Instance big = gen_instance(parse_task("Block8"), 3);
        std::atomic<bool> cancel{true};
        SolverConfig c;
        c.cancel = &cancel;
        c.max_expansions = 100000000;
        auto rc = solve(d, big.problem, big.world, c);
        CHECK(rc.status == SolveStatus::Cancelled);
        SolverConfig lim;
        lim.max_expansions = 10;
        CHECK(solve(d, big.problem, big.world, lim).status == SolveStatus::ExpansionLimit);
    }

    TEST_CASE("demonstrations reach the goal and replay") {
        Instance ref = gen_instance(parse_task("Block6"), 0);
        const auto& demos = fx::block6_demos();
        REQUIRE(demos.size() == 100);
        double mean = 0;
        for (const auto& dm : demos) {
            CHECK(dm.steps.back().holds(ref.problem.goal));
            CHECK(dm.actions.size() + 1 == dm.steps.size());
            mean += static_cast<double>(dm.actions.size());
        }
        mean /= 100.0;
        CHECK(mean >= 15.44 * 0.7);
        CHECK(mean <= 15.44 * 1.3);

        auto one = generate_demos(task_family(parse_task("Block6")), 1, 3);
        REQUIRE(one.size() == 1);
        Instance inst = task_family(parse_task("Block6"))(derive_seed(3, 0));
        Plan p;
        for (size_t k = 0; k < one[0].actions.size(); ++k) {
            const Atom call = *fx::atoms(one[0].actions[k]).begin();
            PlanStep st;
            st.action = call.pred;
            st.args = call.args;
            const auto& sc = inst.domain->action(st.action);
            st.key_poses.push_back(one[0].steps[sc.motion == MotionKind::Grasp ? k : k + 1].poses.at(st.args[0]));
            p.skeleton.push_back(st);
        }
        CHECK(validate(*inst.domain, inst.problem, inst.world, p).ok);
    }

    TEST_CASE("plan JSON round-trips") {
        Instance inst = gen_instance(parse_task("Cook3"), 4);
        auto r = solve(*inst.domain, inst.problem, inst.world);
        REQUIRE(r.ok());
        Plan back = plan_from_json(plan_to_json(r.plan));
        CHECK(back.skeleton == r.plan.skeleton);
        CHECK(validate(*inst.domain, inst.problem, inst.world, back).ok);
    }
}
