#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"

using namespace ptamp;

namespace {

// Reference partition by union-find over binary atoms between movables.
std::set<std::set<std::string>> union_find_partition(const WorldState& s) {
    auto mov = s.movables();
    std::map<std::string, std::string> parent;
    for (const auto& o : mov) parent[o] = o;
    std::function<std::string(const std::string&)> root = [&](const std::string& o) {
        return parent[o] == o ? o : parent[o] = root(parent[o]);
    };
    for (const auto& a : s.atoms)
        if (a.args.size() == 2 && parent.count(a.args[0]) && parent.count(a.args[1]))
            parent[root(a.args[0])] = root(a.args[1]);
    std::map<std::string, std::set<std::string>> groups;
    for (const auto& o : mov) groups[root(o)].insert(o);
    std::set<std::set<std::string>> out;
    for (auto& [r, g] : groups) out.insert(g);
    return out;
}

const char* kStaticDomain = R"(
(define (domain grasp)
  (:types block - object table - fixture)
  (:predicates (graspable ?x - block) (clear ?x - block) (ontable ?x - block ?t - table)
               (inhand ?x - block) (handempty))
  (:surface table)
  (:support ontable)
  (:holding inhand)
  (:action pick :parameters (?x - block ?t - table)
    :precondition (and (graspable ?x) (clear ?x) (ontable ?x ?t) (handempty))
    :effect (and (inhand ?x) (not (ontable ?x ?t)) (not (handempty)))))
)";

}  // namespace

TEST_SUITE("scene") {
    TEST_CASE("three stacks give three subgraphs") {
        const Domain& d = builtin_domain("blocks");
        auto s = fx::block_state(
            "(clear A) (ontable A T) (clear B) (onblock B D) (ontable D T) (clear C) (onblock C E) (onblock E F) "
            "(ontable F T) (handempty)",
            {"A", "B", "C", "D", "E", "F"});
        auto subs = decompose_subgraphs(s, d);
        REQUIRE(subs.size() == 3);
        CHECK(subs[0].nodes == std::vector<std::string>{"A"});
        CHECK(subs[1].nodes == std::vector<std::string>{"B", "D"});
        CHECK(subs[2].nodes == std::vector<std::string>{"C", "E", "F"});
        for (const auto& sub : subs)
            for (const auto& a : sub.atoms) CHECK(a.pred != "handempty");
    }

    TEST_CASE("no binary atoms gives singletons") {
        const Domain& d = builtin_domain("blocks");
        auto s = fx::block_state("(clear A) (ontable A T) (clear B) (ontable B T) (clear C) (ontable C T)",
                                 {"A", "B", "C"});
        auto subs = decompose_subgraphs(s, d);
        CHECK(subs.size() == 3);
        for (const auto& sub : subs) CHECK(sub.nodes.size() == 1);
    }

    TEST_CASE("partition matches union-find over random Block6 states") {
        const Domain& d = builtin_domain("blocks");
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            WorldState s = gen_instance(parse_task("Block6"), seed).problem.init;
            auto subs = decompose_subgraphs(s, d);
            std::set<std::set<std::string>> got;
            size_t total = 0;
            for (const auto& sub : subs) {
                got.insert({sub.nodes.begin(), sub.nodes.end()});
                total += sub.nodes.size();
            }
            auto mov = s.movables();
            REQUIRE(total == mov.size());  // pairwise disjoint
            REQUIRE(got == union_find_partition(s));
        }
    }

    TEST_CASE("canonical encoding ignores poses and separates relations") {
        const Domain& d = builtin_domain("blocks");
        ItemTable table;
        auto s1 = fx::block_state("(clear E) (onblock E F) (ontable F T)", {"E", "F"});
        auto s2 = s1;
        s2.poses["F"].x += 0.2;
        s2.poses["E"].x += 0.2;
        auto a = decompose_subgraphs(s1, d).at(0);
        auto b = decompose_subgraphs(s2, d).at(0);
        const int ia = canonical_encode(a, table);
        CHECK(canonical_encode(a, table) == ia);
        CHECK(canonical_encode(b, table) == ia);

        auto ab = decompose_subgraphs(fx::block_state("(onblock A B) (clear A) (ontable B T)", {"A", "B"}), d).at(0);
        auto ba = decompose_subgraphs(fx::block_state("(onblock B A) (clear B) (ontable A T)", {"A", "B"}), d).at(0);
        CHECK(ab.canonical_string() != ba.canonical_string());
        CHECK(canonical_encode(ab, table) != canonical_encode(ba, table));
        CHECK(table.decode(ia).atoms == a.atoms);
    }

    TEST_CASE("encoding is injective over the Block6 corpus") {
        const Domain& d = builtin_domain("blocks");
        ItemTable table;
        std::map<int, std::pair<std::vector<std::string>, AtomSet>> seen;
        for (const auto& demo : fx::block6_demos())
            for (const auto& st : demo.steps)
                for (auto sub : decompose_subgraphs(fluent_filter(st, d), d)) {
                    int id = canonical_encode(sub, table);
                    auto key = std::make_pair(sub.nodes, sub.atoms);
                    auto [it, fresh] = seen.emplace(id, key);
                    REQUIRE(it->second == key);
                }
        std::set<std::pair<std::vector<std::string>, AtomSet>> distinct;
        for (const auto& [id, key] : seen) distinct.insert(key);
        CHECK(distinct.size() == seen.size());
    }

    TEST_CASE("fluent filter drops static atoms and is idempotent") {
        Domain d = parse_domain(kStaticDomain);
        WorldState s;
        s.objects = {"A", "T"};
        s.fixtures = {"T"};
        s.poses = {{"A", {}}, {"T", {}}};
        s.atoms = fx::atoms("(graspable A) (clear A) (ontable A T) (handempty)");
        auto f = fluent_filter(s, d);
        // clear never changes in this domain, so it is static too
        CHECK(f.atoms == fx::atoms("(ontable A T) (handempty)"));
        CHECK_FALSE(f.atoms.count(make_atom("graspable", {"A"})));
        CHECK(f.atoms.count(make_atom("ontable", {"A", "T"})));
        CHECK(fluent_filter(f, d) == f);

        const Domain& blocks = builtin_domain("blocks");
        auto only = fx::block_state("(clear A) (ontable A T) (handempty)", {"A"});
        CHECK(fluent_filter(only, blocks) == only);
    }

    TEST_CASE("Cook init keeps box state and drops static layout atoms") {
        const Domain& d = builtin_domain("cook");
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            WorldState s = gen_instance(parse_task("Cook4"), seed).problem.init;
            auto f = fluent_filter(s, d);
            for (const auto& a : f.atoms) {
                CHECK(a.pred != "box-at");
                CHECK(a.pred != "next");
                CHECK(a.pred != "first");
            }
            for (const auto& a : s.atoms)
                if (a.pred == "opened") CHECK(f.atoms.count(a));
        }
    }

    TEST_CASE("demonstrations round-trip through JSON lines") {
        const auto& d0 = fx::block6_demos().front();
        Demonstration back = demo_from_json(demo_to_json(d0));
        CHECK(back.id == d0.id);
        CHECK(back.actions == d0.actions);
        CHECK(back.types == d0.types);
        REQUIRE(back.steps.size() == d0.steps.size());
        for (size_t i = 0; i < back.steps.size(); ++i) CHECK(back.steps[i] == d0.steps[i]);
    }
}
