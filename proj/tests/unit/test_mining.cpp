#include <chrono>

#include "doctest.h"
#include "fixtures.hpp"
#include "mining_oracle.hpp"
#include "json.hpp"

using namespace ptamp;
using fx::brute_force;
using fx::packed;
using fx::random_db;

namespace {

// Exhaustive containment: tries every placement of each pattern element.
bool embeds(const Sequence& s, const Pattern& p, size_t pi = 0, size_t si = 0) {
    if (pi == p.size()) return true;
    for (size_t k = si; k < s.size(); ++k)
        if (std::includes(s[k].begin(), s[k].end(), p[pi].begin(), p[pi].end()) && embeds(s, p, pi + 1, k + 1))
            return true;
    return false;
}

// Every subsequence of `s` (each kept element reduced to a non-empty subset).
void all_subsequences(const Sequence& s, size_t k, Pattern& cur, std::set<Pattern>& out) {
    if (k == s.size()) {
        if (!cur.empty()) out.insert(cur);
        return;
    }
    all_subsequences(s, k + 1, cur, out);
    const auto& e = s[k];
    for (unsigned mask = 1; mask < (1u << e.size()); ++mask) {
        Itemset sub;
        for (size_t b = 0; b < e.size(); ++b)
            if (mask >> b & 1u) sub.push_back(e[b]);
        cur.push_back(sub);
        all_subsequences(s, k + 1, cur, out);
        cur.pop_back();
    }
}

std::map<Pattern, int> as_map(const std::vector<FrequentPattern>& v) {
    std::map<Pattern, int> out;
    for (const auto& p : v) out[p.elements] = p.support;
    return out;
}

Demonstration demo_of(const std::vector<std::string>& states, const std::vector<std::string>& blocks) {
    Demonstration d;
    for (const auto& s : states) d.steps.push_back(fx::block_state(s, blocks));
    for (size_t k = 1; k < states.size(); ++k) d.actions.push_back("(noop)");
    d.types = {{"T", "table"}};
    for (const auto& b : blocks) d.types[b] = "block";
    return d;
}

}  // namespace

TEST_SUITE("mining") {
    TEST_CASE("database building collapses repeats") {
        const Domain& d = builtin_domain("blocks");
        auto demo = demo_of({"(clear A) (ontable A T) (clear B) (ontable B T) (handempty)",
                             "(clear A) (onblock A B) (ontable B T) (handempty)",
                             "(clear B) (onblock B A) (ontable A T) (handempty)"},
                            {"A", "B"});
        auto db = build_database({demo}, d);
        REQUIRE(db.size() == 1);
        CHECK(db.sequences[0].size() == 3);

        auto rep = demo_of({"(clear A) (ontable A T) (handempty)", "(clear A) (ontable A T) (handempty)",
                            "(clear A) (ontable A T) (handempty)"},
                           {"A"});
        CHECK(build_database({rep}, d).sequences[0].size() == 1);
        BuildOptions keep;
        keep.collapse = false;
        CHECK(build_database({rep}, d, keep).sequences[0].size() == 3);
    }

    TEST_CASE("non-quiescent states are skipped") {
        const Domain& d = builtin_domain("blocks");
        auto demo = demo_of({"(clear A) (ontable A T) (handempty)", "(inhand A)", "(clear A) (ontable A T) (handempty)"},
                            {"A"});
        BuildOptions keep;
        keep.collapse = false;
        CHECK(build_database({demo}, d, keep).sequences[0].size() == 2);
    }

    TEST_CASE("item ids decode back to their subgraphs over the Block6 corpus") {
        const Domain& d = builtin_domain("blocks");
        auto db = build_database(fx::block6_demos(), d);
        std::set<std::string> strings;
        for (size_t id = 0; id < db.items->size(); ++id) {
            Subgraph s = db.items->decode(static_cast<int>(id));
            CHECK(db.items->find(s) == static_cast<int>(id));
            strings.insert(s.canonical_string());
        }
        CHECK(strings.size() == db.items->size());
        for (const auto& seq : db.sequences)
            for (const auto& e : seq) {
                CHECK(std::is_sorted(e.begin(), e.end()));
                for (int id : e) CHECK(id < static_cast<int>(db.items->size()));
            }
    }

    TEST_CASE("support threshold rounding") {
        CHECK(min_count(0.9, 100) == 90);
        CHECK(min_count(0.9, 3) == 3);
        CHECK(min_count(0.5, 3) == 2);
        CHECK(min_count(1e-6, 10) == 1);
        CHECK_THROWS_AS(min_count(1.5, 10), Error);
        CHECK_THROWS_AS(min_count(0.0, 10), Error);
    }

    TEST_CASE("small prefixspan examples") {
        std::vector<Sequence> db{{{1}, {2}}, {{1}, {2}}, {{1}, {3}}};
        auto m = as_map(prefixspan(db, 0.9));
        CHECK(m == std::map<Pattern, int>{{{{1}}, 3}});

        std::vector<Sequence> same{{{1, 2}, {3}, {1}}, {{1, 2}, {3}, {1}}};
        auto all = as_map(prefixspan(same, 1.0));
        CHECK(all.count({{1, 2}, {3}, {1}}));
        CHECK(all.at({{1, 2}, {3}, {1}}) == 2);

        std::vector<Sequence> one{{{1, 2}, {3}}};
        std::set<Pattern> subs;
        Pattern cur;
        all_subsequences(one[0], 0, cur, subs);
        auto got = as_map(prefixspan(one, 1.0));
        CHECK(got.size() == subs.size());
        for (const auto& p : subs) CHECK(got.count(p));
    }

    TEST_CASE("prefixspan equals brute force on random databases") {
        Rng rng(77);
        const std::vector<double> supports{0.2, 0.4, 0.5, 0.75, 1.0};
        double lib_s = 0, ref_s = 0;
        size_t total = 0, biggest = 0;
        for (int t = 0; t < 200; ++t) {
            auto db = random_db(rng);
            const double ms = supports[static_cast<size_t>(t) % supports.size()];
            auto t0 = std::chrono::steady_clock::now();
            auto pats = prefixspan(db, ms);
            auto t1 = std::chrono::steady_clock::now();
            auto want = brute_force(db, ms);
            auto t2 = std::chrono::steady_clock::now();
            lib_s += std::chrono::duration<double>(t1 - t0).count();
            ref_s += std::chrono::duration<double>(t2 - t1).count();
            auto got = packed(pats);
            REQUIRE(got.size() == pats.size());
            REQUIRE(got == want);
            total += got.size();
            biggest = std::max(biggest, got.size());
        }
        MESSAGE("patterns " << total << " max " << biggest);
        MESSAGE("prefixspan " << lib_s << " s, brute force " << ref_s << " s");
    }

    TEST_CASE("frequent patterns are anti-monotone and correctly counted") {
        Rng rng(5);
        for (int t = 0; t < 50; ++t) {
            auto db = random_db(rng);
            auto pats = prefixspan(db, 0.5);
            auto m = as_map(pats);
            const int minc = min_count(0.5, db.size());
            for (const auto& fp : pats) {
                int c = 0;
                for (const auto& s : db) c += embeds(s, fp.elements);
                REQUIRE(c == fp.support);
                REQUIRE(c >= minc);
                REQUIRE(support(db, fp.elements) == c);
                for (size_t k = 1; k < fp.elements.size(); ++k) {
                    Pattern prefix(fp.elements.begin(), fp.elements.begin() + static_cast<long>(k));
                    REQUIRE(m.count(prefix));
                }
                for (size_t e = 0; e < fp.elements.size(); ++e)
                    if (fp.elements[e].size() > 1)
                        for (size_t drop = 0; drop < fp.elements[e].size(); ++drop) {
                            Pattern weak = fp.elements;
                            weak[e].erase(weak[e].begin() + static_cast<long>(drop));
                            REQUIRE(m.count(weak));
                        }
            }
        }
    }

    TEST_CASE("selection prefers the full sequence and richer elements") {
        ItemTable table;
        auto item = [&](const std::string& atoms, std::vector<std::string> nodes) {
            Subgraph s;
            s.nodes = std::move(nodes);
            s.atoms = fx::atoms(atoms);
            return table.encode(s);
        };
        const int a = item("(clear A) (ontable A T)", {"A"});
        const int b = item("(clear B) (ontable B T)", {"B"});
        const int c = item("(clear C) (onblock C D) (ontable D T)", {"C", "D"});
        const int e = item("(clear E) (ontable E T)", {"E"});
        Pattern full{{a}, {b}, {c}};
        std::vector<FrequentPattern> cands{{full, 3}};
        for (size_t k = 0; k < 3; ++k) {
            Pattern p;
            for (size_t j = 0; j < 3; ++j)
                if (j != k) p.push_back(full[j]);
            cands.push_back({p, 3});
            cands.push_back({{full[k]}, 3});
        }
        auto s = select_target_sequence(cands, table, {});
        CHECK(s.pattern == full);
        CHECK(s.reward.R == doctest::Approx(3.0));

        // same length; the superset carries more and more distinct items
        Pattern lean{{a}, {c}};
        Pattern rich{{a, b}, {c, e}};
        auto s2 = select_target_sequence({{lean, 3}, {rich, 3}}, table, {});
        CHECK(s2.pattern == rich);
        CHECK(s2.reward.R_l == 0.0);
        CHECK(s2.reward.R_q == 1.0);
        CHECK(s2.reward.R_v == 1.0);
        Reward r = raw_reward(rich);
        CHECK(r.length == 2);
        CHECK(r.items == 4);
        CHECK(r.distinct == 4);
        CHECK(s2.subgoals.back() == fx::atoms("(clear C) (onblock C D) (ontable D T) (clear E) (ontable E T)"));
    }

    TEST_CASE("the goal is appended when the last subgoal misses it") {
        ItemTable table;
        Subgraph s;
        s.nodes = {"A"};
        s.atoms = fx::atoms("(clear A) (ontable A T)");
        const int a = table.encode(s);
        auto goal = fx::atoms("(onblock A B)");
        auto out = select_target_sequence({{{{a}}, 2}}, table, goal);
        CHECK(out.goal_appended);
        CHECK(out.subgoals.size() == 2);
        CHECK(out.subgoals.back() == goal);
        auto kept = select_target_sequence({{{{a}}, 2}}, table, fx::atoms("(clear A)"));
        CHECK_FALSE(kept.goal_appended);
    }

    TEST_CASE("the selected sequence has maximal reward among candidates") {
        const Domain& d = builtin_domain("blocks");
        auto db = build_database(fx::block6_demos(), d);
        auto pats = prefixspan(db, 0.9);
        SelectOptions opt;
        opt.max_length = *std::min_element(db.demo_lengths.begin(), db.demo_lengths.end());
        auto goal = gen_instance(parse_task("Block6"), 0).problem.goal;
        auto s = select_target_sequence(pats, *db.items, goal, opt);
        bool found = false;
        for (const auto& p : pats) found = found || (p.elements == s.pattern && p.support == s.support);
        CHECK(found);
        CHECK(s.support >= min_count(0.9, db.size()));
        CHECK(support(db.sequences, s.pattern) == s.support);
        // R is a sum of three min-max scaled terms
        CHECK(s.reward.R <= 3.0 + 1e-12);
        for (const auto& p : pats) {
            if (static_cast<int>(p.elements.size()) > opt.max_length) continue;
            Reward r = raw_reward(p.elements);
            const bool dominates = r.length > s.reward.length && r.items > s.reward.items && r.distinct > s.reward.distinct;
            CHECK_FALSE(dominates);
        }
    }

    TEST_CASE("Block6 demonstrations yield the six-subgoal ladder") {
        const auto& s = fx::block6_subgoals();
        auto fixture = nlohmann::json::parse(fx::read_file(fx::data_path("data/fixtures/block6_appendix.json")));
        REQUIRE(s.subgoals.size() == fixture["subgoals"].size());
        for (size_t k = 0; k < s.subgoals.size(); ++k)
            CHECK(s.subgoals[k] == fx::atoms(fixture["subgoals"][k].get<std::string>()));
        CHECK_FALSE(s.goal_appended);
        CHECK(s.completion.at("block") == fx::atoms("(clear ?o) (ontable ?o T)"));
    }

    TEST_CASE("subgoal sequences round-trip through JSON") {
        const auto& s = fx::block6_subgoals();
        auto back = subgoals_from_json(subgoals_to_json(s));
        CHECK(back.subgoals == s.subgoals);
        CHECK(back.completion == s.completion);
        CHECK(back.support == s.support);
        CHECK(back.reward.R == doctest::Approx(s.reward.R));
        CHECK_THROWS(subgoals_from_json("{\"subgoals\": []}"));
    }
}
