#include "doctest.h"
#include "fixtures.hpp"

using namespace ptamp;

namespace {

bool interval_overlap(double ca, double ha, double cb, double hb) {
    return std::min(ca + ha, cb + hb) - std::max(ca - ha, cb - hb) > 0;
}

bool reference_overlap(const Pose& a, const Footprint& fa, const Pose& b, const Footprint& fb) {
    return interval_overlap(a.x, fa.dx, b.x, fb.dx) && interval_overlap(a.y, fa.dy, b.y, fb.dy) &&
           interval_overlap(a.z, fa.dz, b.z, fb.dz);
}

WorldModel block_world(const std::vector<std::string>& blocks) {
    WorldModel w;
    for (const auto& b : blocks) w.footprints[b] = Footprint{};
    return w;
}

}  // namespace

TEST_SUITE("geometry") {
    TEST_CASE("coincident boxes collide and face contact does not") {
        Footprint f;
        Pose p{0.1, 0.1, 0.025, 0};
        CHECK(boxes_overlap(p, f, p, f));
        Pose side{0.15, 0.1, 0.025, 0};
        CHECK_FALSE(boxes_overlap(p, f, side, f));
        Pose top{0.1, 0.1, 0.075, 0};
        CHECK_FALSE(boxes_overlap(p, f, top, f));
        Pose nudge{0.1499, 0.1, 0.025, 0};
        CHECK(boxes_overlap(p, f, nudge, f));
    }

    TEST_CASE("overlap agrees with interval arithmetic on random pairs") {
        Rng rng(11);
        std::uniform_real_distribution<double> u(-0.2, 0.2), h(0.005, 0.06);
        std::uniform_int_distribution<int> grid(-8, 8), half(1, 4);
        for (int k = 0; k < 10000; ++k) {
            Pose a, b;
            Footprint fa, fb;
            if (k % 2 == 0) {
                a = {u(rng), u(rng), u(rng), 0};
                b = {u(rng), u(rng), u(rng), 0};
                fa = {h(rng), h(rng), h(rng)};
                fb = {h(rng), h(rng), h(rng)};
            } else {
                // dyadic grid: face contact happens often and is exact
                auto g = [&] { return grid(rng) / 64.0; };
                auto e = [&] { return half(rng) / 64.0; };
                a = {g(), g(), g(), 0};
                b = {g(), g(), g(), 0};
                fa = {e(), e(), e()};
                fb = {e(), e(), e()};
            }
            REQUIRE(boxes_overlap(a, fa, b, fb) == reference_overlap(a, fa, b, fb));
            REQUIRE(boxes_overlap(a, fa, b, fb) == boxes_overlap(b, fb, a, fa));
        }
    }

    TEST_CASE("sampling on an empty table is in bounds and free") {
        WorldModel w = block_world({"A"});
        Rng rng(3);
        for (int k = 0; k < 200; ++k) {
            Pose p = sample_placement("A", w, rng);
            CHECK(in_bounds(p, w.footprint("A"), w));
            CHECK_FALSE(collides(p, w.footprint("A"), w));
            CHECK(p.z == doctest::Approx(0.025));
        }
    }

    TEST_CASE("a fully tiled table is infeasible") {
        WorldModel w = block_world({"A"});
        w.fixtures.push_back({"cover", Pose{0, 0, 0.05, 0}, Footprint{0.5, 0.3, 0.05}});
        Rng rng(1);
        CHECK_THROWS_AS(sample_placement("A", w, rng), PlacementInfeasible);
    }

    TEST_CASE("sampling is replayable from the seed") {
        WorldModel w = block_world({"A", "B"});
        Rng r1(42), r2(42);
        CHECK(sample_placement("A", w, r1) == sample_placement("A", w, r2));
        Rng k1 = keyed_rng(5, 2, "C"), k2 = keyed_rng(5, 2, "C"), k3 = keyed_rng(5, 3, "C");
        CHECK(k1() == k2());
        CHECK(keyed_rng(5, 2, "C")() != k3());
    }

    TEST_CASE("merged objects block placement") {
        WorldModel w = block_world({"A", "B", "C", "D"});
        std::map<std::string, Pose> poses{{"A", {0.0, 0.0, 0.025, 0}}, {"B", {0.1, 0.0, 0.025, 0}}};
        WorldModel m = merge_into_base(w, {"A", "B"}, poses);
        CHECK(m.merged == std::set<std::string>{"A", "B"});
        Rng rng(9);
        for (int k = 0; k < 300; ++k) {
            Pose p = sample_placement("C", m, rng);
            CHECK_FALSE(boxes_overlap(p, m.footprint("C"), poses["A"], m.footprint("A")));
            CHECK_FALSE(boxes_overlap(p, m.footprint("C"), poses["B"], m.footprint("B")));
        }
        WorldModel same = merge_into_base(w, {}, poses);
        CHECK(same.obstacles.empty());
        CHECK(same.merged.empty());
        CHECK_THROWS_AS(merge_into_base(w, {"A"}, poses, {"A"}), Error);
    }

    TEST_CASE("merging leaves the symbolic state alone") {
        Instance inst = fx::appendix_instance();
        const WorldState before = inst.problem.init;
        merge_into_base(inst.world, {"B", "C"}, inst.problem.init.poses);
        CHECK(inst.problem.init == before);
    }

    TEST_CASE("merged obstacles never raise the placement success rate") {
        WorldModel w = block_world({"A", "X1", "X2", "X3"});
        w.max_attempts = 3;
        std::map<std::string, Pose> poses{
            {"X1", {-0.2, 0.0, 0.025, 0}}, {"X2", {0.0, 0.1, 0.025, 0}}, {"X3", {0.25, -0.1, 0.025, 0}}};
        WorldModel m = merge_into_base(w, {"X1", "X2", "X3"}, poses);
        m.obstacles[0].fp = {0.2, 0.3, 0.05};  // widen one obstacle so failures occur
        int ok_free = 0, ok_merged = 0;
        for (std::uint64_t s = 0; s < 1000; ++s) {
            Rng r1(s), r2(s);
            try {
                sample_placement("A", w, r1);
                ++ok_free;
            } catch (const PlacementInfeasible&) {
            }
            try {
                sample_placement("A", m, r2);
                ++ok_merged;
            } catch (const PlacementInfeasible&) {
            }
        }
        CHECK(ok_merged <= ok_free);
        CHECK(ok_merged < 1000);
    }

    TEST_CASE("stack poses follow the height ladder") {
        Footprint f;
        Pose base{0.1, -0.1, 0.025, 0.3};
        Pose top = stack_pose(base, f, f);
        CHECK(top.z == doctest::Approx(0.075));
        CHECK(top.x == base.x);
        CHECK(top.yaw == base.yaw);
        Pose third = stack_pose(top, f, f);
        CHECK(third.z > top.z);

        // A..F tower on the table: F at the bottom, its centre at one half-height
        Pose p{0.0, 0.0, 0.025, 0};
        std::vector<double> z{p.z};
        for (int k = 1; k < 6; ++k) {
            p = stack_pose(p, f, f);
            z.push_back(p.z);
        }
        for (int k = 0; k < 6; ++k) CHECK(z[static_cast<size_t>(k)] == doctest::Approx(0.025 + 0.05 * k).epsilon(1e-12));
    }

    TEST_CASE("world construction registers fixtures by type") {
        Instance inst = gen_instance(parse_task("Cook3"), 0);
        const auto& w = inst.world;
        std::set<std::string> fixtures;
        for (const auto& o : w.fixtures) fixtures.insert(o.name);
        CHECK(fixtures.count("sink"));
        CHECK(fixtures.count("board"));
        CHECK(fixtures.count("pot"));
        CHECK_FALSE(fixtures.count("table"));
    }
}
