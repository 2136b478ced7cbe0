#include "ptamp/geometry.hpp"

#include <cmath>
#include <numbers>

namespace ptamp {

Footprint WorldModel::footprint(const std::string& obj) const {
    auto it = footprints.find(obj);
    return it == footprints.end() ? Footprint{} : it->second;
}

PlacementInfeasible::PlacementInfeasible(const std::string& obj, int n)
    : Error("no collision-free placement for " + obj + " after " + std::to_string(n) + " attempts"),
      object(obj),
      attempts(n) {}

bool boxes_overlap(const Pose& a, const Footprint& fa, const Pose& b, const Footprint& fb) {
    // A tiny slack keeps exactly touching faces from counting after rounding.
    constexpr double eps = 1e-12;
    return std::abs(a.x - b.x) < fa.dx + fb.dx - eps && std::abs(a.y - b.y) < fa.dy + fb.dy - eps &&
           std::abs(a.z - b.z) < fa.dz + fb.dz - eps;
}

bool in_bounds(const Pose& p, const Footprint& fp, const WorldModel& w) {
    constexpr double eps = 1e-12;
    return p.x - fp.dx >= w.xmin - eps && p.x + fp.dx <= w.xmax + eps && p.y - fp.dy >= w.ymin - eps &&
           p.y + fp.dy <= w.ymax + eps && p.z - fp.dz >= w.surface_z - eps;
}

bool collides(const Pose& pose, const Footprint& fp, const WorldModel& world,
              const std::vector<Obstacle>& extra) {
    if (!in_bounds(pose, fp, world)) return true;
    for (const auto* list : {&world.fixtures, &world.obstacles, &extra})
        for (const auto& o : *list)
            if (boxes_overlap(pose, fp, o.pose, o.fp)) return true;
    return false;
}

Pose sample_placement(const std::string& obj, const WorldModel& world, Rng& rng,
                      const std::vector<Obstacle>& extra) {
    Footprint fp = world.footprint(obj);
    double lox = world.xmin + fp.dx, hix = world.xmax - fp.dx;
    double loy = world.ymin + fp.dy, hiy = world.ymax - fp.dy;
    if (lox > hix || loy > hiy) throw PlacementInfeasible(obj, 0);
    std::uniform_real_distribution<double> ux(lox, hix), uy(loy, hiy),
        uyaw(-std::numbers::pi, std::numbers::pi);
    for (int k = 0; k < world.max_attempts; ++k) {
        Pose p{ux(rng), uy(rng), world.surface_z + fp.dz, uyaw(rng)};
        if (!collides(p, fp, world, extra)) return p;
    }
    throw PlacementInfeasible(obj, world.max_attempts);
}

WorldModel merge_into_base(const WorldModel& world, const std::set<std::string>& objects,
                           const std::map<std::string, Pose>& poses, const std::set<std::string>& held) {
    WorldModel out = world;
    for (const auto& o : objects) {
        if (held.count(o)) throw Error("cannot merge held object " + o + " into the base");
        auto it = poses.find(o);
        if (it == poses.end()) throw Error("cannot merge " + o + ": no pose");
        if (out.merged.insert(o).second) out.obstacles.push_back({o, it->second, world.footprint(o)});
    }
    return out;
}

Pose stack_pose(const Pose& base, const Footprint& base_fp, const Footprint& top_fp) {
    return Pose{base.x, base.y, base.z + base_fp.dz + top_fp.dz, base.yaw};
}

WorldModel make_world(const Domain& domain, const ProblemSpec& problem) {
    WorldModel w;
    for (const auto& o : problem.object_order) {
        const std::string& ty = problem.object_types.at(o);
        if (domain.is_surface_type(ty)) continue;
        w.footprints[o] = domain.footprint_of(ty);
        if (domain.is_fixture_type(ty)) {
            auto it = problem.init.poses.find(o);
            if (it != problem.init.poses.end()) w.fixtures.push_back({o, it->second, w.footprints[o]});
        }
    }
    return w;
}

std::set<std::string> held_objects(const WorldState& s, const Domain& domain) {
    std::set<std::string> out;
    for (const auto& a : s.atoms)
        if (a.args.size() == 1 && domain.is_holding(a.pred)) out.insert(a.args[0]);
    return out;
}

Rng keyed_rng(std::uint64_t seed, std::uint64_t index, const std::string& obj) {
    return Rng(derive_seed(seed, index, fnv1a(obj)));
}

}  // namespace ptamp
