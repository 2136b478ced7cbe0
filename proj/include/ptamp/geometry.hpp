#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ptamp/core.hpp"
#include "ptamp/domain.hpp"

namespace ptamp {

struct Obstacle {
    std::string name;
    Pose pose;
    Footprint fp;
};

struct WorldModel {
    double xmin = -0.5, xmax = 0.5, ymin = -0.3, ymax = 0.3;
    double surface_z = 0.0;
    std::map<std::string, Footprint> footprints;  // per object
    std::vector<Obstacle> fixtures;               // fixed regions standing on the table
    std::vector<Obstacle> obstacles;              // virtual base members
    std::set<std::string> merged;
    int max_attempts = 100;

    Footprint footprint(const std::string& obj) const;
};

class PlacementInfeasible : public Error {
public:
    PlacementInfeasible(const std::string& obj, int attempts);
    std::string object;
    int attempts;
};

// Open-interval overlap of axis-aligned boxes; shared faces do not count.
bool boxes_overlap(const Pose& a, const Footprint& fa, const Pose& b, const Footprint& fb);
bool in_bounds(const Pose& p, const Footprint& fp, const WorldModel& world);

// True iff the box leaves the table or overlaps a fixture, a merged obstacle
// or one of `extra`.
bool collides(const Pose& pose, const Footprint& fp, const WorldModel& world,
              const std::vector<Obstacle>& extra = {});

// Rejection-sampled collision-free table pose.
Pose sample_placement(const std::string& obj, const WorldModel& world, Rng& rng,
                      const std::vector<Obstacle>& extra = {});

WorldModel merge_into_base(const WorldModel& world, const std::set<std::string>& objects,
                           const std::map<std::string, Pose>& poses,
                           const std::set<std::string>& held = {});

Pose stack_pose(const Pose& base, const Footprint& base_fp, const Footprint& top_fp);

// Table model for a problem: footprints by type, non-surface fixtures as
// fixed regions.
WorldModel make_world(const Domain& domain, const ProblemSpec& problem);

// Objects held according to the domain's holding predicates.
std::set<std::string> held_objects(const WorldState& s, const Domain& domain);

// Keyed stream for (seed, index, object): independent of draw order elsewhere.
Rng keyed_rng(std::uint64_t seed, std::uint64_t index, const std::string& obj);

}  // namespace ptamp
