#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ptamp/importance.hpp"

namespace ptamp {

// Name of the virtual base in reduced atom views.
inline const std::string kVirtualBase = "T'";

using Predictor = std::function<std::set<std::string>(const WorldState& current, const AtomSet& subgoal, double gamma)>;

Predictor gnn_predictor(const GnnModel& model, const Domain& domain, std::map<std::string, std::string> types);
Predictor oracle_predictor(const Domain& domain, std::map<std::string, std::string> types);

struct Subproblem {
    int index = 0;  // 1-based
    WorldState init;                      // full chained state
    AtomSet init_atoms;                   // reduced view over important objects
    AtomSet goal_atoms;                   // reduced view: supports on merged objects read as the virtual base
    AtomSet goal_full;                    // what the solver must reach
    std::map<std::string, Pose> goal_poses;
    std::set<std::string> important;
    std::set<std::string> merged;
    WorldModel world;                     // merged objects as obstacles
    ProblemSpec problem;                  // restricted symbolic problem handed to the solver
};

// Fluent atoms with arguments that mention an important object, with support
// on a merged object or the surface rewritten to the virtual base.
AtomSet reduced_view(const AtomSet& atoms, const std::set<std::string>& important,
                     const std::set<std::string>& merged, const Domain& domain, const WorldState& state);

std::vector<Subproblem> generate_subproblems(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                                             const SubgoalSequence& subgoals, const Predictor& predictor,
                                             double gamma, std::uint64_t seed);

// State after SP_z under the interface contract: important objects take their
// goal atoms and poses, everything else is carried over.
WorldState chain_states(const Subproblem& sp, const WorldState& prev, const Domain& domain);

std::string subproblem_to_json(const Subproblem& sp);
Subproblem subproblem_from_json(const std::string& text, const Domain& domain);
std::string subproblems_to_json(const std::vector<Subproblem>& sps);

}  // namespace ptamp
