#pragma once

#include <cstdint>
#include <string>

#include "ptamp/solver.hpp"

namespace ptamp {

struct TaskId {
    enum Family { Block, Cook } family = Block;
    int n = 4;

    std::string name() const;  // "Block6", "Cook4"
};

// Accepts Block4/6/8 and Cook3/4/5, case-insensitively.
TaskId parse_task(const std::string& s);

struct GenOptions {
    double p_table = 0.3;       // block lands on the table instead of a stack
    double p_ordered = 0.5;     // blocks dropped in name order rather than shuffled
    double p_open = 0.5;        // box starts open
};

Instance gen_instance(const TaskId& task, std::uint64_t seed, const GenOptions& opt = {});
InstanceFamily task_family(const TaskId& task, const GenOptions& opt = {});

// Entity count used by the monolithic and subgoal-only baselines: blocks plus
// table and arm, or ingredients plus boxes plus sink, board and pot.
int full_object_count(const TaskId& task);

// Fills poses for objects that lack one: table objects are sampled, stacked
// and contained objects take their base's stack pose.
void complete_poses(ProblemSpec& problem, const Domain& domain, const WorldModel& world, std::uint64_t seed);

// Loads a problem file against a builtin domain named in its (:domain ...).
Instance load_instance(const std::string& problem_text, std::uint64_t seed = 0);

}  // namespace ptamp
