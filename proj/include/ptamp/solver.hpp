#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ptamp/core.hpp"
#include "ptamp/domain.hpp"
#include "ptamp/geometry.hpp"
#include "ptamp/scene.hpp"

namespace ptamp {

struct SolverConfig {
    bool heuristic = true;  // false: uniform-cost search
    std::size_t max_expansions = 5'000'000;
    double timeout_ms = 0;  // 0: no limit
    int max_skeleton_retries = 20;
    int bind_attempts = 3;  // resampling rounds per skeleton before banning it
    bool bind_geometry = true;
    bool record_states = false;
    std::uint64_t seed = 0;
    const std::atomic<bool>* cancel = nullptr;
};

enum class SolveStatus { Solved, SymbolicUnsat, BindingExhausted, Timeout, Cancelled, ExpansionLimit };

const char* status_name(SolveStatus s);

struct PlanStep {
    std::string action;
    std::vector<std::string> args;
    std::vector<Pose> key_poses;

    bool operator==(const PlanStep&) const = default;
    std::string str() const;
};

struct PlanStats {
    int horizon = 0;
    std::size_t expansions = 0;
    double time_ms = 0;
    int skeleton_retries = 0;
};

struct Plan {
    std::vector<PlanStep> skeleton;
    PlanStats stats;
    std::vector<WorldState> states;  // init and every successor, when recorded

    int horizon() const { return static_cast<int>(skeleton.size()); }
};

struct SolveResult {
    SolveStatus status = SolveStatus::SymbolicUnsat;
    Plan plan;
    std::string message;

    bool ok() const { return status == SolveStatus::Solved; }
};

SolveResult solve(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                  const SolverConfig& cfg = {});

struct Validation {
    bool ok = false;
    int failing_step = -1;  // skeleton index, or skeleton size when the goal fails
    std::string reason;
    WorldState final_state;
};

Validation validate(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                    const Plan& plan);

// Replays a skeleton symbolically and geometrically, returning every state.
// Throws Error on the first step that cannot be replayed.
std::vector<WorldState> replay(const Domain& domain, const WorldState& init, const Plan& plan);

struct Instance {
    const Domain* domain = nullptr;
    ProblemSpec problem;
    WorldModel world;
};

using InstanceFamily = std::function<Instance(std::uint64_t seed)>;

// Demo i solves family(derive_seed(seed, i)) and records every state.
std::vector<Demonstration> generate_demos(const InstanceFamily& family, int n, std::uint64_t seed,
                                          const SolverConfig& cfg = {});

std::string plan_to_json(const Plan& plan, bool include_timing = true);
Plan plan_from_json(const std::string& text);

}  // namespace ptamp
