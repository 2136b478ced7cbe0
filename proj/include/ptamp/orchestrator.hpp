#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <queue>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ptamp/decomposition.hpp"
#include "ptamp/dmp.hpp"

namespace ptamp {

enum class Mode { Monolithic, SubgoalsSequential, SubproblemsSequential, Parallel };

const char* mode_name(Mode m);  // "monolithic", "subgoals-sequential", ...
Mode parse_mode(const std::string& s);

class ThreadPool {
public:
    explicit ThreadPool(unsigned threads);
    ~ThreadPool();
    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::future<void> submit(std::function<void()> job);
    unsigned size() const { return static_cast<unsigned>(workers_.size()); }

private:
    std::vector<std::thread> workers_;
    std::queue<std::packaged_task<void()>> jobs_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool stop_ = false;
};

// Worker count: PTAMP_THREADS when set, else the hardware concurrency.
unsigned default_threads();
ThreadPool& shared_pool();

struct SubplanSet {
    bool ok = false;
    std::vector<Plan> plans;
    int failing_index = -1;  // 1-based
    SolveStatus status = SolveStatus::Solved;
    std::string message;
    double wall_ms = 0;
    double sum_ms = 0;       // total of individual solve times
};

// Each subproblem z is solved with seed derive_seed(cfg.seed, z), so every
// execution order yields the same skeletons.
SubplanSet parallel_tamp(const Domain& domain, const std::vector<Subproblem>& sps, const SolverConfig& cfg,
                         ThreadPool& pool, const std::set<int>& inject = {});
SubplanSet solve_in_order(const Domain& domain, const std::vector<Subproblem>& sps, const SolverConfig& cfg,
                          const std::set<int>& inject = {});

// Subgoal legs over the full scene: L0 -> G_1', actual end -> G_2', ...
SubplanSet sequential_tamp(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                           const SubgoalSequence& subgoals, const SolverConfig& cfg);

struct GlobalPlan {
    std::vector<PlanStep> skeleton;
    std::vector<Trajectory> trajectories;  // one per skeleton step
    std::vector<int> sub_horizons;
    std::vector<int> sub_objects;
    std::string mode;
    bool fell_back = false;
    double wall_ms = 0;

    int horizon() const { return static_cast<int>(skeleton.size()); }
};

inline const Pose kHomePose{0.0, 0.0, 0.4, 0.0};

GlobalPlan concatenate(const std::vector<Plan>& subplans, const std::map<std::string, DmpModel>& registry,
                       const Pose& home = kHomePose, double lift = 0.10);

// Symbolic and geometric replay of the whole skeleton from L0 to the goal,
// plus trajectory continuity at every junction.
Validation validate_global(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                           const GlobalPlan& plan, const Pose& home = kHomePose);

struct PipelineConfig {
    double gamma = 0.8;
    double min_support = 0.9;
    std::uint64_t demo_seed = 0;
    std::uint64_t eval_seed = 5;
    std::uint64_t decomp_seed = 5;
    Mode mode = Mode::Parallel;
    bool gamma_square_retry = false;
    bool fallback = true;
    bool motion = true;  // DMP concatenation
    double lift = 0.10;
    SolverConfig solver;
    std::set<int> inject_failures;  // subproblem indices forced to fail in the parallel stage
};

struct Artifacts {
    const SubgoalSequence* subgoals = nullptr;
    Predictor predictor;
    std::map<std::string, DmpModel> dmps;
};

struct PipelineResult {
    bool ok = false;
    GlobalPlan plan;
    Mode mode_used = Mode::Parallel;
    bool fell_back = false;
    std::vector<std::string> attempts;  // "parallel: failed at SP 3 (injected)", ...
    std::vector<int> sp_objects;        // movable objects per subproblem of the decomposition that succeeded
    double decompose_ms = 0;
    double solve_ms = 0;
    double plan_ms = 0;                 // decomposition plus solving
    double motion_ms = 0;
    std::string failure;
};

PipelineResult run_pipeline(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                            const Artifacts& art, const PipelineConfig& cfg);

// Timing fields omitted when include_timing is false.
std::string global_plan_to_json(const GlobalPlan& plan, bool include_timing = true);

}  // namespace ptamp
