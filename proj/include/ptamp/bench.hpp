#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptamp/orchestrator.hpp"
#include "ptamp/tasks.hpp"

namespace ptamp {

// Bench method labels, in table column order.
inline const std::vector<std::string> kMethods = {"PS", "PS+SPM", "PS+SPM+GNN", "ours"};

Mode method_mode(const std::string& method);

struct OfflineConfig {
    int demos = 100;
    std::uint64_t demo_seed = 0;
    double min_support = 0.9;
    bool train_model = true;  // false: label with the symbolic oracle
    TrainConfig train;
};

struct OfflineArtifacts {
    TaskId task;
    SubgoalSequence subgoals;
    GnnModel model;
    bool has_model = false;
    std::map<std::string, DmpModel> dmps;
    int segments = 0;
    std::vector<int> skipped_demos;
};

OfflineArtifacts build_artifacts(const TaskId& task, const OfflineConfig& cfg = {},
                                 const std::vector<Demonstration>* demos = nullptr);

Artifacts online_artifacts(const OfflineArtifacts& off, const Domain& domain,
                           const std::map<std::string, std::string>& types);

struct TrialResult {
    std::string task, method;
    std::uint64_t seed = 0;
    std::vector<int> horizons;  // per subproblem (decomposed or leg-wise modes), else one total
    std::vector<int> objects;
    double wall_ms = 0;
    bool success = false;  // plan validated
    bool fell_back = false;
    std::string note;
};

// Trial i uses instance seed derive_seed(eval_seed, i).
std::vector<TrialResult> run_trials(const OfflineArtifacts& off, const std::string& method, int trials,
                                    std::uint64_t eval_seed, const PipelineConfig& base = {});

struct BenchRow {
    std::string task, method, metric;
    double mean = 0, std = 0;
    int trials = 0;
    double success_rate = 0;
};

struct BenchTable {
    std::vector<BenchRow> rows;

    std::string csv() const;       // task,method,metric,mean,std,trials,success_rate
    std::string markdown() const;  // one table per metric, tasks as rows, methods as columns
    const BenchRow* find(const std::string& task, const std::string& method, const std::string& metric) const;
};

// Population statistics; std is 0 for one sample.
void mean_std(const std::vector<double>& v, double& mean, double& std);

// Horizon and object metrics pool every subproblem of every successful trial;
// time (seconds) is one value per trial.
void summarize(const std::vector<TrialResult>& trials, BenchTable& table);

struct BenchConfig {
    std::vector<TaskId> tasks;
    std::vector<std::string> methods = kMethods;
    int trials = 100;
    std::uint64_t eval_seed = 5;
    OfflineConfig offline;
    PipelineConfig pipeline;
};

BenchTable run_bench(const BenchConfig& cfg, std::vector<TrialResult>* all = nullptr);

}  // namespace ptamp
