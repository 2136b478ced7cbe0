#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptamp/mining.hpp"
#include "ptamp/solver.hpp"

namespace ptamp {

struct Segment {
    int demo_id = 0;
    int start = 0, end = 0;  // step indices, start < end
    int from = 0;            // 0: demo init, i: subgoal i
    int to = 1;
    std::vector<WorldState> states;  // steps start..end inclusive
    std::map<std::string, std::string> types;
};

// Splits each demo at the first quiescent step satisfying each successive
// subgoal. Zero-length segments are dropped. Demos that miss a subgoal (the
// pattern's support may be below 1) are skipped and listed in `skipped`, or
// raise an Error naming demo and subgoal when `strict`.
std::vector<Segment> segment_demos(const std::vector<Demonstration>& demos, const SubgoalSequence& subgoals,
                                   const Domain& domain, bool strict = false, std::vector<int>* skipped = nullptr);

std::set<std::string> label_important(const Segment& seg);

// Object types recovered from typed predicate arguments, for demos recorded
// without a type table.
std::map<std::string, std::string> infer_types(const WorldState& s, const Domain& domain);

// Objects that must be handled regardless of score: held ones, those
// mentioned by subgoal atoms not yet true, and the movable base an object
// leaves when such an atom gives it a new support.
std::set<std::string> forced_important(const WorldState& current, const AtomSet& subgoal, const Domain& domain);

struct FeatureLayout {
    std::string domain;
    std::vector<std::string> node_preds;  // "p" or "p/k": arity-2 predicate with its fixture at the other position
    std::vector<std::string> relations;   // movable-movable binary predicates
    std::vector<std::string> types;

    int node_dim() const { return static_cast<int>(2 * node_preds.size() + types.size() + 6); }
    int edge_dim() const { return static_cast<int>(4 * relations.size() + 2); }
    bool operator==(const FeatureLayout&) const = default;
};

FeatureLayout make_layout(const Domain& domain);

struct GraphInput {
    std::vector<std::string> nodes;
    Eigen::MatrixXd x;                 // nodes x node_dim
    std::vector<Eigen::MatrixXd> adj;  // per edge channel: adj[r](i, j) = feature of edge j -> i
    Eigen::MatrixXd edge_sum;          // nodes x edge_dim
};

GraphInput encode_graph(const FeatureLayout& layout, const Domain& domain, const WorldState& current,
                        const AtomSet& subgoal, const std::map<std::string, std::string>& types);

struct ImportanceSample {
    GraphInput graph;
    Eigen::VectorXd labels;
};

std::vector<ImportanceSample> build_dataset(const std::vector<Segment>& segments, const SubgoalSequence& subgoals,
                                            const Domain& domain, const FeatureLayout& layout);

struct GnnLayer {
    Eigen::MatrixXd w_self;               // message from sender state
    std::vector<Eigen::MatrixXd> w_edge;  // per edge channel, gates sender state
    Eigen::MatrixXd w_attr;               // message from edge features
    Eigen::MatrixXd b_msg;                // column vectors
    Eigen::MatrixXd w_h, w_a;             // update from own state and aggregate
    Eigen::MatrixXd b_up;
};

struct TrainConfig {
    int epochs = 300;
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t seed = 0;
};

struct GnnModel {
    FeatureLayout layout;
    int width = 16;
    std::vector<GnnLayer> layers;
    Eigen::MatrixXd w_out;  // width x 1
    Eigen::MatrixXd b_out;  // 1 x 1
    TrainConfig train;
    std::vector<double> loss_curve;

    // Tensors in a fixed order with stable names.
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors();
    std::size_t parameter_count();
};

GnnModel init_model(const FeatureLayout& layout, int layers = 3, int width = 16, std::uint64_t seed = 0);

Eigen::VectorXd forward(const GnnModel& m, const GraphInput& g);

// Mean binary cross-entropy over all nodes; fills grads (same shapes as
// tensors()) when non-null.
double loss_and_grad(GnnModel& m, const std::vector<ImportanceSample>& data, std::vector<Eigen::MatrixXd>* grads);

GnnModel train_gnn(const std::vector<ImportanceSample>& data, const FeatureLayout& layout, const TrainConfig& cfg = {},
                   int layers = 3, int width = 16);

// Per tensor: |analytic - numeric| / (|analytic| + |numeric|) in the
// Frobenius norm, by central differences.
struct GradCheck {
    double max_rel_error = 0;
    double max_abs_error = 0;  // element-wise
    std::string worst_tensor;
    std::map<std::string, double> per_tensor;
};

GradCheck gradient_check(GnnModel& m, const std::vector<ImportanceSample>& data, double eps = 1e-5);

std::map<std::string, double> scores(const GnnModel& m, const Domain& domain, const WorldState& current,
                                     const AtomSet& subgoal, const std::map<std::string, std::string>& types);

std::set<std::string> predict(const GnnModel& m, const Domain& domain, const WorldState& current,
                              const AtomSet& subgoal, double gamma, const std::map<std::string, std::string>& types);

// Objects whose atoms or poses change along a symbolic plan to the subgoal.
std::set<std::string> oracle_predict(const Domain& domain, const WorldState& current, const AtomSet& subgoal,
                                     const std::map<std::string, std::string>& types, const SolverConfig& cfg = {});

std::string model_to_json(const GnnModel& m);
GnnModel model_from_json(const std::string& text);

// Per-type symbolic end state of important objects that the next subgoal does
// not name, by majority over segments. Atoms use "?o" for the object.
std::map<std::string, AtomSet> learn_completion_templates(const std::vector<Segment>& segments,
                                                          const SubgoalSequence& subgoals, const Domain& domain);

}  // namespace ptamp
