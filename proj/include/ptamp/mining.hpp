#pragma once

#include <climits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ptamp/scene.hpp"

namespace ptamp {

using Itemset = std::vector<int>;     // sorted, unique
using Sequence = std::vector<Itemset>;
using Pattern = std::vector<Itemset>;

struct SequenceDatabase {
    std::vector<Sequence> sequences;
    std::shared_ptr<ItemTable> items;
    std::vector<int> demo_lengths;  // steps per source demo

    size_t size() const { return sequences.size(); }
};

struct BuildOptions {
    bool quiescent_only = true;  // keep states where the domain's quiescent atoms hold
    bool collapse = true;        // merge consecutive identical elements
};

SequenceDatabase build_database(const std::vector<Demonstration>& demos, const Domain& domain,
                                const BuildOptions& opt = {}, std::shared_ptr<ItemTable> table = nullptr);

struct FrequentPattern {
    Pattern elements;
    int support = 0;
};

int min_count(double min_support, size_t n);

// Order-preserving containment with at most one pattern element per
// sequence element.
bool contains(const Sequence& seq, const Pattern& p);
int support(const std::vector<Sequence>& db, const Pattern& p);

// All frequent sequential patterns, sorted by elements.
std::vector<FrequentPattern> prefixspan(const std::vector<Sequence>& db, double min_support);
inline std::vector<FrequentPattern> prefixspan(const SequenceDatabase& db, double min_support) {
    return prefixspan(db.sequences, min_support);
}

struct Reward {
    int length = 0, items = 0, distinct = 0;
    double R_l = 0, R_q = 0, R_v = 0, R = 0;
};

struct SubgoalSequence {
    std::vector<AtomSet> subgoals;
    Pattern pattern;
    Reward reward;
    double min_support = 0.9;
    int support = 0;
    bool goal_appended = false;
    // Per movable type, end state for important objects a subgoal leaves
    // unnamed ("?o" stands for the object). Filled after segmentation.
    std::map<std::string, AtomSet> completion;

    size_t size() const { return subgoals.size(); }
};

struct SelectOptions {
    // Drop candidates whose next element is a subset of the previous one:
    // persisting items otherwise produce repeated stale elements.
    bool progressive = true;
    int max_length = INT_MAX;
};

Reward raw_reward(const Pattern& p);
std::string pattern_encoding(const Pattern& p, const ItemTable& table);

SubgoalSequence select_target_sequence(const std::vector<FrequentPattern>& patterns, const ItemTable& table,
                                       const AtomSet& goal, const SelectOptions& opt = {});

SubgoalSequence mine_subgoals(const std::vector<Demonstration>& demos, const Domain& domain, const AtomSet& goal,
                              double min_support = 0.9, const BuildOptions& bopt = {});

std::string subgoals_to_json(const SubgoalSequence& s);
SubgoalSequence subgoals_from_json(const std::string& text);

}  // namespace ptamp
