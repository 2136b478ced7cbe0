#pragma once

#include <string>
#include <vector>

#include "ptamp/bench.hpp"

namespace fx {

using namespace ptamp;

// "(clear A) (onblock A B)" -> atom set.
AtomSet atoms(const std::string& text);
std::set<std::string> names(const std::string& text);  // "A B C"

std::string data_path(const std::string& rel);
std::string read_file(const std::string& path);

// Blocks state: every named block gets a pose consistent with its support
// atoms (table blocks spread along x).
WorldState block_state(const std::string& atoms_text, const std::vector<std::string>& blocks);
ProblemSpec block_problem(const std::string& init, const std::string& goal, const std::vector<std::string>& blocks);

// Cached corpora built once per process.
const std::vector<Demonstration>& block6_demos();        // 100 demos, seed 0
const SubgoalSequence& block6_subgoals();                // mined at 0.9, completion learned
const std::vector<Segment>& block6_segments();
const GnnModel& block6_model();                          // trained with defaults
const OfflineArtifacts& block8_artifacts();              // default offline stage
Instance appendix_instance();

}  // namespace fx
