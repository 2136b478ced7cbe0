#pragma once

#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ptamp/core.hpp"
#include "ptamp/domain.hpp"

namespace ptamp {

struct Subgraph {
    std::vector<std::string> nodes;  // sorted
    AtomSet atoms;                   // fluent atoms with at least one node argument
    int canonical_id = -1;

    std::string canonical_string() const;
};

// Run-global registry of subgraphs. Register-or-get is safe under concurrent use.
class ItemTable {
public:
    int encode(const Subgraph& sub);
    int find(const Subgraph& sub) const;  // -1 if absent
    Subgraph decode(int id) const;
    size_t size() const;

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, int> ids_;
    std::vector<Subgraph> items_;
};

struct Demonstration {
    int id = 0;
    std::vector<WorldState> steps;
    std::vector<std::string> actions;  // "(pick F T)" per transition
    std::map<std::string, std::string> types;  // object -> declared type, fixtures included
};

// Connected components over binary fluent atoms between movable objects.
// Fixtures are not nodes; atoms tying a node to a fixture become node
// attributes. Nullary atoms belong to no subgraph. Output is ordered by the
// smallest node name.
std::vector<Subgraph> decompose_subgraphs(const WorldState& state, const Domain& domain);

int canonical_encode(Subgraph& sub, ItemTable& table);

WorldState fluent_filter(const WorldState& state, const Domain& domain);

// JSON Lines persistence of demonstrations.
std::string demo_to_json(const Demonstration& d);
Demonstration demo_from_json(const std::string& line);
void write_demos(const std::string& path, const std::vector<Demonstration>& demos);
std::vector<Demonstration> read_demos(const std::string& path);

}  // namespace ptamp
