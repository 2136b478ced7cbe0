#pragma once

#include <map>
#include <string>
#include <vector>

#include "ptamp/core.hpp"

namespace ptamp {

struct PredicateDecl {
    std::string name;
    std::vector<std::string> arg_types;
    bool fluent = false;  // appears in some action effect
};

struct TypedVar {
    std::string name;  // "?x"
    std::string type;
};

struct Literal {
    Atom atom;  // arguments are parameter names
    bool negated = false;
};

enum class MotionKind { Grasp, Place, Visit, Touch };

const char* motion_name(MotionKind k);

struct ActionSchema {
    std::string name;
    std::vector<TypedVar> params;
    std::vector<Literal> pre;
    std::vector<Atom> add, del;
    MotionKind motion = MotionKind::Touch;
    int motion_arg = 0;  // parameter that is moved, visited or touched
    int base_arg = -1;   // support parameter for grasp/place, visited fixture for visit
};

struct Domain {
    std::string name;
    std::map<std::string, std::string> type_parent;
    std::vector<PredicateDecl> predicates;
    std::vector<ActionSchema> actions;
    std::map<std::string, Footprint> footprints;  // by type
    std::vector<std::string> surface_types;
    std::vector<std::string> support_preds;
    std::vector<std::string> holding_preds;
    AtomSet quiescent;

    bool is_subtype(const std::string& type, const std::string& ancestor) const;
    bool is_fixture_type(const std::string& type) const;
    bool is_surface_type(const std::string& type) const;
    bool is_support(const std::string& pred) const;
    bool is_holding(const std::string& pred) const;
    const PredicateDecl& predicate(const std::string& name) const;  // throws
    bool has_predicate(const std::string& name) const;
    bool is_fluent(const std::string& pred) const;                  // throws on unknown
    const ActionSchema& action(const std::string& name) const;      // throws
    Footprint footprint_of(const std::string& type) const;
};

struct ProblemSpec {
    std::string name;
    std::string domain_name;
    std::vector<std::string> object_order;
    std::map<std::string, std::string> object_types;
    WorldState init;
    AtomSet goal;
    bool poses_given = false;
    // Optional geometric targets and symbolically frozen objects, used by
    // decomposed subproblems.
    std::map<std::string, Pose> goal_poses;
    std::set<std::string> frozen;

    std::vector<std::pair<std::string, std::string>> typed_objects() const;
    std::string surface_object(const Domain& d) const;  // first surface fixture
};

struct GroundAction {
    int schema = -1;
    std::string name;
    std::vector<std::string> args;
    AtomSet pre_pos, pre_neg, add, del;

    std::string str() const;
};

class ParseError : public Error {
public:
    ParseError(int line, int col, const std::string& msg);
    int line, col;
};

Domain parse_domain(const std::string& text);
ProblemSpec parse_problem(const std::string& text, const Domain& domain);

// Every type-consistent binding with pairwise-distinct arguments, in schema
// order then lexicographic order of the object list.
std::vector<GroundAction> ground(const Domain& domain,
                                 const std::vector<std::pair<std::string, std::string>>& objects);
GroundAction ground_one(const Domain& domain, const std::string& action,
                        const std::vector<std::string>& args);

bool applicable(const WorldState& s, const GroundAction& ga);
WorldState apply(const WorldState& s, const GroundAction& ga);  // throws on inapplicable
bool holds(const WorldState& s, const AtomSet& goal);

// Checks an atom against declarations; throws Error naming the problem.
void check_atom(const Domain& d, const std::map<std::string, std::string>& object_types,
                const Atom& a);

std::string write_problem(const ProblemSpec& p);

// Domain texts shipped with the library: "blocks", "cook".
const std::string& builtin_domain_text(const std::string& name);
const Domain& builtin_domain(const std::string& name);

}  // namespace ptamp
