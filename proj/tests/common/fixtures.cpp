#include "fixtures.hpp"

#include <fstream>
#include <sstream>

#ifndef PTAMP_SOURCE_DIR
#define PTAMP_SOURCE_DIR "."
#endif

namespace fx {

AtomSet atoms(const std::string& text) {
    AtomSet out;
    size_t i = 0;
    while ((i = text.find('(', i)) != std::string::npos) {
        size_t j = text.find(')', i);
        std::istringstream ss(text.substr(i + 1, j - i - 1));
        Atom a;
        ss >> a.pred;
        for (std::string tok; ss >> tok;) a.args.push_back(tok);
        out.insert(a);
        i = j;
    }
    return out;
}

std::set<std::string> names(const std::string& text) {
    std::istringstream ss(text);
    std::set<std::string> out;
    for (std::string t; ss >> t;) out.insert(t);
    return out;
}

std::string data_path(const std::string& rel) { return std::string(PTAMP_SOURCE_DIR) + "/" + rel; }

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

WorldState block_state(const std::string& atoms_text, const std::vector<std::string>& blocks) {
    WorldState s;
    s.atoms = atoms(atoms_text);
    s.fixtures.insert("T");
    s.objects.insert("T");
    s.poses["T"] = {};
    for (const auto& b : blocks) s.objects.insert(b);
    double x = -0.4;
    std::map<std::string, std::string> below;
    for (const auto& a : s.atoms)
        if (a.pred == "onblock") below[a.args[0]] = a.args[1];
    for (const auto& b : blocks)
        if (!below.count(b)) {
            s.poses[b] = {x, 0.0, 0.025, 0.0};
            x += 0.1;
        }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [top, base] : below)
            if (!s.poses.count(top) && s.poses.count(base)) {
                Pose p = s.poses[base];
                p.z += 0.05;
                s.poses[top] = p;
                changed = true;
            }
    }
    return s;
}

ProblemSpec block_problem(const std::string& init, const std::string& goal, const std::vector<std::string>& blocks) {
    ProblemSpec p;
    p.name = "test";
    p.domain_name = "blocks";
    for (const auto& b : blocks) {
        p.object_order.push_back(b);
        p.object_types[b] = "block";
    }
    p.object_order.push_back("T");
    p.object_types["T"] = "table";
    p.init = block_state(init, blocks);
    p.goal = atoms(goal);
    p.poses_given = true;
    return p;
}

const std::vector<Demonstration>& block6_demos() {
    static const auto demos = generate_demos(task_family(parse_task("Block6")), 100, 0);
    return demos;
}

const SubgoalSequence& block6_subgoals() {
    static const SubgoalSequence sg = [] {
        const Domain& d = builtin_domain("blocks");
        auto s = mine_subgoals(block6_demos(), d, gen_instance(parse_task("Block6"), 0).problem.goal, 0.9);
        s.completion = learn_completion_templates(segment_demos(block6_demos(), s, d), s, d);
        return s;
    }();
    return sg;
}

const std::vector<Segment>& block6_segments() {
    static const auto segs = segment_demos(block6_demos(), block6_subgoals(), builtin_domain("blocks"));
    return segs;
}

const GnnModel& block6_model() {
    static const GnnModel m = [] {
        const Domain& d = builtin_domain("blocks");
        FeatureLayout layout = make_layout(d);
        return train_gnn(build_dataset(block6_segments(), block6_subgoals(), d, layout), layout);
    }();
    return m;
}

const OfflineArtifacts& block8_artifacts() {
    static const OfflineArtifacts a = build_artifacts(parse_task("Block8"));
    return a;
}

Instance appendix_instance() { return load_instance(read_file(data_path("data/problems/block6_tower.pddl")), 0); }

}  // namespace fx
