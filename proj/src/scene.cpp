#include "ptamp/scene.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace ptamp {

using nlohmann::json;

std::string Subgraph::canonical_string() const {
    std::string s = "nodes:";
    for (size_t k = 0; k < nodes.size(); ++k) s += (k ? "," : "") + nodes[k];
    s += "|atoms:";
    for (const auto& a : atoms) s += a.str();
    return s;
}

int ItemTable::encode(const Subgraph& sub) {
    std::string key = sub.canonical_string();
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(items_.size());
    ids_.emplace(std::move(key), id);
    Subgraph stored = sub;
    stored.canonical_id = id;
    items_.push_back(std::move(stored));
    return id;
}

int ItemTable::find(const Subgraph& sub) const {
    std::string key = sub.canonical_string();
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ids_.find(key);
    return it == ids_.end() ? -1 : it->second;
}

Subgraph ItemTable::decode(int id) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (id < 0 || static_cast<size_t>(id) >= items_.size())
        throw Error("unknown item id " + std::to_string(id));
    return items_[static_cast<size_t>(id)];
}

size_t ItemTable::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return items_.size();
}

std::vector<Subgraph> decompose_subgraphs(const WorldState& state, const Domain& domain) {
    std::vector<std::string> nodes = state.movables();
    std::map<std::string, size_t> index;
    for (size_t k = 0; k < nodes.size(); ++k) index[nodes[k]] = k;
    std::vector<size_t> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& a : state.atoms) {
        if (a.args.size() != 2 || !domain.is_fluent(a.pred)) continue;
        auto i = index.find(a.args[0]);
        auto j = index.find(a.args[1]);
        if (i == index.end() || j == index.end()) continue;
        size_t ri = root(i->second), rj = root(j->second);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    }
    std::map<size_t, Subgraph> comps;
    for (size_t k = 0; k < nodes.size(); ++k) comps[root(k)].nodes.push_back(nodes[k]);
    for (const auto& a : state.atoms) {
        if (a.args.empty() || !domain.is_fluent(a.pred)) continue;
        for (const auto& o : a.args) {
            auto it = index.find(o);
            if (it != index.end()) {
                comps[root(it->second)].atoms.insert(a);
                break;
            }
        }
    }
    std::vector<Subgraph> out;
    for (auto& [r, sg] : comps) {
        std::sort(sg.nodes.begin(), sg.nodes.end());
        out.push_back(std::move(sg));
    }
    std::sort(out.begin(), out.end(),
              [](const Subgraph& a, const Subgraph& b) { return a.nodes.front() < b.nodes.front(); });
    return out;
}

int canonical_encode(Subgraph& sub, ItemTable& table) {
    sub.canonical_id = table.encode(sub);
    return sub.canonical_id;
}

WorldState fluent_filter(const WorldState& state, const Domain& domain) {
    WorldState out = state;
    out.atoms.clear();
    for (const auto& a : state.atoms)
        if (domain.is_fluent(a.pred)) out.atoms.insert(a);
    return out;
}

namespace {

json atom_json(const Atom& a) {
    json j = json::array({a.pred});
    for (const auto& x : a.args) j.push_back(x);
    return j;
}

Atom atom_from(const json& j) {
    Atom a;
    a.pred = j.at(0).get<std::string>();
    for (size_t k = 1; k < j.size(); ++k) a.args.push_back(j.at(k).get<std::string>());
    return a;
}

}  // namespace

std::string demo_to_json(const Demonstration& d) {
    json j;
    j["id"] = d.id;
    if (!d.steps.empty()) {
        j["objects"] = d.steps.front().objects;
        j["fixtures"] = d.steps.front().fixtures;
    }
    if (!d.types.empty()) j["types"] = d.types;
    j["actions"] = d.actions;
    json steps = json::array();
    for (const auto& s : d.steps) {
        json st;
        json atoms = json::array();
        for (const auto& a : s.atoms) atoms.push_back(atom_json(a));
        st["atoms"] = atoms;
        json poses = json::object();
        for (const auto& [o, p] : s.poses) poses[o] = {p.x, p.y, p.z, p.yaw};
        st["poses"] = poses;
        steps.push_back(st);
    }
    j["steps"] = steps;
    return j.dump();
}

Demonstration demo_from_json(const std::string& line) {
    json j = json::parse(line);
    Demonstration d;
    d.id = j.value("id", 0);
    std::set<std::string> objects, fixtures;
    if (j.contains("objects")) objects = j["objects"].get<std::set<std::string>>();
    if (j.contains("fixtures")) fixtures = j["fixtures"].get<std::set<std::string>>();
    if (j.contains("types")) d.types = j["types"].get<std::map<std::string, std::string>>();
    if (j.contains("actions")) d.actions = j["actions"].get<std::vector<std::string>>();
    for (const auto& st : j.at("steps")) {
        WorldState s;
        s.objects = objects;
        s.fixtures = fixtures;
        for (const auto& a : st.at("atoms")) s.atoms.insert(atom_from(a));
        for (const auto& [o, p] : st.at("poses").items()) {
            s.poses[o] = Pose{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(),
                              p.at(3).get<double>()};
            if (objects.empty()) s.objects.insert(o);
        }
        d.steps.push_back(std::move(s));
    }
    return d;
}

void write_demos(const std::string& path, const std::vector<Demonstration>& demos) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    for (const auto& d : demos) os << demo_to_json(d) << "\n";
}

std::vector<Demonstration> read_demos(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    std::vector<Demonstration> out;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) out.push_back(demo_from_json(line));
    return out;
}

}  // namespace ptamp
