#include "ptamp/decomposition.hpp"

#include <algorithm>
#include <memory>

#include "json.hpp"

#include "ptamp/geometry.hpp"

namespace ptamp {

using nlohmann::json;

Predictor gnn_predictor(const GnnModel& model, const Domain& domain, std::map<std::string, std::string> types) {
    auto m = std::make_shared<const GnnModel>(model);
    const Domain* d = &domain;
    return [m, d, types = std::move(types)](const WorldState& cur, const AtomSet& sg, double gamma) {
        return predict(*m, *d, cur, sg, gamma, types);
    };
}

Predictor oracle_predictor(const Domain& domain, std::map<std::string, std::string> types) {
    const Domain* d = &domain;
    return [d, types = std::move(types)](const WorldState& cur, const AtomSet& sg, double) {
        auto s = oracle_predict(*d, cur, sg, types);
        s.merge(forced_important(cur, sg, *d));
        return s;
    };
}

namespace {

// The support predicate whose base is a surface fixture ("ontable"), if any.
std::string surface_support(const Domain& domain) {
    for (const auto& p : domain.predicates)
        if (domain.is_support(p.name) && p.arg_types.size() == 2 && domain.is_surface_type(p.arg_types[1]))
            return p.name;
    return "";
}

bool mentions_any(const Atom& a, const std::set<std::string>& objs) {
    for (const auto& o : a.args)
        if (objs.count(o)) return true;
    return false;
}

const Atom* support_atom(const AtomSet& atoms, const std::string& o, const Domain& domain) {
    for (const auto& a : atoms)
        if (a.args.size() == 2 && a.args[0] == o && domain.is_support(a.pred)) return &a;
    return nullptr;
}

}  // namespace

AtomSet reduced_view(const AtomSet& atoms, const std::set<std::string>& important,
                     const std::set<std::string>& merged, const Domain& domain, const WorldState& state) {
    const std::string surf = surface_support(domain);
    AtomSet out;
    for (const auto& a : atoms) {
        if (a.args.empty() || !domain.is_fluent(a.pred) || !mentions_any(a, important)) continue;
        if (!surf.empty() && a.args.size() == 2 && domain.is_support(a.pred) && important.count(a.args[0]) &&
            (merged.count(a.args[1]) || (a.pred == surf && state.is_fixture(a.args[1])))) {
            out.insert(make_atom(surf, {a.args[0], kVirtualBase}));
            continue;
        }
        out.insert(a);
    }
    return out;
}

WorldState chain_states(const Subproblem& sp, const WorldState& prev, const Domain& domain) {
    WorldState next = prev;
    if (sp.important.empty()) return next;
    for (auto it = next.atoms.begin(); it != next.atoms.end();) {
        const bool drop = domain.is_fluent(it->pred) &&
                          (it->args.empty() || mentions_any(*it, sp.important));
        it = drop ? next.atoms.erase(it) : std::next(it);
    }
    for (const auto& a : sp.goal_full)
        if (mentions_any(a, sp.important)) next.atoms.insert(a);
    next.atoms.insert(domain.quiescent.begin(), domain.quiescent.end());
    for (const auto& o : sp.important) {
        auto it = sp.goal_poses.find(o);
        if (it == sp.goal_poses.end()) throw Error("subproblem " + std::to_string(sp.index) + " has no goal pose for " + o);
        next.poses[o] = it->second;
    }
    std::map<std::string, int> supports;
    for (const auto& a : next.atoms)
        if (!a.args.empty() && (domain.is_support(a.pred) || domain.is_holding(a.pred))) {
            if (++supports[a.args[0]] > 1)
                throw Error("subproblem " + std::to_string(sp.index) + " leaves " + a.args[0] +
                            " with conflicting supports");
        }
    return next;
}

std::vector<Subproblem> generate_subproblems(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                                             const SubgoalSequence& subgoals, const Predictor& predictor,
                                             double gamma, std::uint64_t seed) {
    if (subgoals.subgoals.empty()) throw Error("subgoal sequence is empty");
    std::vector<Subproblem> out;
    WorldState cur = problem.init;
    for (size_t zi = 0; zi < subgoals.size(); ++zi) {
        const int z = static_cast<int>(zi + 1);
        const AtomSet& G = subgoals.subgoals[zi];
        Subproblem sp;
        sp.index = z;
        sp.init = cur;
        std::set<std::string> imp = predictor(cur, G, gamma);
        imp.merge(forced_important(cur, G, domain));
        const std::set<std::string> held = held_objects(cur, domain);
        for (const auto& o : cur.movables()) (imp.count(o) ? sp.important : sp.merged).insert(o);

        for (const auto& a : G)
            if (mentions_any(a, sp.important)) sp.goal_full.insert(a);
        for (const auto& o : sp.important) {
            bool named = false;
            for (const auto& a : G) named = named || a.mentions(o);
            if (named) continue;
            AtomSet current;
            for (const auto& a : cur.atoms_of(o))
                if (domain.is_fluent(a.pred) && !a.args.empty() && !domain.is_holding(a.pred)) current.insert(a);
            auto ti = problem.object_types.find(o);
            auto tp = ti == problem.object_types.end() ? subgoals.completion.end() : subgoals.completion.find(ti->second);
            if (tp == subgoals.completion.end()) {
                sp.goal_full.insert(current.begin(), current.end());
                continue;
            }
            AtomSet tsupport, tother;
            for (Atom a : tp->second) {
                for (auto& arg : a.args)
                    if (arg == "?o") arg = o;
                (support_atom({a}, o, domain) ? tsupport : tother).insert(a);
            }
            const Atom* cs = held.count(o) ? nullptr : support_atom(cur.atoms, o, domain);
            const bool rests = cs && (sp.merged.count(cs->args[1]) ||
                                      (cur.is_fixture(cs->args[1]) && tsupport.count(*cs)));
            if (!tsupport.empty() && rests) sp.goal_full.insert(*cs);
            else sp.goal_full.insert(tsupport.begin(), tsupport.end());
            sp.goal_full.insert(tother.begin(), tother.end());
        }

        sp.world = merge_into_base(world, sp.merged, cur.poses, held);

        // goal poses: unchanged supports keep their pose, free placements are
        // sampled, stacked objects follow their base
        auto is_surface = [&](const std::string& f) {
            auto t = problem.object_types.find(f);
            return t != problem.object_types.end() && domain.is_surface_type(t->second);
        };
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& o : sp.important) {
                if (sp.goal_poses.count(o) || held.count(o)) continue;
                const Atom* sup = support_atom(sp.goal_full, o, domain);
                bool keep = false;
                if (!sup) {
                    keep = true;
                } else if (cur.atoms.count(*sup)) {
                    const std::string& b = sup->args[1];
                    keep = cur.is_fixture(b) || sp.merged.count(b) || sp.goal_poses.count(b);
                }
                if (keep) {
                    sp.goal_poses[o] = cur.poses.at(o);
                    changed = true;
                }
            }
        }
        for (const auto& o : sp.important) {
            if (sp.goal_poses.count(o)) continue;
            const Atom* sup = support_atom(sp.goal_full, o, domain);
            if (!sup) throw Error("subproblem " + std::to_string(z) + ": no goal support for held object " + o);
            if (!is_surface(sup->args[1])) continue;
            std::vector<Obstacle> extra;
            for (const auto& [m, p] : cur.poses)
                if (m != o && !cur.is_fixture(m) && !held.count(m)) extra.push_back({m, p, world.footprint(m)});
            for (const auto& [m, p] : sp.goal_poses)
                if (m != o) extra.push_back({m, p, world.footprint(m)});
            Rng rng = keyed_rng(seed, static_cast<std::uint64_t>(z), o);
            try {
                sp.goal_poses[o] = sample_placement(o, sp.world, rng, extra);
            } catch (const PlacementInfeasible&) {
                throw Error("subproblem " + std::to_string(z) + ": no free placement for " + o);
            }
        }
        for (bool progress = true; progress;) {
            progress = false;
            for (const auto& o : sp.important) {
                if (sp.goal_poses.count(o)) continue;
                const std::string& b = support_atom(sp.goal_full, o, domain)->args[1];
                const Pose* base = nullptr;
                if (sp.goal_poses.count(b)) base = &sp.goal_poses.at(b);
                else if (cur.is_fixture(b) || sp.merged.count(b)) base = &cur.poses.at(b);
                if (!base) continue;
                sp.goal_poses[o] = stack_pose(*base, world.footprint(b), world.footprint(o));
                progress = true;
            }
        }
        for (const auto& o : sp.important)
            if (!sp.goal_poses.count(o))
                throw Error("subproblem " + std::to_string(z) + ": goal support of " + o + " is cyclic");

        // restricted symbolic problem
        std::set<std::string> keep = sp.important;
        for (const auto& o : cur.objects)
            if (cur.is_fixture(o)) keep.insert(o);
        for (const auto& a : cur.atoms)
            if (mentions_any(a, sp.important))
                for (const auto& o : a.args) keep.insert(o);
        for (const auto& a : sp.goal_full)
            for (const auto& o : a.args) keep.insert(o);
        ProblemSpec& p = sp.problem;
        p.name = problem.name + "-sp" + std::to_string(z);
        p.domain_name = problem.domain_name;
        for (const auto& o : problem.object_order)
            if (keep.count(o)) {
                p.object_order.push_back(o);
                p.object_types[o] = problem.object_types.at(o);
            }
        for (const auto& o : cur.objects)
            if (keep.count(o)) {
                p.init.objects.insert(o);
                if (cur.is_fixture(o)) p.init.fixtures.insert(o);
                auto pi = cur.poses.find(o);
                if (pi != cur.poses.end()) p.init.poses[o] = pi->second;
            }
        for (const auto& a : cur.atoms) {
            bool inside = true;
            for (const auto& o : a.args) inside = inside && keep.count(o);
            if (inside) p.init.atoms.insert(a);
        }
        p.goal = sp.goal_full;
        p.goal_poses = sp.goal_poses;
        p.poses_given = true;
        for (const auto& o : sp.merged)
            if (keep.count(o)) p.frozen.insert(o);

        sp.init_atoms = reduced_view(cur.atoms, sp.important, sp.merged, domain, cur);
        sp.goal_atoms = reduced_view(sp.goal_full, sp.important, sp.merged, domain, cur);
        cur = chain_states(sp, cur, domain);
        out.push_back(std::move(sp));
    }
    return out;
}

namespace {

json atoms_json(const AtomSet& s) {
    json a = json::array();
    for (const auto& at : s) {
        json x = json::array({at.pred});
        for (const auto& o : at.args) x.push_back(o);
        a.push_back(x);
    }
    return a;
}

AtomSet atoms_from(const json& j) {
    AtomSet s;
    for (const auto& x : j) {
        Atom a;
        a.pred = x.at(0).get<std::string>();
        for (size_t k = 1; k < x.size(); ++k) a.args.push_back(x.at(k).get<std::string>());
        s.insert(a);
    }
    return s;
}

json pose_json(const Pose& p) { return json::array({p.x, p.y, p.z, p.yaw}); }
Pose pose_from(const json& j) {
    return Pose{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

json poses_json(const std::map<std::string, Pose>& m) {
    json j = json::object();
    for (const auto& [o, p] : m) j[o] = pose_json(p);
    return j;
}

std::map<std::string, Pose> poses_from(const json& j) {
    std::map<std::string, Pose> m;
    for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = pose_from(it.value());
    return m;
}

json state_json(const WorldState& s) {
    return {{"objects", s.objects}, {"fixtures", s.fixtures}, {"atoms", atoms_json(s.atoms)}, {"poses", poses_json(s.poses)}};
}

WorldState state_from(const json& j) {
    WorldState s;
    s.objects = j.at("objects").get<std::set<std::string>>();
    s.fixtures = j.at("fixtures").get<std::set<std::string>>();
    s.atoms = atoms_from(j.at("atoms"));
    s.poses = poses_from(j.at("poses"));
    return s;
}

json obstacles_json(const std::vector<Obstacle>& v) {
    json a = json::array();
    for (const auto& o : v)
        a.push_back({{"name", o.name}, {"pose", pose_json(o.pose)}, {"half_extents", {o.fp.dx, o.fp.dy, o.fp.dz}}});
    return a;
}

std::vector<Obstacle> obstacles_from(const json& j) {
    std::vector<Obstacle> v;
    for (const auto& o : j) {
        const auto& h = o.at("half_extents");
        v.push_back({o.at("name").get<std::string>(), pose_from(o.at("pose")),
                     Footprint{h.at(0).get<double>(), h.at(1).get<double>(), h.at(2).get<double>()}});
    }
    return v;
}

json sp_json(const Subproblem& sp) {
    json j;
    j["index"] = sp.index;
    j["important"] = sp.important;
    j["merged"] = sp.merged;
    j["init_atoms"] = atoms_json(sp.init_atoms);
    j["goal_atoms"] = atoms_json(sp.goal_atoms);
    j["goal_full"] = atoms_json(sp.goal_full);
    j["goal_poses"] = poses_json(sp.goal_poses);
    j["init"] = state_json(sp.init);
    json objs = json::array();
    for (const auto& o : sp.problem.object_order) objs.push_back({o, sp.problem.object_types.at(o)});
    j["problem"] = {{"name", sp.problem.name},
                    {"domain", sp.problem.domain_name},
                    {"objects", objs},
                    {"init", state_json(sp.problem.init)},
                    {"frozen", sp.problem.frozen}};
    json fps = json::object();
    for (const auto& [o, f] : sp.world.footprints) fps[o] = {f.dx, f.dy, f.dz};
    j["world"] = {{"bounds", {sp.world.xmin, sp.world.xmax, sp.world.ymin, sp.world.ymax}},
                  {"surface_z", sp.world.surface_z},
                  {"footprints", fps},
                  {"fixtures", obstacles_json(sp.world.fixtures)},
                  {"obstacles", obstacles_json(sp.world.obstacles)}};
    return j;
}

}  // namespace

std::string subproblem_to_json(const Subproblem& sp) { return sp_json(sp).dump(2); }

std::string subproblems_to_json(const std::vector<Subproblem>& sps) {
    json a = json::array();
    for (const auto& sp : sps) a.push_back(sp_json(sp));
    return a.dump(2);
}

Subproblem subproblem_from_json(const std::string& text, const Domain& domain) {
    json j = json::parse(text);
    if (j.is_array()) {
        if (j.empty()) throw Error("subproblem file is empty");
        j = j.at(0);
    }
    Subproblem sp;
    sp.index = j.at("index").get<int>();
    sp.important = j.at("important").get<std::set<std::string>>();
    sp.merged = j.at("merged").get<std::set<std::string>>();
    sp.init_atoms = atoms_from(j.at("init_atoms"));
    sp.goal_atoms = atoms_from(j.at("goal_atoms"));
    sp.goal_full = atoms_from(j.at("goal_full"));
    sp.goal_poses = poses_from(j.at("goal_poses"));
    sp.init = state_from(j.at("init"));
    const auto& pj = j.at("problem");
    ProblemSpec& p = sp.problem;
    p.name = pj.at("name").get<std::string>();
    p.domain_name = pj.at("domain").get<std::string>();
    if (p.domain_name != domain.name) throw Error("subproblem was built for domain " + p.domain_name);
    for (const auto& o : pj.at("objects")) {
        p.object_order.push_back(o.at(0).get<std::string>());
        p.object_types[p.object_order.back()] = o.at(1).get<std::string>();
    }
    p.init = state_from(pj.at("init"));
    p.frozen = pj.at("frozen").get<std::set<std::string>>();
    p.goal = sp.goal_full;
    p.goal_poses = sp.goal_poses;
    p.poses_given = true;
    const auto& wj = j.at("world");
    WorldModel& w = sp.world;
    w.xmin = wj.at("bounds").at(0).get<double>();
    w.xmax = wj.at("bounds").at(1).get<double>();
    w.ymin = wj.at("bounds").at(2).get<double>();
    w.ymax = wj.at("bounds").at(3).get<double>();
    w.surface_z = wj.at("surface_z").get<double>();
    for (auto it = wj.at("footprints").begin(); it != wj.at("footprints").end(); ++it)
        w.footprints[it.key()] = Footprint{it.value().at(0).get<double>(), it.value().at(1).get<double>(),
                                           it.value().at(2).get<double>()};
    w.fixtures = obstacles_from(wj.at("fixtures"));
    w.obstacles = obstacles_from(wj.at("obstacles"));
    for (const auto& o : w.obstacles) w.merged.insert(o.name);
    return sp;
}

}  // namespace ptamp
