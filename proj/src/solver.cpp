#include "ptamp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <queue>

#include "json.hpp"

namespace ptamp {

using nlohmann::json;

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Solved: return "solved";
        case SolveStatus::SymbolicUnsat: return "symbolic-unsat";
        case SolveStatus::BindingExhausted: return "binding-exhausted";
        case SolveStatus::Timeout: return "timeout";
        case SolveStatus::Cancelled: return "cancelled";
        case SolveStatus::ExpansionLimit: return "expansion-limit";
    }
    return "unknown";
}

std::string PlanStep::str() const {
    std::string s = "(" + action;
    for (const auto& a : args) s += " " + a;
    return s + ")";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Task {
    int W = 1;
    std::vector<Atom> atoms;
    std::map<Atom, int> index;
    std::vector<GroundAction> acts;
    std::vector<std::vector<std::uint64_t>> pre, neg;
    std::vector<std::vector<int>> add, del;
    std::vector<std::uint64_t> init;
    std::vector<int> goal;
    bool unsat = false;
    std::string why;
};

bool frozen_touch(const GroundAction& ga, const std::set<std::string>& frozen) {
    if (frozen.empty()) return false;
    for (const auto* set : {&ga.add, &ga.del})
        for (const auto& a : *set)
            for (const auto& o : a.args)
                if (frozen.count(o)) return true;
    return false;
}

Task compile(const Domain& d, const ProblemSpec& p) {
    Task t;
    const AtomSet& init = p.init.atoms;
    AtomSet universe;
    for (const auto& a : init)
        if (d.is_fluent(a.pred)) universe.insert(a);
    for (auto& ga : ground(d, p.typed_objects())) {
        bool ok = true;
        for (const auto& a : ga.pre_pos)
            if (!d.is_fluent(a.pred) && !init.count(a)) ok = false;
        for (const auto& a : ga.pre_neg)
            if (!d.is_fluent(a.pred) && init.count(a)) ok = false;
        if (!ok || frozen_touch(ga, p.frozen)) continue;
        for (const auto* set : {&ga.pre_pos, &ga.pre_neg, &ga.add, &ga.del})
            for (const auto& a : *set)
                if (d.is_fluent(a.pred)) universe.insert(a);
        t.acts.push_back(std::move(ga));
    }
    for (const auto& g : p.goal) {
        if (d.is_fluent(g.pred)) {
            universe.insert(g);
        } else if (!init.count(g)) {
            t.unsat = true;
            t.why = "static goal atom " + g.str() + " is false";
        }
    }
    for (const auto& a : universe) {
        t.index[a] = static_cast<int>(t.atoms.size());
        t.atoms.push_back(a);
    }
    t.W = std::max<int>(1, static_cast<int>((t.atoms.size() + 63) / 64));
    auto bits = [&](const AtomSet& s, bool fluent_only) {
        std::vector<std::uint64_t> m(static_cast<size_t>(t.W), 0);
        for (const auto& a : s) {
            if (fluent_only && !d.is_fluent(a.pred)) continue;
            int i = t.index.at(a);
            m[static_cast<size_t>(i / 64)] |= 1ULL << (i % 64);
        }
        return m;
    };
    t.init = bits(init, true);
    for (const auto& ga : t.acts) {
        t.pre.push_back(bits(ga.pre_pos, true));
        t.neg.push_back(bits(ga.pre_neg, true));
        std::vector<int> ad, de;
        for (const auto& a : ga.add) ad.push_back(t.index.at(a));
        for (const auto& a : ga.del) de.push_back(t.index.at(a));
        t.add.push_back(std::move(ad));
        t.del.push_back(std::move(de));
    }
    for (const auto& g : p.goal)
        if (d.is_fluent(g.pred)) t.goal.push_back(t.index.at(g));
    return t;
}

class StateStore {
public:
    explicit StateStore(int w) : w_(static_cast<size_t>(w)), table_(1 << 12, -1) {}

    const std::uint64_t* get(int id) const { return data_.data() + static_cast<size_t>(id) * w_; }
    size_t size() const { return count_; }

    // Returns (id, inserted).
    std::pair<int, bool> insert(const std::uint64_t* s) {
        if ((count_ + 1) * 2 > table_.size()) grow();
        size_t mask = table_.size() - 1;
        size_t h = hash(s) & mask;
        while (table_[h] >= 0) {
            if (std::equal(s, s + w_, get(table_[h]))) return {table_[h], false};
            h = (h + 1) & mask;
        }
        int id = static_cast<int>(count_++);
        data_.insert(data_.end(), s, s + w_);
        table_[h] = id;
        return {id, true};
    }

private:
    std::uint64_t hash(const std::uint64_t* s) const {
        std::uint64_t h = 0x84222325cbf29ce4ULL;
        for (size_t k = 0; k < w_; ++k) h = splitmix64(h ^ s[k]);
        return h;
    }
    void grow() {
        std::vector<int> next(table_.size() * 2, -1);
        size_t mask = next.size() - 1;
        for (size_t id = 0; id < count_; ++id) {
            size_t h = hash(get(static_cast<int>(id))) & mask;
            while (next[h] >= 0) h = (h + 1) & mask;
            next[h] = static_cast<int>(id);
        }
        table_.swap(next);
    }

    size_t w_;
    std::vector<std::uint64_t> data_;
    std::vector<int> table_;
    size_t count_ = 0;
};

struct SearchOutcome {
    SolveStatus status = SolveStatus::SymbolicUnsat;
    std::vector<int> path;
};

struct QEntry {
    int f, h, g;
    std::uint64_t order;
    int node;
    bool operator<(const QEntry& o) const {  // priority_queue pops the largest
        if (f != o.f) return f > o.f;
        if (h != o.h) return h > o.h;
        return order > o.order;
    }
};

SearchOutcome astar(const Task& t, const SolverConfig& cfg, const std::set<std::vector<int>>& banned,
                    Clock::time_point t0, std::size_t& expansions) {
    SearchOutcome out;
    const size_t W = static_cast<size_t>(t.W);
    StateStore store(t.W);
    struct Node {
        int parent, action, g;
        bool closed;
    };
    std::vector<Node> nodes;
    auto count_h = [&](const std::uint64_t* s) {
        if (!cfg.heuristic) return 0;
        int h = 0;
        for (int gi : t.goal)
            if (!(s[gi / 64] >> (gi % 64) & 1ULL)) ++h;
        return h;
    };
    auto is_goal = [&](const std::uint64_t* s) {
        for (int gi : t.goal)
            if (!(s[gi / 64] >> (gi % 64) & 1ULL)) return false;
        return true;
    };
    std::priority_queue<QEntry> pq;
    std::uint64_t order = 0;
    store.insert(t.init.data());
    nodes.push_back({-1, -1, 0, false});
    {
        int h = count_h(store.get(0));
        pq.push({h, h, 0, order++, 0});
    }
    std::vector<std::uint64_t> succ(W);
    while (!pq.empty()) {
        QEntry e = pq.top();
        pq.pop();
        Node& n = nodes[static_cast<size_t>(e.node)];
        if (n.closed || e.g != n.g) continue;
        const std::uint64_t* s = store.get(e.node);
        if (is_goal(s)) {
            std::vector<int> path;
            for (int k = e.node; nodes[static_cast<size_t>(k)].parent >= 0; k = nodes[static_cast<size_t>(k)].parent)
                path.push_back(nodes[static_cast<size_t>(k)].action);
            std::reverse(path.begin(), path.end());
            if (banned.count(path)) {
                n.g = INT_MAX;  // allow a different path to reach this state
                continue;
            }
            out.status = SolveStatus::Solved;
            out.path = std::move(path);
            return out;
        }
        n.closed = true;
        ++expansions;
        if ((expansions & 1023) == 0) {
            if (cfg.cancel && cfg.cancel->load(std::memory_order_relaxed)) {
                out.status = SolveStatus::Cancelled;
                return out;
            }
            if (cfg.timeout_ms > 0 && ms_since(t0) > cfg.timeout_ms) {
                out.status = SolveStatus::Timeout;
                return out;
            }
        }
        if (expansions > cfg.max_expansions) {
            out.status = SolveStatus::ExpansionLimit;
            return out;
        }
        const int g = e.g;
        for (size_t a = 0; a < t.acts.size(); ++a) {
            const auto& pre = t.pre[a];
            const auto& neg = t.neg[a];
            bool ok = true;
            for (size_t w = 0; w < W && ok; ++w) ok = (s[w] & pre[w]) == pre[w] && (s[w] & neg[w]) == 0;
            if (!ok) continue;
            std::copy(s, s + W, succ.begin());
            for (int i : t.del[a]) succ[static_cast<size_t>(i / 64)] &= ~(1ULL << (i % 64));
            for (int i : t.add[a]) succ[static_cast<size_t>(i / 64)] |= 1ULL << (i % 64);
            auto [id, inserted] = store.insert(succ.data());
            s = store.get(e.node);  // storage may have moved
            int ng = g + 1;
            if (inserted) {
                nodes.push_back({e.node, static_cast<int>(a), ng, false});
            } else {
                Node& m = nodes[static_cast<size_t>(id)];
                if (m.closed || ng >= m.g) continue;
                m.parent = e.node;
                m.action = static_cast<int>(a);
                m.g = ng;
            }
            int h = count_h(succ.data());
            pq.push({ng + h, h, ng, order++, id});
        }
    }
    out.status = SolveStatus::SymbolicUnsat;
    return out;
}

enum class BaseKind { Surface, Movable, Fixture, None };

BaseKind base_kind(const Domain& d, const ProblemSpec& p, const std::string& o) {
    auto it = p.object_types.find(o);
    if (it == p.object_types.end()) return BaseKind::None;
    if (d.is_surface_type(it->second)) return BaseKind::Surface;
    if (d.is_fixture_type(it->second)) return BaseKind::Fixture;
    return BaseKind::Movable;
}

std::vector<Obstacle> others_on_table(const WorldState& s, const std::map<std::string, Pose>& poses,
                                      const std::set<std::string>& held, const WorldModel& world,
                                      const std::string& self) {
    std::vector<Obstacle> out;
    for (const auto& o : s.objects) {
        if (o == self || s.fixtures.count(o) || held.count(o) || world.merged.count(o)) continue;
        auto it = poses.find(o);
        if (it != poses.end()) out.push_back({o, it->second, world.footprint(o)});
    }
    return out;
}

// Symbolic+geometric step shared by binding and replay.
struct GeoState {
    WorldState ws;
    std::set<std::string> held;
};

// Binds one skeleton. Returns false on a geometric failure.
bool bind_skeleton(const Domain& d, const ProblemSpec& p, const WorldModel& world, const std::vector<GroundAction>& acts,
          Rng& rng, std::vector<PlanStep>& steps, std::vector<WorldState>* states) {
    GeoState g{p.init, held_objects(p.init, d)};
    std::map<std::string, int> last_place;
    for (size_t i = 0; i < acts.size(); ++i) {
        const auto& sc = d.actions[static_cast<size_t>(acts[i].schema)];
        if (sc.motion == MotionKind::Place) last_place[acts[i].args[static_cast<size_t>(sc.motion_arg)]] = static_cast<int>(i);
    }
    steps.clear();
    if (states) states->assign(1, g.ws);
    for (size_t i = 0; i < acts.size(); ++i) {
        const GroundAction& ga = acts[i];
        const auto& sc = d.actions[static_cast<size_t>(ga.schema)];
        const std::string& obj = ga.args[static_cast<size_t>(sc.motion_arg)];
        PlanStep st{ga.name, ga.args, {}};
        Pose key;
        switch (sc.motion) {
            case MotionKind::Grasp:
                key = g.ws.poses.at(obj);
                g.held.insert(obj);
                break;
            case MotionKind::Place: {
                const std::string& base = ga.args[static_cast<size_t>(sc.base_arg)];
                Footprint fp = world.footprint(obj);
                auto goal_it = p.goal_poses.find(obj);
                bool final_place = last_place[obj] == static_cast<int>(i) && goal_it != p.goal_poses.end();
                switch (base_kind(d, p, base)) {
                    case BaseKind::Surface: {
                        auto others = others_on_table(g.ws, g.ws.poses, g.held, world, obj);
                        if (final_place) {
                            key = goal_it->second;
                            if (collides(key, fp, world, others)) return false;
                        } else {
                            for (const auto& [o, gp] : p.goal_poses)
                                if (o != obj) others.push_back({o + "@goal", gp, world.footprint(o)});
                            try {
                                key = sample_placement(obj, world, rng, others);
                            } catch (const PlacementInfeasible&) {
                                return false;
                            }
                        }
                        break;
                    }
                    case BaseKind::Movable:
                        key = stack_pose(g.ws.poses.at(base), world.footprint(base), fp);
                        if (final_place && !pose_near(key, goal_it->second, 1e-9)) return false;
                        break;
                    default:
                        key = stack_pose(g.ws.poses.at(base), world.footprint(base), fp);
                        break;
                }
                g.ws.poses[obj] = key;
                g.held.erase(obj);
                break;
            }
            case MotionKind::Visit: {
                const std::string& fx = ga.args[static_cast<size_t>(sc.base_arg)];
                key = stack_pose(g.ws.poses.at(fx), world.footprint(fx), world.footprint(obj));
                g.ws.poses[obj] = key;
                break;
            }
            case MotionKind::Touch:
                key = g.ws.poses.at(obj);
                break;
        }
        st.key_poses.push_back(key);
        for (const auto& a : ga.del) g.ws.atoms.erase(a);
        for (const auto& a : ga.add) g.ws.atoms.insert(a);
        steps.push_back(std::move(st));
        if (states) states->push_back(g.ws);
    }
    return true;
}

}  // namespace

SolveResult solve(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                  const SolverConfig& cfg) {
    auto t0 = Clock::now();
    SolveResult res;
    Task t = compile(domain, problem);
    if (t.unsat) {
        res.status = SolveStatus::SymbolicUnsat;
        res.message = t.why;
        res.plan.stats.time_ms = ms_since(t0);
        return res;
    }
    std::set<std::vector<int>> banned;
    std::size_t expansions = 0;
    for (int attempt = 0; attempt <= cfg.max_skeleton_retries; ++attempt) {
        SearchOutcome so = astar(t, cfg, banned, t0, expansions);
        if (so.status != SolveStatus::Solved) {
            res.status = (so.status == SolveStatus::SymbolicUnsat && attempt > 0) ? SolveStatus::BindingExhausted
                                                                                : so.status;
            res.message = attempt > 0 ? "no bindable skeleton after " + std::to_string(attempt) + " bans"
                                      : std::string("search ended: ") + status_name(so.status);
            res.plan.stats.expansions = expansions;
            res.plan.stats.skeleton_retries = attempt;
            res.plan.stats.time_ms = ms_since(t0);
            return res;
        }
        std::vector<GroundAction> acts;
        for (int a : so.path) acts.push_back(t.acts[static_cast<size_t>(a)]);
        Plan plan;
        bool bound = false;
        if (!cfg.bind_geometry) {
            for (const auto& ga : acts) plan.skeleton.push_back({ga.name, ga.args, {}});
            if (cfg.record_states) {
                WorldState s = problem.init;
                plan.states.push_back(s);
                for (const auto& ga : acts) plan.states.push_back(s = apply(s, ga));
            }
            bound = true;
        } else {
            for (int r = 0; r < cfg.bind_attempts && !bound; ++r) {
                Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(r)));
                bound = bind_skeleton(domain, problem, world, acts, rng, plan.skeleton,
                             cfg.record_states ? &plan.states : nullptr);
            }
        }
        if (bound) {
            plan.stats.horizon = plan.horizon();
            plan.stats.expansions = expansions;
            plan.stats.skeleton_retries = attempt;
            plan.stats.time_ms = ms_since(t0);
            res.status = SolveStatus::Solved;
            res.plan = std::move(plan);
            return res;
        }
        banned.insert(so.path);
    }
    res.status = SolveStatus::BindingExhausted;
    res.message = "skeleton retries exhausted";
    res.plan.stats.expansions = expansions;
    res.plan.stats.skeleton_retries = cfg.max_skeleton_retries;
    res.plan.stats.time_ms = ms_since(t0);
    return res;
}

Validation validate(const Domain& d, const ProblemSpec& p, const WorldModel& world, const Plan& plan) {
    Validation v;
    GeoState g{p.init, held_objects(p.init, d)};
    auto fail = [&](int step, std::string why) {
        v.ok = false;
        v.failing_step = step;
        v.reason = std::move(why);
        v.final_state = g.ws;
        return v;
    };
    for (size_t i = 0; i < plan.skeleton.size(); ++i) {
        const PlanStep& st = plan.skeleton[i];
        const int si = static_cast<int>(i);
        GroundAction ga;
        try {
            ga = ground_one(d, st.action, st.args);
            for (const auto& a : st.args)
                if (!p.object_types.count(a)) return fail(si, "unknown object " + a);
            for (size_t k = 0; k < st.args.size(); ++k)
                if (!d.is_subtype(p.object_types.at(st.args[k]), d.actions[static_cast<size_t>(ga.schema)].params[k].type))
                    return fail(si, "argument type mismatch in " + st.str());
        } catch (const Error& e) {
            return fail(si, e.what());
        }
        if (!applicable(g.ws, ga)) return fail(si, "precondition violated for " + st.str());
        if (frozen_touch(ga, p.frozen)) return fail(si, st.str() + " changes a frozen object");
        if (st.key_poses.size() != 1) return fail(si, "expected one key pose for " + st.str());
        const Pose& key = st.key_poses[0];
        const auto& sc = d.actions[static_cast<size_t>(ga.schema)];
        const std::string& obj = ga.args[static_cast<size_t>(sc.motion_arg)];
        switch (sc.motion) {
            case MotionKind::Grasp:
            case MotionKind::Touch:
                if (!pose_near(key, g.ws.poses.at(obj), 1e-9)) return fail(si, "key pose does not match " + obj);
                if (sc.motion == MotionKind::Grasp) g.held.insert(obj);
                break;
            case MotionKind::Place: {
                const std::string& base = ga.args[static_cast<size_t>(sc.base_arg)];
                Footprint fp = world.footprint(obj);
                if (base_kind(d, p, base) == BaseKind::Surface) {
                    if (std::abs(key.z - (world.surface_z + fp.dz)) > 1e-9) return fail(si, "placement not on the table");
                    if (collides(key, fp, world, others_on_table(g.ws, g.ws.poses, g.held, world, obj)))
                        return fail(si, "placement of " + obj + " collides");
                } else if (!pose_near(key, stack_pose(g.ws.poses.at(base), world.footprint(base), fp), 1e-9)) {
                    return fail(si, "placement of " + obj + " is not on " + base);
                }
                g.ws.poses[obj] = key;
                g.held.erase(obj);
                break;
            }
            case MotionKind::Visit: {
                const std::string& fx = ga.args[static_cast<size_t>(sc.base_arg)];
                if (!pose_near(key, stack_pose(g.ws.poses.at(fx), world.footprint(fx), world.footprint(obj)), 1e-9))
                    return fail(si, "visit pose does not match " + fx);
                g.ws.poses[obj] = key;
                break;
            }
        }
        for (const auto& a : ga.del) g.ws.atoms.erase(a);
        for (const auto& a : ga.add) g.ws.atoms.insert(a);
    }
    const int end = static_cast<int>(plan.skeleton.size());
    if (!g.ws.holds(p.goal)) return fail(end, "goal not reached");
    for (const auto& [o, gp] : p.goal_poses) {
        auto it = g.ws.poses.find(o);
        if (it == g.ws.poses.end() || !pose_near(it->second, gp, 1e-6)) return fail(end, "goal pose of " + o + " not reached");
    }
    v.ok = true;
    v.final_state = g.ws;
    return v;
}

std::vector<WorldState> replay(const Domain& d, const WorldState& init, const Plan& plan) {
    std::vector<WorldState> out{init};
    WorldState s = init;
    for (const auto& st : plan.skeleton) {
        GroundAction ga = ground_one(d, st.action, st.args);
        s = apply(s, ga);
        const auto& sc = d.actions[static_cast<size_t>(ga.schema)];
        if ((sc.motion == MotionKind::Place || sc.motion == MotionKind::Visit) && !st.key_poses.empty())
            s.poses[ga.args[static_cast<size_t>(sc.motion_arg)]] = st.key_poses[0];
        out.push_back(s);
    }
    return out;
}

std::vector<Demonstration> generate_demos(const InstanceFamily& family, int n, std::uint64_t seed,
                                          const SolverConfig& base) {
    if (n < 1) throw Error("generate_demos needs n >= 1");
    std::vector<Demonstration> out;
    for (int i = 0; i < n; ++i) {
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        Instance inst = family(s);
        SolverConfig cfg = base;
        cfg.record_states = true;
        cfg.seed = derive_seed(s, 1);
        SolveResult r = solve(*inst.domain, inst.problem, inst.world, cfg);
        if (!r.ok())
            throw Error("demo " + std::to_string(i) + " (instance seed " + std::to_string(s) + ") failed: " +
                        status_name(r.status));
        Demonstration d;
        d.id = i + 1;
        d.steps = std::move(r.plan.states);
        d.types = inst.problem.object_types;
        for (const auto& st : r.plan.skeleton) d.actions.push_back(st.str());
        out.push_back(std::move(d));
    }
    return out;
}

std::string plan_to_json(const Plan& plan, bool include_timing) {
    json j;
    json sk = json::array();
    for (const auto& st : plan.skeleton) {
        json kp = json::array();
        for (const auto& p : st.key_poses) kp.push_back({p.x, p.y, p.z, p.yaw});
        sk.push_back({{"action", st.action}, {"args", st.args}, {"key_poses", kp}});
    }
    j["skeleton"] = sk;
    json stats = {{"horizon", plan.stats.horizon}, {"expansions", plan.stats.expansions}};
    if (include_timing) stats["time_ms"] = plan.stats.time_ms;
    j["stats"] = stats;
    return j.dump(2);
}

Plan plan_from_json(const std::string& text) {
    json j = json::parse(text);
    Plan p;
    for (const auto& st : j.at("skeleton")) {
        PlanStep s;
        s.action = st.at("action").get<std::string>();
        s.args = st.at("args").get<std::vector<std::string>>();
        for (const auto& k : st.at("key_poses"))
            s.key_poses.push_back({k.at(0).get<double>(), k.at(1).get<double>(), k.at(2).get<double>(),
                                   k.at(3).get<double>()});
        p.skeleton.push_back(std::move(s));
    }
    if (j.contains("stats")) {
        const auto& s = j["stats"];
        p.stats.horizon = s.value("horizon", static_cast<int>(p.skeleton.size()));
        p.stats.expansions = s.value("expansions", std::size_t{0});
        p.stats.time_ms = s.value("time_ms", 0.0);
    } else {
        p.stats.horizon = static_cast<int>(p.skeleton.size());
    }
    return p;
}

}  // namespace ptamp
