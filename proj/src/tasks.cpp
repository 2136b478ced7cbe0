#include "ptamp/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <regex>

namespace ptamp {

namespace {

const char* kIngredients[] = {"green", "purple", "red", "pink", "yellow"};

}  // namespace

std::string TaskId::name() const { return (family == Block ? "Block" : "Cook") + std::to_string(n); }

TaskId parse_task(const std::string& s) {
    std::string l;
    for (char c : s) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::smatch m;
    if (std::regex_match(l, m, std::regex("block([468])"))) return {TaskId::Block, std::stoi(m[1])};
    if (std::regex_match(l, m, std::regex("cook([345])"))) return {TaskId::Cook, std::stoi(m[1])};
    throw Error("unknown task '" + s + "' (expected Block4/6/8 or Cook3/4/5)");
}

int full_object_count(const TaskId& task) {
    return task.family == TaskId::Block ? task.n + 2 : 2 * task.n + 3;
}

namespace {

Instance gen_blocks(int n, std::uint64_t seed, const GenOptions& opt) {
    const Domain& d = builtin_domain("blocks");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::string> blocks;
    for (int k = 0; k < n; ++k) blocks.push_back(std::string(1, static_cast<char>('A' + k)));

    Instance inst;
    inst.domain = &d;
    ProblemSpec& p = inst.problem;
    p.name = "block" + std::to_string(n) + "-" + std::to_string(seed);
    p.domain_name = d.name;
    for (const auto& b : blocks) {
        p.object_order.push_back(b);
        p.object_types[b] = "block";
    }
    p.object_order.push_back("T");
    p.object_types["T"] = "table";
    for (const auto& o : p.object_order) p.init.objects.insert(o);
    p.init.fixtures.insert("T");
    p.init.poses["T"] = Pose{};
    p.poses_given = true;
    inst.world = make_world(d, p);

    std::vector<std::string> order = blocks;
    if (u(rng) >= opt.p_ordered) std::shuffle(order.begin(), order.end(), rng);
    std::map<std::string, std::string> support;
    std::set<std::string> covered;
    std::vector<Obstacle> on_table;
    for (const auto& b : order) {
        std::vector<std::string> tops;
        for (const auto& [x, s] : support)
            if (!covered.count(x)) tops.push_back(x);
        if (tops.empty() || u(rng) < opt.p_table) {
            support[b] = "T";
            Pose q = sample_placement(b, inst.world, rng, on_table);
            on_table.push_back({b, q, inst.world.footprint(b)});
            p.init.poses[b] = q;
        } else {
            std::uniform_int_distribution<size_t> pick(0, tops.size() - 1);
            const std::string& base = tops[pick(rng)];
            support[b] = base;
            covered.insert(base);
            p.init.poses[b] = stack_pose(p.init.poses.at(base), inst.world.footprint(base), inst.world.footprint(b));
        }
    }
    for (const auto& [b, s] : support) {
        p.init.atoms.insert(s == "T" ? make_atom("ontable", {b, "T"}) : make_atom("onblock", {b, s}));
        if (!covered.count(b)) p.init.atoms.insert(make_atom("clear", {b}));
    }
    p.init.atoms.insert(make_atom("handempty"));
    p.goal.insert(make_atom("clear", {blocks.front()}));
    for (int k = 0; k + 1 < n; ++k) p.goal.insert(make_atom("onblock", {blocks[k], blocks[k + 1]}));
    p.goal.insert(make_atom("ontable", {blocks.back(), "T"}));
    return inst;
}

Instance gen_cook(int n, std::uint64_t seed, const GenOptions& opt) {
    const Domain& d = builtin_domain("cook");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance inst;
    inst.domain = &d;
    ProblemSpec& p = inst.problem;
    p.name = "cook" + std::to_string(n) + "-" + std::to_string(seed);
    p.domain_name = d.name;
    std::vector<std::string> ing, boxes;
    for (int k = 0; k < n; ++k) {
        ing.push_back(kIngredients[k]);
        boxes.push_back("box" + std::to_string(k + 1));
    }
    for (const auto& i : ing) {
        p.object_order.push_back(i);
        p.object_types[i] = "ingredient";
    }
    for (const auto& b : boxes) {
        p.object_order.push_back(b);
        p.object_types[b] = "box";
    }
    for (auto [o, t] : std::vector<std::pair<std::string, std::string>>{
             {"T", "table"}, {"sink", "sink"}, {"board", "board"}, {"pot", "pot"}}) {
        p.object_order.push_back(o);
        p.object_types[o] = t;
        p.init.fixtures.insert(o);
    }
    for (const auto& o : p.object_order) p.init.objects.insert(o);
    p.init.poses["T"] = Pose{};
    p.init.poses["sink"] = Pose{-0.3, -0.2, d.footprint_of("sink").dz, 0};
    p.init.poses["board"] = Pose{0.0, -0.2, d.footprint_of("board").dz, 0};
    p.init.poses["pot"] = Pose{0.3, -0.2, d.footprint_of("pot").dz, 0};
    p.poses_given = true;
    Footprint bfp = d.footprint_of("box"), ifp = d.footprint_of("ingredient");
    for (int k = 0; k < n; ++k)
        p.init.poses[boxes[static_cast<size_t>(k)]] = Pose{-0.4 + 0.8 * (k + 0.5) / n, 0.2, bfp.dz, 0};
    inst.world = make_world(d, p);

    std::vector<std::string> perm = boxes;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (const auto& b : boxes) {
        p.init.atoms.insert(make_atom("box-at", {b, "T"}));
        if (u(rng) < opt.p_open) p.init.atoms.insert(make_atom("opened", {b}));
    }
    std::uniform_int_distribution<int> status(0, 2);  // raw, washed, washed and cut
    for (int k = 0; k < n; ++k) {
        const std::string& i = ing[static_cast<size_t>(k)];
        const std::string& b = perm[static_cast<size_t>(k)];
        p.init.atoms.insert(make_atom("inbox", {i, b}));
        const Pose& bp = p.init.poses.at(b);
        p.init.poses[i] = Pose{bp.x, bp.y, ifp.dz, bp.yaw};
        int s = status(rng);
        if (s >= 1) p.init.atoms.insert(make_atom("washed", {i}));
        if (s >= 2) p.init.atoms.insert(make_atom("cut", {i}));
        if (k == 0) p.init.atoms.insert(make_atom("first", {i}));
        else p.init.atoms.insert(make_atom("next", {ing[static_cast<size_t>(k - 1)], i}));
        p.goal.insert(make_atom("cooked", {i}));
        p.goal.insert(make_atom("inpot", {i, "pot"}));
    }
    p.init.atoms.insert(make_atom("handempty"));
    return inst;
}

}  // namespace

Instance gen_instance(const TaskId& task, std::uint64_t seed, const GenOptions& opt) {
    return task.family == TaskId::Block ? gen_blocks(task.n, seed, opt) : gen_cook(task.n, seed, opt);
}

InstanceFamily task_family(const TaskId& task, const GenOptions& opt) {
    return [task, opt](std::uint64_t seed) { return gen_instance(task, seed, opt); };
}

void complete_poses(ProblemSpec& p, const Domain& d, const WorldModel& world, std::uint64_t seed) {
    std::map<std::string, std::string> base;
    for (const auto& a : p.init.atoms)
        if (a.args.size() == 2 && d.is_support(a.pred)) base[a.args[0]] = a.args[1];
    std::vector<Obstacle> placed;
    for (const auto& [o, q] : p.init.poses)
        if (!p.init.fixtures.count(o)) placed.push_back({o, q, world.footprint(o)});
    std::function<void(const std::string&, int)> place = [&](const std::string& o, int depth) {
        if (p.init.poses.count(o)) return;
        if (depth > 64) throw Error("support cycle at " + o);
        auto it = base.find(o);
        if (it == base.end() || d.is_surface_type(p.object_types.at(it->second))) {
            Rng rng = keyed_rng(seed, 0, o);
            Pose q = sample_placement(o, world, rng, placed);
            placed.push_back({o, q, world.footprint(o)});
            p.init.poses[o] = q;
            return;
        }
        place(it->second, depth + 1);
        const std::string& b = it->second;
        p.init.poses[o] = stack_pose(p.init.poses.at(b), world.footprint(b), world.footprint(o));
    };
    for (const auto& o : p.object_order) place(o, 0);
    p.poses_given = true;
}

Instance load_instance(const std::string& text, std::uint64_t seed) {
    std::smatch m;
    if (!std::regex_search(text, m, std::regex(R"(\(:domain\s+([^\s\)]+)\s*\))")))
        throw Error("problem does not name its domain");
    const Domain& d = builtin_domain(m[1]);
    Instance inst;
    inst.domain = &d;
    inst.problem = parse_problem(text, d);
    inst.world = make_world(d, inst.problem);
    complete_poses(inst.problem, d, inst.world, seed);
    inst.world = make_world(d, inst.problem);
    return inst;
}

}  // namespace ptamp
