// Runs every acceptance criterion and prints one [PASS]/[FAIL] line each.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "mining_oracle.hpp"

using namespace ptamp;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double v) {
    std::ostringstream o;
    o.precision(2);
    o << std::scientific << v;
    return o.str();
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream o;
    o.precision(prec);
    o << std::fixed << v;
    return o.str();
}

const Domain& blocks() { return builtin_domain("blocks"); }

json appendix_listing() { return json::parse(fx::read_file(fx::data_path("data/fixtures/block6_appendix.json"))); }

// Offline artifacts per task, built once.
const OfflineArtifacts& artifacts(const std::string& task) {
    static std::map<std::string, OfflineArtifacts> cache;
    auto it = cache.find(task);
    if (it == cache.end()) it = cache.emplace(task, build_artifacts(parse_task(task))).first;
    return it->second;
}

// 100 eval trials per (task, method), run once and shared by criteria 3-6.
const std::vector<TrialResult>& trials(const std::string& task, const std::string& method) {
    static std::map<std::pair<std::string, std::string>, std::vector<TrialResult>> cache;
    auto key = std::make_pair(task, method);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, run_trials(artifacts(task), method, 100, 5)).first;
    return it->second;
}

BenchRow row(const std::string& task, const std::string& method, const std::string& metric) {
    BenchTable t;
    summarize(trials(task, method), t);
    const BenchRow* r = t.find(task, method, metric);
    return r ? *r : BenchRow{};
}

Outcome c1_subgoal_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    Instance ref = gen_instance(parse_task("Block6"), 0);
    auto demos = generate_demos(task_family(parse_task("Block6")), 100, 0);
    SubgoalSequence sg = mine_subgoals(demos, blocks(), ref.problem.goal, 0.9);
    const double secs = seconds_since(t0);
    json want = appendix_listing().at("subgoals");
    bool same = sg.size() == want.size();
    for (size_t i = 0; same && i < sg.size(); ++i) same = sg.subgoals[i] == fx::atoms(want[i].get<std::string>());
    return {same && secs < 60.0, std::to_string(sg.size()) + " subgoals, " + (same ? "exact match" : "mismatch") +
                                     ", " + fmt(secs, 1) + " s"};
}

Outcome c2_subproblem_fidelity() {
    json j = appendix_listing();
    Instance inst = fx::appendix_instance();
    const auto& off = artifacts("Block6");
    SubgoalSequence sg;
    for (const auto& s : j.at("subgoals")) sg.subgoals.push_back(fx::atoms(s.get<std::string>()));
    sg.completion = off.subgoals.completion;
    int matched = 0;
    const auto& listing = j.at("subproblems");
    auto sps = generate_subproblems(blocks(), inst.problem, inst.world, sg,
                                    gnn_predictor(off.model, blocks(), inst.problem.object_types), 0.8, 5);
    for (size_t z = 0; z < sps.size() && z < listing.size(); ++z)
        matched += sps[z].init_atoms == fx::atoms(listing[z].at("init").get<std::string>()) &&
                   sps[z].goal_atoms == fx::atoms(listing[z].at("goal").get<std::string>());
    const bool ok = sps.size() == listing.size() && matched == static_cast<int>(listing.size());
    return {ok, std::to_string(matched) + "/" + std::to_string(listing.size()) + " subproblems match"};
}

Outcome c3_horizon() {
    const auto t0 = std::chrono::steady_clock::now();
    BenchRow ours = row("Block8", "ours", "horizon"), ps = row("Block8", "PS", "horizon");
    const double secs = seconds_since(t0);
    return {ours.mean <= 4.3 && ps.mean >= 16.0 && secs < 1800,
            "Block8 ours " + fmt(ours.mean, 2) + "±" + fmt(ours.std, 2) + " (<= 4.3), PS " + fmt(ps.mean, 2) + "±" +
                fmt(ps.std, 2) + " (>= 16), " + fmt(secs, 0) + " s"};
}

Outcome c4_objects() {
    BenchRow cook = row("Cook5", "ours", "objects"), block = row("Block8", "ours", "objects");
    return {cook.mean <= 5.5 && block.mean <= 3.4,
            "Cook5 " + fmt(cook.mean, 2) + "±" + fmt(cook.std, 2) + " (<= 5.5), Block8 " + fmt(block.mean, 2) + "±" +
                fmt(block.std, 2) + " (<= 3.4)"};
}

Outcome c5_speedup() {
    auto ratio = [](const std::string& task) {
        return row(task, "PS", "time_s").mean / row(task, "ours", "time_s").mean;
    };
    const double b = ratio("Block8"), c = ratio("Cook5");
    return {b >= 5.0 && c >= 2.0, "monolithic/parallel time: Block8 " + fmt(b, 1) + "x (>= 5), Cook5 " + fmt(c, 2) +
                                      "x (>= 2), " + std::to_string(default_threads()) + " worker(s)"};
}

Outcome c6_success() {
    bool ok = true;
    std::string detail;
    for (const char* task : {"Block4", "Block6", "Block8", "Cook3", "Cook4", "Cook5"}) {
        int good = 0;
        for (const auto& t : trials(task, "ours")) good += t.success;
        ok = ok && good >= 99;
        detail += std::string(detail.empty() ? "" : ", ") + task + " " + std::to_string(good) + "%";
    }
    return {ok, detail};
}

Outcome c7_prefixspan_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(77);
    const std::vector<double> supports{0.2, 0.4, 0.5, 0.75, 1.0};
    int equal = 0;
    for (int t = 0; t < 200; ++t) {
        auto db = fx::random_db(rng);
        const double ms = supports[static_cast<size_t>(t) % supports.size()];
        equal += fx::packed(prefixspan(db, ms)) == fx::brute_force(db, ms);
    }
    const double secs = seconds_since(t0);
    return {equal == 200 && secs < 10.0, std::to_string(equal) + "/200 databases equal, " + fmt(secs, 2) + " s"};
}

Outcome c8_gradcheck() {
    const auto& off = artifacts("Block6");
    auto demos = generate_demos(task_family(parse_task("Block6")), 10, 0);
    auto segs = segment_demos(demos, off.subgoals, blocks());
    segs.resize(std::min<size_t>(segs.size(), 8));
    auto data = build_dataset(segs, off.subgoals, blocks(), make_layout(blocks()));
    GnnModel m = init_model(make_layout(blocks()), 3, 16, 0);
    auto gc = gradient_check(m, data, 1e-5);
    GnnModel trained = off.model;
    auto gt = gradient_check(trained, data, 1e-5);
    const double worst = std::max(gc.max_rel_error, gt.max_rel_error);
    return {worst < 1e-4, std::to_string(gc.per_tensor.size()) + " tensors, worst relative error " +
                              sci(worst) + " (" + (gc.max_rel_error >= gt.max_rel_error ? gc : gt).worst_tensor +
                              ")"};
}

Outcome c9_importance() {
    const auto& off = artifacts("Block6");
    auto demos = generate_demos(task_family(parse_task("Block6")), 100, 5);
    auto segs = segment_demos(demos, off.subgoals, blocks());
    int tp = 0, fp = 0, fn = 0;
    double worst_ms = 0, total_ms = 0;
    for (const auto& s : segs) {
        const AtomSet& goal = off.subgoals.subgoals[static_cast<size_t>(s.to - 1)];
        const auto t0 = std::chrono::steady_clock::now();
        auto got = predict(off.model, blocks(), s.states.front(), goal, 0.8, s.types);
        const double ms = seconds_since(t0) * 1e3;
        worst_ms = std::max(worst_ms, ms);
        total_ms += ms;
        auto want = label_important(s);
        for (const auto& o : got) (want.count(o) ? tp : fp)++;
        for (const auto& o : want) fn += !got.count(o);
    }
    const double f1 = 2.0 * tp / (2.0 * tp + fp + fn);
    return {f1 >= 0.99 && worst_ms < 50.0, "micro F1 " + fmt(f1, 4) + " over " + std::to_string(segs.size()) +
                                               " segments, latency mean " + fmt(total_ms / segs.size(), 3) +
                                               " ms, max " + fmt(worst_ms, 3) + " ms"};
}

Outcome c10_dmp() {
    Eigen::VectorXd s0(4), g0(4);
    s0 << 0, 0, 0.4, 0;
    g0 << 0.2, 0.1, 0.05, 0.3;
    Trajectory demo = minimum_jerk(s0, g0, 1.0, 501);
    DmpModel m = train_dmp(demo);
    Trajectory r = rollout(m, m.y0, m.goal, 1.0);
    const double rmse = std::sqrt((r.y - demo.y).array().square().colwise().mean().maxCoeff());
    const double rel = rmse / demo.path_length();

    Rng rng(5);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    double worst_end = 0;
    for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd s(4), g(4);
        for (long d = 0; d < 4; ++d) {
            s(d) = u(rng);
            g(d) = u(rng);
        }
        Trajectory t = rollout(m, s, g, 1.0 + (k % 3) * 0.5);
        worst_end = std::max(worst_end, (t.y.row(t.y.rows() - 1).transpose() - g).norm());
    }
    Eigen::VectorXd via = m.goal;
    via(2) += 0.10;
    Trajectory v = modulate_via(m, m.y0, m.goal, via, 0.75, 1.0);
    const long split = std::lround(0.75 / 0.002);
    const double via_err = (v.y.row(split).transpose() - via).norm();
    return {rel < 0.02 && worst_end < 1e-3 && via_err < 1e-9,
            "RMSE " + fmt(rel * 100, 3) + "% of path, shifted-goal error " + fmt(worst_end * 1e6, 2) +
                " um, via error " + fmt(via_err * 1e9, 3) + " nm"};
}

std::string pipeline_dump(const OfflineArtifacts& off, const std::string& task) {
    std::string out = subgoals_to_json(off.subgoals) + model_to_json(off.model);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const std::uint64_t seed = derive_seed(5, i);
        Instance inst = gen_instance(parse_task(task), seed);
        PipelineConfig cfg;
        cfg.solver.seed = derive_seed(seed, 1);
        cfg.decomp_seed = derive_seed(seed, 2);
        auto res = run_pipeline(*inst.domain, inst.problem, inst.world,
                                online_artifacts(off, *inst.domain, inst.problem.object_types), cfg);
        out += global_plan_to_json(res.plan, false);
    }
    return out;
}

Outcome c11_determinism() {
    std::string detail;
    bool ok = true;
    for (const char* task : {"Block6", "Cook4"}) {
        OfflineArtifacts a = build_artifacts(parse_task(task)), b = build_artifacts(parse_task(task));
        const std::string da = pipeline_dump(a, task), db = pipeline_dump(b, task);
        ok = ok && da == db;
        detail += std::string(detail.empty() ? "" : ", ") + task + (da == db ? " identical" : " differs") + " (" +
                  std::to_string(da.size()) + " bytes)";
    }
    return {ok, detail};
}

Outcome c12_fault_injection() {
    int cases = 0, good = 0;
    for (const char* task : {"Block6", "Block8", "Cook5"}) {
        const auto& off = artifacts(task);
        for (std::uint64_t i = 0; i < 10; ++i) {
            const std::uint64_t seed = derive_seed(5, i);
            Instance inst = gen_instance(parse_task(task), seed);
            PipelineConfig cfg;
            cfg.solver.seed = derive_seed(seed, 1);
            cfg.decomp_seed = derive_seed(seed, 2);
            cfg.inject_failures = {1 + static_cast<int>(i % off.subgoals.size())};
            auto res = run_pipeline(*inst.domain, inst.problem, inst.world,
                                    online_artifacts(off, *inst.domain, inst.problem.object_types), cfg);
            ++cases;
            good += res.ok && res.fell_back && res.mode_used == Mode::SubgoalsSequential &&
                    validate_global(*inst.domain, inst.problem, inst.world, res.plan).ok;
        }
    }
    return {good == cases, std::to_string(good) + "/" + std::to_string(cases) + " injected runs fell back and validated"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"subgoal recovery", c1_subgoal_recovery},  {"subproblem fidelity", c2_subproblem_fidelity},
        {"horizon reduction", c3_horizon},          {"object reduction", c4_objects},
        {"relative speedup", c5_speedup},           {"success rate", c6_success},
        {"prefixspan oracle", c7_prefixspan_oracle}, {"gradient check", c8_gradcheck},
        {"importance accuracy", c9_importance},     {"dmp properties", c10_dmp},
        {"determinism", c11_determinism},           {"fault injection", c12_fault_injection},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
    int failed = 0;
    for (size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << " " << criteria[k].first << ": " << o.detail
                  << std::endl;
    }
    return failed ? 1 : 0;
}
