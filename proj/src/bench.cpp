#include "ptamp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace ptamp {

Mode method_mode(const std::string& method) {
    if (method == "PS") return Mode::Monolithic;
    if (method == "PS+SPM") return Mode::SubgoalsSequential;
    if (method == "PS+SPM+GNN") return Mode::SubproblemsSequential;
    if (method == "ours") return Mode::Parallel;
    throw Error("unknown method '" + method + "' (expected PS, PS+SPM, PS+SPM+GNN or ours)");
}

OfflineArtifacts build_artifacts(const TaskId& task, const OfflineConfig& cfg, const std::vector<Demonstration>* given) {
    OfflineArtifacts off;
    off.task = task;
    Instance ref = gen_instance(task, 0);
    const Domain& domain = *ref.domain;
    std::vector<Demonstration> generated;
    if (!given) generated = generate_demos(task_family(task), cfg.demos, cfg.demo_seed);
    const std::vector<Demonstration>& demos = given ? *given : generated;
    off.subgoals = mine_subgoals(demos, domain, ref.problem.goal, cfg.min_support);
    auto segs = segment_demos(demos, off.subgoals, domain, false, &off.skipped_demos);
    off.segments = static_cast<int>(segs.size());
    off.subgoals.completion = learn_completion_templates(segs, off.subgoals, domain);
    if (cfg.train_model) {
        FeatureLayout layout = make_layout(domain);
        off.model = train_gnn(build_dataset(segs, off.subgoals, domain, layout), layout, cfg.train);
        off.has_model = true;
    }
    std::vector<std::string> actions;
    for (const auto& a : domain.actions) actions.push_back(a.name);
    off.dmps = default_dmp_registry(actions);
    return off;
}

Artifacts online_artifacts(const OfflineArtifacts& off, const Domain& domain,
                           const std::map<std::string, std::string>& types) {
    Artifacts a;
    a.subgoals = &off.subgoals;
    a.predictor = off.has_model ? gnn_predictor(off.model, domain, types) : oracle_predictor(domain, types);
    a.dmps = off.dmps;
    return a;
}

std::vector<TrialResult> run_trials(const OfflineArtifacts& off, const std::string& method, int trials,
                                    std::uint64_t eval_seed, const PipelineConfig& base) {
    std::vector<TrialResult> out;
    const Mode mode = method_mode(method);
    for (int i = 0; i < trials; ++i) {
        TrialResult t;
        t.task = off.task.name();
        t.method = method;
        t.seed = derive_seed(eval_seed, static_cast<std::uint64_t>(i));
        Instance inst = gen_instance(off.task, t.seed);
        PipelineConfig cfg = base;
        cfg.mode = mode;
        cfg.eval_seed = eval_seed;
        cfg.solver.seed = derive_seed(t.seed, 1);
        cfg.decomp_seed = derive_seed(t.seed, 2);
        Artifacts art = online_artifacts(off, *inst.domain, inst.problem.object_types);
        PipelineResult r;
        try {
            r = run_pipeline(*inst.domain, inst.problem, inst.world, art, cfg);
        } catch (const std::exception& e) {
            r.ok = false;
            r.failure = e.what();
        }
        t.success = r.ok;
        t.fell_back = r.fell_back;
        t.wall_ms = r.plan_ms;
        t.horizons = r.plan.sub_horizons;
        if (!r.sp_objects.empty()) t.objects = r.sp_objects;
        else t.objects.assign(t.horizons.size(), full_object_count(off.task));
        for (const auto& a : r.attempts) t.note += (t.note.empty() ? "" : "; ") + a;
        if (!r.ok) t.note += (t.note.empty() ? "" : "; ") + r.failure;
        out.push_back(std::move(t));
    }
    return out;
}

void mean_std(const std::vector<double>& v, double& mean, double& std) {
    mean = 0;
    std = 0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) std += (x - mean) * (x - mean);
    std = std::sqrt(std / static_cast<double>(v.size()));
}

void summarize(const std::vector<TrialResult>& trials, BenchTable& table) {
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<const TrialResult*>> groups;
    for (const auto& t : trials) {
        auto k = std::make_pair(t.task, t.method);
        if (!groups.count(k)) keys.push_back(k);
        groups[k].push_back(&t);
    }
    for (const auto& k : keys) {
        const auto& g = groups[k];
        std::vector<double> h, o, s;
        int ok = 0;
        for (const auto* t : g) {
            if (!t->success) continue;
            ++ok;
            for (int x : t->horizons) h.push_back(x);
            for (int x : t->objects) o.push_back(x);
            s.push_back(t->wall_ms / 1000.0);
        }
        const double rate = static_cast<double>(ok) / static_cast<double>(g.size());
        for (auto [metric, vals] : {std::pair{"horizon", &h}, std::pair{"objects", &o}, std::pair{"time_s", &s}}) {
            BenchRow r;
            r.task = k.first;
            r.method = k.second;
            r.metric = metric;
            mean_std(*vals, r.mean, r.std);
            r.trials = static_cast<int>(g.size());
            r.success_rate = rate;
            table.rows.push_back(r);
        }
    }
}

std::string BenchTable::csv() const {
    std::ostringstream os;
    os << "task,method,metric,mean,std,trials,success_rate\n";
    os << std::setprecision(6);
    for (const auto& r : rows)
        os << r.task << ',' << r.method << ',' << r.metric << ',' << r.mean << ',' << r.std << ',' << r.trials << ','
           << r.success_rate << '\n';
    return os.str();
}

const BenchRow* BenchTable::find(const std::string& task, const std::string& method, const std::string& metric) const {
    for (const auto& r : rows)
        if (r.task == task && r.method == method && r.metric == metric) return &r;
    return nullptr;
}

std::string BenchTable::markdown() const {
    std::vector<std::string> tasks, methods;
    for (const auto& r : rows) {
        if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    std::ostringstream os;
    const std::vector<std::pair<std::string, std::string>> metrics = {
        {"horizon", "Planning horizon"}, {"objects", "Number of objects"}, {"time_s", "Planning time [s]"}};
    for (const auto& [metric, title] : metrics) {
        os << "### " << title << "\n\n| Task |";
        for (const auto& m : methods) os << ' ' << m << " |";
        os << "\n|---|";
        for (size_t k = 0; k < methods.size(); ++k) os << "---|";
        os << '\n';
        for (const auto& t : tasks) {
            os << "| " << t << " |";
            for (const auto& m : methods) {
                const BenchRow* r = find(t, m, metric);
                if (!r) {
                    os << " - |";
                    continue;
                }
                const int prec = metric == "time_s" ? 4 : 2;
                os << ' ' << std::fixed << std::setprecision(prec) << r->mean << "±" << r->std << " |";
            }
            os << '\n';
        }
        os << '\n';
    }
    os << "### Success rate\n\n| Task |";
    for (const auto& m : methods) os << ' ' << m << " |";
    os << "\n|---|";
    for (size_t k = 0; k < methods.size(); ++k) os << "---|";
    os << '\n';
    for (const auto& t : tasks) {
        os << "| " << t << " |";
        for (const auto& m : methods) {
            const BenchRow* r = find(t, m, "horizon");
            if (r) os << ' ' << std::fixed << std::setprecision(0) << 100 * r->success_rate << "% |";
            else os << " - |";
        }
        os << '\n';
    }
    return os.str();
}

BenchTable run_bench(const BenchConfig& cfg, std::vector<TrialResult>* all) {
    BenchTable table;
    for (const auto& task : cfg.tasks) {
        OfflineArtifacts off = build_artifacts(task, cfg.offline);
        std::vector<TrialResult> trials;
        for (const auto& m : cfg.methods) {
            auto t = run_trials(off, m, cfg.trials, cfg.eval_seed, cfg.pipeline);
            trials.insert(trials.end(), t.begin(), t.end());
        }
        summarize(trials, table);
        if (all) all->insert(all->end(), trials.begin(), trials.end());
    }
    return table;
}

}  // namespace ptamp
