// ptamp command-line entry point.
//
// Exit codes: 0 success, 1 runtime error, 2 solved only after falling back,
// 3 unsolved or invalid plan, 64 usage error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptamp/bench.hpp"
#include "ptamp/decomposition.hpp"
#include "ptamp/scene.hpp"

using json = nlohmann::json;
using namespace ptamp;

namespace {

constexpr int kExitFellBack = 2;
constexpr int kExitUnsolved = 3;
constexpr int kExitUsage = 64;

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

std::vector<std::string> split_list(const std::vector<std::string>& in) {
    std::vector<std::string> out;
    for (const auto& s : in) {
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

const auto kSupport = CLI::Validator(
    [](std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        if (!(v > 0 && v <= 1)) return "min-support must lie in (0, 1], got " + s;
        return {};
    },
    "(0,1]");

const auto kGamma = CLI::Validator(
    [](std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        if (!(v > 0 && v < 1)) return "gamma must lie in (0, 1), got " + s;
        return {};
    },
    "(0,1)");

// Where a subcommand gets its problem: a generated task instance or a PDDL file.
struct InstanceArgs {
    std::string task = "block6";
    std::string problem;
    std::uint64_t seed = 0;

    void add(CLI::App* app, const char* seed_help) {
        app->add_option("--task", task, "Block4|Block6|Block8|Cook3|Cook4|Cook5")->capture_default_str();
        app->add_option("--problem", problem, "PDDL problem file (overrides --task)");
        app->add_option("--seed", seed, seed_help)->capture_default_str();
    }
    Instance load() const {
        if (!problem.empty()) return load_instance(slurp(problem), seed);
        return gen_instance(parse_task(task), seed);
    }
};

// Learned artifacts for decompose and plan. Missing files are rebuilt from
// freshly generated demonstrations.
struct ArtifactArgs {
    std::string subgoals, model;
    bool oracle = false;
    int demos = 100;
    std::uint64_t demo_seed = 0;
    double gamma = 0.8;

    void add(CLI::App* app) {
        app->add_option("--subgoals", subgoals, "subgoal sequence JSON from 'mine'");
        app->add_option("--model", model, "importance model JSON from 'train'");
        app->add_flag("--oracle", oracle, "use the symbolic importance oracle instead of a model");
        app->add_option("--demos", demos, "demonstrations to generate when artifacts are missing")
            ->capture_default_str();
        app->add_option("--demo-seed", demo_seed, "demo seed when artifacts are missing")->capture_default_str();
        app->add_option("--gamma", gamma, "importance threshold")->check(kGamma)->capture_default_str();
    }
    OfflineArtifacts load(const InstanceArgs& ia) const {
        OfflineArtifacts off;
        if (!subgoals.empty() && (oracle || !model.empty())) {
            off.subgoals = subgoals_from_json(slurp(subgoals));
            if (!oracle) {
                off.model = model_from_json(slurp(model));
                off.has_model = true;
            }
            return off;
        }
        if (!ia.problem.empty()) throw Error("--problem needs --subgoals and --model (or --oracle)");
        OfflineConfig oc;
        oc.demos = demos;
        oc.demo_seed = demo_seed;
        oc.train_model = !oracle && model.empty();
        off = build_artifacts(parse_task(ia.task), oc);
        if (!subgoals.empty()) off.subgoals = subgoals_from_json(slurp(subgoals));
        if (!model.empty() && !oracle) {
            off.model = model_from_json(slurp(model));
            off.has_model = true;
        }
        return off;
    }
};

Predictor make_predictor(const OfflineArtifacts& off, const Instance& inst) {
    return online_artifacts(off, *inst.domain, inst.problem.object_types).predictor;
}

void attach_dmps(OfflineArtifacts& off, const Domain& domain) {
    if (!off.dmps.empty()) return;
    std::vector<std::string> actions;
    for (const auto& a : domain.actions) actions.push_back(a.name);
    off.dmps = default_dmp_registry(actions);
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Learned decomposition and parallel task and motion planning"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file; keys match long flag names, one [section] per subcommand");
    bool as_json = false;
    std::string out;
    app.add_flag("--json", as_json, "machine-readable output on stdout");
    app.add_option("--out", out, "output file ('-' or empty for stdout)");

    // gen-demos
    auto* gen = app.add_subcommand("gen-demos", "generate demonstrations by solving random instances");
    std::string gen_task = "block6";
    int gen_n = 100;
    std::uint64_t gen_seed = 0;
    gen->add_option("--task", gen_task, "task family")->capture_default_str();
    gen->add_option("-n,--count", gen_n, "number of demonstrations")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--seed", gen_seed, "demo seed")->capture_default_str();

    // mine
    auto* mine = app.add_subcommand("mine", "mine the subgoal sequence from demonstrations");
    std::string mine_demos, mine_task = "block6";
    double min_support = 0.9;
    mine->add_option("--demos", mine_demos, "demonstration JSONL")->required();
    mine->add_option("--task", mine_task, "task providing the domain and goal")->capture_default_str();
    mine->add_option("--min-support", min_support, "minimum support ratio")->check(kSupport)->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train the importance GNN");
    std::string tr_demos, tr_subgoals, tr_task = "block6";
    TrainConfig tc;
    int tr_layers = 3, tr_width = 16;
    train->add_option("--demos", tr_demos, "demonstration JSONL")->required();
    train->add_option("--subgoals", tr_subgoals, "subgoal sequence JSON")->required();
    train->add_option("--task", tr_task, "task providing the domain")->capture_default_str();
    train->add_option("--epochs", tc.epochs)->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--lr", tc.lr)->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--layers", tr_layers)->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--width", tr_width)->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--seed", tc.seed, "initialization seed")->capture_default_str();

    // decompose
    auto* dec = app.add_subcommand("decompose", "generate the subproblems of one instance");
    InstanceArgs dec_inst;
    ArtifactArgs dec_art;
    std::uint64_t dec_seed = 5;
    dec_inst.add(dec, "instance seed");
    dec_art.add(dec);
    dec->add_option("--decomp-seed", dec_seed, "goal-pose sampling seed")->capture_default_str();

    // plan
    auto* plan = app.add_subcommand("plan", "solve one instance");
    InstanceArgs plan_inst;
    ArtifactArgs plan_art;
    PipelineConfig pc;
    std::string plan_mode = "parallel";
    bool no_fallback = false, no_motion = false;
    std::vector<int> inject;
    plan_inst.add(plan, "instance seed");
    plan_art.add(plan);
    plan->add_option("--mode", plan_mode, "parallel|subproblems-sequential|subgoals-sequential|monolithic")
        ->capture_default_str();
    plan->add_flag("--gamma-square", pc.gamma_square_retry, "retry decomposition with gamma^2 before falling back");
    plan->add_flag("--no-fallback", no_fallback, "report the first stage's failure instead of falling back");
    plan->add_flag("--no-motion", no_motion, "skip DMP trajectory generation");
    plan->add_option("--inject-failure", inject, "subproblem indices forced to fail");
    plan->add_option("--decomp-seed", pc.decomp_seed, "goal-pose sampling seed")->capture_default_str();

    // validate
    auto* val = app.add_subcommand("validate", "validate a plan against an instance");
    InstanceArgs val_inst;
    std::string val_plan;
    val_inst.add(val, "instance seed");
    val->add_option("--plan", val_plan, "plan JSON from 'plan'")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "run trials and emit metric tables");
    std::vector<std::string> b_tasks{"block4,block6,block8,cook3,cook4,cook5"}, b_methods{"all"};
    BenchConfig bc;
    std::string b_markdown, b_trials_out;
    bool b_oracle = false;
    bench->add_option("--tasks", b_tasks, "comma-separated tasks")->capture_default_str();
    bench->add_option("--methods", b_methods, "comma-separated methods (PS, PS+SPM, PS+SPM+GNN, ours) or all")
        ->capture_default_str();
    bench->add_option("--trials", bc.trials)->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--seed", bc.eval_seed, "evaluation seed")->capture_default_str();
    bench->add_option("--demo-seed", bc.offline.demo_seed)->capture_default_str();
    bench->add_option("--demos", bc.offline.demos)->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--gamma", bc.pipeline.gamma)->check(kGamma)->capture_default_str();
    bench->add_option("--markdown", b_markdown, "also write markdown tables here");
    bench->add_option("--trials-out", b_trials_out, "per-trial JSONL");
    bench->add_flag("--oracle", b_oracle, "use the symbolic importance oracle instead of a model");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (*gen) {
            TaskId task = parse_task(gen_task);
            auto demos = generate_demos(task_family(task), gen_n, gen_seed);
            if (out.empty() || out == "-") {
                for (const auto& d : demos) std::cout << demo_to_json(d) << '\n';
            } else {
                write_demos(out, demos);
            }
            double mean = 0;
            for (const auto& d : demos) mean += static_cast<double>(d.actions.size());
            mean /= static_cast<double>(demos.size());
            if (as_json)
                std::cerr << json{{"task", task.name()}, {"count", demos.size()}, {"mean_length", mean}}.dump() << '\n';
            else
                std::cerr << demos.size() << " demonstrations, mean length " << mean << '\n';
            return 0;
        }
        if (*mine) {
            TaskId task = parse_task(mine_task);
            Instance ref = gen_instance(task, 0);
            auto demos = read_demos(mine_demos);
            auto sg = mine_subgoals(demos, *ref.domain, ref.problem.goal, min_support);
            auto segs = segment_demos(demos, sg, *ref.domain);
            sg.completion = learn_completion_templates(segs, sg, *ref.domain);
            const std::string text = subgoals_to_json(sg);
            spill(out, text);
            if (!as_json && !out.empty() && out != "-")
                for (size_t i = 0; i < sg.subgoals.size(); ++i)
                    std::cout << "G" << i + 1 << ": " << atoms_str(sg.subgoals[i]) << '\n';
            return 0;
        }
        if (*train) {
            TaskId task = parse_task(tr_task);
            Instance ref = gen_instance(task, 0);
            auto demos = read_demos(tr_demos);
            auto sg = subgoals_from_json(slurp(tr_subgoals));
            auto segs = segment_demos(demos, sg, *ref.domain);
            FeatureLayout layout = make_layout(*ref.domain);
            auto data = build_dataset(segs, sg, *ref.domain, layout);
            auto t0 = std::chrono::steady_clock::now();
            GnnModel m = train_gnn(data, layout, tc, tr_layers, tr_width);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            spill(out.empty() ? "-" : out, model_to_json(m));
            json info{{"samples", data.size()},
                      {"parameters", m.parameter_count()},
                      {"final_loss", m.loss_curve.empty() ? 0.0 : m.loss_curve.back()},
                      {"train_s", secs}};
            std::cerr << (as_json ? info.dump() : "trained on " + std::to_string(data.size()) + " samples, loss " +
                                                      std::to_string(info["final_loss"].get<double>()))
                      << '\n';
            return 0;
        }
        if (*dec) {
            Instance inst = dec_inst.load();
            OfflineArtifacts off = dec_art.load(dec_inst);
            auto sps = generate_subproblems(*inst.domain, inst.problem, inst.world, off.subgoals,
                                            make_predictor(off, inst), dec_art.gamma, dec_seed);
            spill(out, subproblems_to_json(sps));
            if (!as_json && !out.empty() && out != "-")
                for (const auto& sp : sps) {
                    std::cout << "SP" << sp.index << " important {";
                    bool first = true;
                    for (const auto& o : sp.important) std::cout << (first ? "" : ", ") << o, first = false;
                    std::cout << "}\n";
                }
            return 0;
        }
        if (*plan) {
            Instance inst = plan_inst.load();
            OfflineArtifacts off = plan_art.load(plan_inst);
            attach_dmps(off, *inst.domain);
            pc.mode = parse_mode(plan_mode);
            pc.gamma = plan_art.gamma;
            pc.fallback = !no_fallback;
            pc.motion = !no_motion;
            pc.inject_failures = std::set<int>(inject.begin(), inject.end());
            pc.solver.seed = derive_seed(plan_inst.seed, 1);
            Artifacts art = online_artifacts(off, *inst.domain, inst.problem.object_types);
            PipelineResult r = run_pipeline(*inst.domain, inst.problem, inst.world, art, pc);
            json summary{{"ok", r.ok},
                         {"mode_used", mode_name(r.mode_used)},
                         {"fell_back", r.fell_back},
                         {"horizon", r.plan.horizon()},
                         {"sub_horizons", r.plan.sub_horizons},
                         {"attempts", r.attempts},
                         {"plan_ms", r.plan_ms},
                         {"failure", r.failure}};
            if (r.ok) spill(out, global_plan_to_json(r.plan));
            if (as_json) {
                std::cerr << summary.dump() << '\n';
            } else {
                for (const auto& a : r.attempts) std::cerr << a << '\n';
                if (r.ok)
                    std::cerr << "solved by " << mode_name(r.mode_used) << ", horizon " << r.plan.horizon() << ", "
                              << r.plan_ms << " ms\n";
                else
                    std::cerr << "unsolved: " << r.failure << '\n';
            }
            if (!r.ok) return kExitUnsolved;
            return r.fell_back ? kExitFellBack : 0;
        }
        if (*val) {
            Instance inst = val_inst.load();
            Plan p = plan_from_json(slurp(val_plan));
            Validation v = validate(*inst.domain, inst.problem, inst.world, p);
            json info{{"valid", v.ok}, {"failing_step", v.failing_step}, {"reason", v.reason}};
            if (as_json)
                std::cout << info.dump() << '\n';
            else if (v.ok)
                std::cout << "valid (" << p.skeleton.size() << " steps)\n";
            else
                std::cout << "invalid at step " << v.failing_step << ": " << v.reason << '\n';
            return v.ok ? 0 : kExitUnsolved;
        }
        if (*bench) {
            for (const auto& t : split_list(b_tasks)) bc.tasks.push_back(parse_task(t));
            auto methods = split_list(b_methods);
            if (methods.size() == 1 && methods[0] == "all") methods = kMethods;
            for (const auto& m : methods) method_mode(m);
            bc.methods = methods;
            bc.offline.train_model = !b_oracle;
            std::vector<TrialResult> all;
            BenchTable table = run_bench(bc, &all);
            spill(out, table.csv());
            if (!b_markdown.empty()) spill(b_markdown, table.markdown());
            if (!b_trials_out.empty()) {
                std::ostringstream os;
                for (const auto& t : all)
                    os << json{{"task", t.task},         {"method", t.method},   {"seed", t.seed},
                               {"horizons", t.horizons}, {"objects", t.objects}, {"wall_ms", t.wall_ms},
                               {"success", t.success},   {"fell_back", t.fell_back}, {"note", t.note}}
                              .dump()
                       << '\n';
                spill(b_trials_out, os.str());
            }
            if (!as_json && !out.empty() && out != "-") std::cout << table.markdown();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}

int main(int argc, char** argv) { return cli_main(argc, argv); }
