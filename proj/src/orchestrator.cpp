#include "ptamp/orchestrator.hpp"

#include <chrono>
#include <cstdlib>

#include "json.hpp"

namespace ptamp {

using nlohmann::json;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Monolithic: return "monolithic";
        case Mode::SubgoalsSequential: return "subgoals-sequential";
        case Mode::SubproblemsSequential: return "subproblems-sequential";
        case Mode::Parallel: return "parallel";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    for (Mode m : {Mode::Monolithic, Mode::SubgoalsSequential, Mode::SubproblemsSequential, Mode::Parallel})
        if (s == mode_name(m)) return m;
    if (s == "ps") return Mode::Monolithic;
    if (s == "ps+spm") return Mode::SubgoalsSequential;
    if (s == "ps+spm+gnn") return Mode::SubproblemsSequential;
    if (s == "ours") return Mode::Parallel;
    throw Error("unknown mode '" + s + "'");
}

ThreadPool::ThreadPool(unsigned threads) {
    if (threads == 0) threads = 1;
    for (unsigned i = 0; i < threads; ++i)
        workers_.emplace_back([this] {
            for (;;) {
                std::packaged_task<void()> job;
                {
                    std::unique_lock lk(mu_);
                    cv_.wait(lk, [this] { return stop_ || !jobs_.empty(); });
                    if (stop_ && jobs_.empty()) return;
                    job = std::move(jobs_.front());
                    jobs_.pop();
                }
                job();
            }
        });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
}

std::future<void> ThreadPool::submit(std::function<void()> job) {
    std::packaged_task<void()> task(std::move(job));
    auto fut = task.get_future();
    {
        std::lock_guard lk(mu_);
        jobs_.push(std::move(task));
    }
    cv_.notify_one();
    return fut;
}

unsigned default_threads() {
    if (const char* env = std::getenv("PTAMP_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

ThreadPool& shared_pool() {
    static ThreadPool pool(default_threads());
    return pool;
}

namespace {

SubplanSet gather(std::vector<SolveResult>& res, const std::vector<double>& ms) {
    SubplanSet out;
    out.ok = true;
    for (size_t z = 0; z < res.size(); ++z) {
        out.sum_ms += ms[z];
        if (res[z].ok()) continue;
        if (out.ok || (out.status == SolveStatus::Cancelled && res[z].status != SolveStatus::Cancelled)) {
            out.ok = false;
            out.failing_index = static_cast<int>(z + 1);
            out.status = res[z].status;
            out.message = res[z].message;
        }
    }
    if (out.ok)
        for (auto& r : res) out.plans.push_back(std::move(r.plan));
    return out;
}

SolveResult solve_one(const Domain& domain, const Subproblem& sp, const SolverConfig& base,
                      const std::atomic<bool>* cancel, bool injected) {
    SolveResult r;
    if (injected) {
        r.status = SolveStatus::SymbolicUnsat;
        r.message = "injected failure";
        return r;
    }
    SolverConfig c = base;
    c.seed = derive_seed(base.seed, static_cast<std::uint64_t>(sp.index));
    c.cancel = cancel;
    try {
        r = solve(domain, sp.problem, sp.world, c);
    } catch (const std::exception& e) {
        r.status = SolveStatus::SymbolicUnsat;
        r.message = e.what();
    }
    return r;
}

}  // namespace

SubplanSet parallel_tamp(const Domain& domain, const std::vector<Subproblem>& sps, const SolverConfig& cfg,
                         ThreadPool& pool, const std::set<int>& inject) {
    const auto t0 = std::chrono::steady_clock::now();
    std::atomic<bool> cancel{false};
    std::vector<SolveResult> res(sps.size());
    std::vector<double> ms(sps.size(), 0.0);
    std::vector<std::future<void>> futs;
    for (size_t z = 0; z < sps.size(); ++z)
        futs.push_back(pool.submit([&, z] {
            if (cancel.load()) {
                res[z].status = SolveStatus::Cancelled;
                return;
            }
            const auto t = std::chrono::steady_clock::now();
            res[z] = solve_one(domain, sps[z], cfg, &cancel, inject.count(sps[z].index) > 0);
            ms[z] = ms_since(t);
            if (!res[z].ok()) cancel.store(true);
        }));
    for (auto& f : futs) f.get();
    SubplanSet out = gather(res, ms);
    out.wall_ms = ms_since(t0);
    return out;
}

SubplanSet solve_in_order(const Domain& domain, const std::vector<Subproblem>& sps, const SolverConfig& cfg,
                          const std::set<int>& inject) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SolveResult> res(sps.size());
    std::vector<double> ms(sps.size(), 0.0);
    bool failed = false;
    for (size_t z = 0; z < sps.size(); ++z) {
        if (failed) {
            res[z].status = SolveStatus::Cancelled;
            continue;
        }
        const auto t = std::chrono::steady_clock::now();
        res[z] = solve_one(domain, sps[z], cfg, cfg.cancel, inject.count(sps[z].index) > 0);
        ms[z] = ms_since(t);
        failed = !res[z].ok();
    }
    SubplanSet out = gather(res, ms);
    out.wall_ms = ms_since(t0);
    return out;
}

SubplanSet sequential_tamp(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                           const SubgoalSequence& subgoals, const SolverConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    SubplanSet out;
    out.ok = true;
    WorldState current = problem.init;
    for (size_t z = 0; z < subgoals.size(); ++z) {
        ProblemSpec leg = problem;
        leg.name = problem.name + "-leg" + std::to_string(z + 1);
        leg.init = current;
        leg.goal = subgoals.subgoals[z];
        leg.goal_poses.clear();
        leg.frozen.clear();
        SolverConfig c = cfg;
        c.seed = derive_seed(cfg.seed, z + 1);
        const auto t = std::chrono::steady_clock::now();
        SolveResult r;
        try {
            r = solve(domain, leg, world, c);
        } catch (const std::exception& e) {
            r.status = SolveStatus::SymbolicUnsat;
            r.message = e.what();
        }
        out.sum_ms += ms_since(t);
        if (!r.ok()) {
            out.ok = false;
            out.failing_index = static_cast<int>(z + 1);
            out.status = r.status;
            out.message = r.message;
            break;
        }
        current = replay(domain, current, r.plan).back();
        out.plans.push_back(std::move(r.plan));
    }
    if (out.ok && !current.holds(problem.goal)) {
        out.ok = false;
        out.failing_index = static_cast<int>(subgoals.size());
        out.message = "subgoal legs end short of the goal";
    }
    if (!out.ok) out.plans.clear();
    out.wall_ms = ms_since(t0);
    return out;
}

GlobalPlan concatenate(const std::vector<Plan>& subplans, const std::map<std::string, DmpModel>& registry,
                       const Pose& home, double lift) {
    GlobalPlan g;
    Eigen::VectorXd prev = pose_vec(home);
    for (const auto& p : subplans) {
        g.sub_horizons.push_back(p.horizon());
        for (const auto& step : p.skeleton) {
            g.skeleton.push_back(step);
            auto it = registry.find(step.action);
            if (it == registry.end()) throw Error("no motion primitive for action schema '" + step.action + "'");
            Eigen::VectorXd goal = step.key_poses.empty() ? prev : pose_vec(step.key_poses.front());
            Eigen::VectorXd via = goal;
            via(2) += lift;
            Trajectory tr = modulate_via(it->second, prev, goal, via, 0.75, it->second.duration);
            prev = tr.y.row(static_cast<long>(tr.size()) - 1).transpose();
            g.trajectories.push_back(std::move(tr));
        }
    }
    return g;
}

Validation validate_global(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                           const GlobalPlan& plan, const Pose& home) {
    Plan p;
    p.skeleton = plan.skeleton;
    Validation v = validate(domain, problem, world, p);
    if (!v.ok || plan.trajectories.empty()) return v;
    if (plan.trajectories.size() != plan.skeleton.size()) {
        v.ok = false;
        v.reason = "trajectory count differs from skeleton length";
        return v;
    }
    Eigen::VectorXd prev = pose_vec(home);
    for (size_t k = 0; k < plan.trajectories.size(); ++k) {
        const auto& tr = plan.trajectories[k];
        const double gap = (tr.y.row(0).transpose() - prev).head(3).norm();
        if (gap >= 1e-6) {
            v.ok = false;
            v.failing_step = static_cast<int>(k);
            v.reason = "trajectory gap of " + std::to_string(gap) + " m before step " + std::to_string(k);
            return v;
        }
        prev = tr.y.row(static_cast<long>(tr.size()) - 1).transpose();
    }
    return v;
}

PipelineResult run_pipeline(const Domain& domain, const ProblemSpec& problem, const WorldModel& world,
                            const Artifacts& art, const PipelineConfig& cfg) {
    if (!(cfg.gamma > 0 && cfg.gamma < 1)) throw Error("gamma must lie in (0, 1)");
    const auto t_start = std::chrono::steady_clock::now();
    PipelineResult r;
    double excluded_ms = 0;  // motion synthesis and validation

    auto finish = [&](std::vector<Plan>& plans, Mode used, const std::string& label) {
        const auto tm = std::chrono::steady_clock::now();
        GlobalPlan g;
        if (cfg.motion) {
            g = concatenate(plans, art.dmps, kHomePose, cfg.lift);
        } else {
            for (const auto& p : plans) {
                g.sub_horizons.push_back(p.horizon());
                g.skeleton.insert(g.skeleton.end(), p.skeleton.begin(), p.skeleton.end());
            }
        }
        const double motion = ms_since(tm);
        const auto tv = std::chrono::steady_clock::now();
        Validation v = validate_global(domain, problem, world, g);
        excluded_ms += motion + ms_since(tv);
        if (!v.ok) {
            r.attempts.push_back(label + ": plan failed validation: " + v.reason);
            return false;
        }
        g.mode = mode_name(used);
        r.plan = std::move(g);
        r.mode_used = used;
        r.motion_ms = motion;
        return true;
    };

    auto decomposed = [&](double gamma, bool parallel, const std::string& label) {
        if (!art.subgoals || !art.predictor) {
            r.attempts.push_back(label + ": missing subgoals or importance predictor");
            return false;
        }
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<Subproblem> sps;
        try {
            sps = generate_subproblems(domain, problem, world, *art.subgoals, art.predictor, gamma, cfg.decomp_seed);
        } catch (const std::exception& e) {
            r.attempts.push_back(label + ": decomposition failed: " + e.what());
            return false;
        }
        r.decompose_ms = ms_since(t0);
        SubplanSet res = parallel ? parallel_tamp(domain, sps, cfg.solver, shared_pool(), cfg.inject_failures)
                                  : solve_in_order(domain, sps, cfg.solver, cfg.inject_failures);
        r.solve_ms = res.wall_ms;
        if (!res.ok) {
            r.attempts.push_back(label + ": failed at SP " + std::to_string(res.failing_index) + " (" +
                                 status_name(res.status) + (res.message.empty() ? "" : ", " + res.message) + ")");
            return false;
        }
        if (!finish(res.plans, parallel ? Mode::Parallel : Mode::SubproblemsSequential, label)) return false;
        r.sp_objects.clear();
        for (const auto& sp : sps) r.sp_objects.push_back(static_cast<int>(sp.important.size()));
        return true;
    };

    auto sequential = [&]() {
        if (!art.subgoals) {
            r.attempts.push_back("subgoals-sequential: missing subgoals");
            return false;
        }
        SubplanSet res = sequential_tamp(domain, problem, world, *art.subgoals, cfg.solver);
        r.solve_ms = res.wall_ms;
        if (!res.ok) {
            r.attempts.push_back("subgoals-sequential: failed at leg " + std::to_string(res.failing_index) + " (" +
                                 status_name(res.status) + ")");
            return false;
        }
        r.sp_objects.clear();
        return finish(res.plans, Mode::SubgoalsSequential, "subgoals-sequential");
    };

    auto monolithic = [&]() {
        SolverConfig c = cfg.solver;
        c.seed = derive_seed(cfg.solver.seed, 0);
        const auto t0 = std::chrono::steady_clock::now();
        SolveResult s = solve(domain, problem, world, c);
        r.solve_ms = ms_since(t0);
        if (!s.ok()) {
            r.attempts.push_back(std::string("monolithic: ") + status_name(s.status));
            return false;
        }
        std::vector<Plan> plans{std::move(s.plan)};
        r.sp_objects.clear();
        return finish(plans, Mode::Monolithic, "monolithic");
    };

    std::vector<std::function<bool()>> stages;
    switch (cfg.mode) {
        case Mode::Parallel:
        case Mode::SubproblemsSequential: {
            const bool par = cfg.mode == Mode::Parallel;
            const std::string label = mode_name(cfg.mode);
            stages.push_back([&, par, label] { return decomposed(cfg.gamma, par, label); });
            if (cfg.gamma_square_retry)
                stages.push_back([&, par, label] { return decomposed(cfg.gamma * cfg.gamma, par, label + " (gamma^2)"); });
            stages.push_back(sequential);
            stages.push_back(monolithic);
            break;
        }
        case Mode::SubgoalsSequential:
            stages.push_back(sequential);
            stages.push_back(monolithic);
            break;
        case Mode::Monolithic:
            stages.push_back(monolithic);
            break;
    }
    if (!cfg.fallback) stages.resize(1);
    for (size_t k = 0; k < stages.size(); ++k) {
        if (stages[k]()) {
            r.ok = true;
            r.fell_back = k > 0;
            break;
        }
    }
    r.plan.fell_back = r.fell_back;
    r.plan.sub_objects = r.sp_objects;
    if (!r.ok) {
        r.failure = "all planning paths failed:";
        for (const auto& a : r.attempts) r.failure += " [" + a + "]";
    }
    r.plan_ms = ms_since(t_start) - excluded_ms;
    r.plan.wall_ms = r.plan_ms;
    return r;
}

std::string global_plan_to_json(const GlobalPlan& plan, bool include_timing) {
    json j;
    j["mode"] = plan.mode;
    j["fell_back"] = plan.fell_back;
    j["horizon"] = plan.horizon();
    json sk = json::array();
    for (const auto& st : plan.skeleton) {
        json kp = json::array();
        for (const auto& p : st.key_poses) kp.push_back({p.x, p.y, p.z, p.yaw});
        sk.push_back({{"action", st.action}, {"args", st.args}, {"key_poses", kp}});
    }
    j["skeleton"] = sk;
    j["sub_horizons"] = plan.sub_horizons;
    j["sub_objects"] = plan.sub_objects;
    json tr = json::array();
    for (const auto& t : plan.trajectories) {
        const long last = static_cast<long>(t.size()) - 1;
        std::vector<double> a, b;
        for (long c = 0; c < t.y.cols(); ++c) {
            a.push_back(t.y(0, c));
            b.push_back(t.y(last, c));
        }
        tr.push_back({{"samples", t.size()}, {"start", a}, {"end", b}});
    }
    j["trajectories"] = tr;
    if (include_timing) j["wall_ms"] = plan.wall_ms;
    return j.dump(2);
}

}  // namespace ptamp
