#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ptamp/bench.hpp"

namespace py = pybind11;
using namespace ptamp;

namespace {

std::vector<std::vector<std::string>> subgoal_strings(const SubgoalSequence& sg) {
    std::vector<std::vector<std::string>> out;
    for (const auto& s : sg.subgoals) {
        out.emplace_back();
        for (const auto& a : s) out.back().push_back(a.str());
    }
    return out;
}

OfflineArtifacts offline(const std::string& task, int demos, std::uint64_t demo_seed, double min_support,
                         bool oracle, int epochs) {
    OfflineConfig cfg;
    cfg.demos = demos;
    cfg.demo_seed = demo_seed;
    cfg.min_support = min_support;
    cfg.train_model = !oracle;
    cfg.train.epochs = epochs;
    py::gil_scoped_release release;
    return build_artifacts(parse_task(task), cfg);
}

py::dict plan(const OfflineArtifacts& off, std::uint64_t seed, const std::string& mode, std::set<int> inject,
              bool fallback, bool motion, double gamma) {
    Instance inst = gen_instance(off.task, seed);
    PipelineConfig cfg;
    cfg.mode = parse_mode(mode);
    cfg.inject_failures = std::move(inject);
    cfg.fallback = fallback;
    cfg.motion = motion;
    cfg.gamma = gamma;
    cfg.solver.seed = derive_seed(seed, 1);
    cfg.decomp_seed = derive_seed(seed, 2);
    PipelineResult r;
    Validation v;
    {
        py::gil_scoped_release release;
        Artifacts art = online_artifacts(off, *inst.domain, inst.problem.object_types);
        r = run_pipeline(*inst.domain, inst.problem, inst.world, art, cfg);
        if (r.ok) v = validate_global(*inst.domain, inst.problem, inst.world, r.plan);
    }
    std::vector<std::string> steps;
    for (const auto& s : r.plan.skeleton) steps.push_back(s.str());
    py::dict d;
    d["ok"] = r.ok;
    d["valid"] = v.ok;
    d["mode"] = std::string(mode_name(r.mode_used));
    d["fell_back"] = r.fell_back;
    d["attempts"] = r.attempts;
    d["skeleton"] = steps;
    d["horizon"] = r.plan.horizon();
    d["sub_horizons"] = r.plan.sub_horizons;
    d["sub_objects"] = r.plan.sub_objects;
    d["trajectories"] = r.plan.trajectories.size();
    d["plan_ms"] = r.plan_ms;
    d["json"] = global_plan_to_json(r.plan, false);
    return d;
}

}  // namespace

PYBIND11_MODULE(ptamp, m) {
    m.doc() = "Learned task decomposition with parallel task and motion planning";

    py::register_exception<Error>(m, "PtampError", PyExc_ValueError);

    m.def("task_name", [](const std::string& t) { return parse_task(t).name(); });
    m.def("full_object_count", [](const std::string& t) { return full_object_count(parse_task(t)); });
    m.def("instance_pddl", [](const std::string& t, std::uint64_t seed) {
        return write_problem(gen_instance(parse_task(t), seed).problem);
    }, py::arg("task"), py::arg("seed") = 0);

    m.def("min_count", &min_count, py::arg("min_support"), py::arg("n"));
    m.def("prefixspan", [](const std::vector<Sequence>& db, double min_support) {
        std::vector<std::pair<Pattern, int>> out;
        for (auto& p : prefixspan(db, min_support)) out.emplace_back(std::move(p.elements), p.support);
        return out;
    }, py::arg("db"), py::arg("min_support"), "Frequent sequential patterns as (pattern, support) pairs.");

    py::class_<OfflineArtifacts>(m, "Artifacts")
        .def_property_readonly("task", [](const OfflineArtifacts& a) { return a.task.name(); })
        .def_property_readonly("subgoals", [](const OfflineArtifacts& a) { return subgoal_strings(a.subgoals); })
        .def_readonly("has_model", &OfflineArtifacts::has_model)
        .def_readonly("segments", &OfflineArtifacts::segments)
        .def_readonly("skipped_demos", &OfflineArtifacts::skipped_demos)
        .def("subgoals_json", [](const OfflineArtifacts& a) { return subgoals_to_json(a.subgoals); })
        .def("model_json", [](const OfflineArtifacts& a) {
            if (!a.has_model) throw Error("artifacts were built with the oracle");
            return model_to_json(a.model);
        });

    m.def("build_artifacts", &offline, py::arg("task"), py::arg("demos") = 100, py::arg("demo_seed") = 0,
          py::arg("min_support") = 0.9, py::arg("oracle") = false, py::arg("epochs") = 300,
          "Generate demonstrations, mine subgoals and (unless oracle) train the importance model.");

    m.def("plan", &plan, py::arg("artifacts"), py::arg("seed") = 0, py::arg("mode") = "parallel",
          py::arg("inject_failures") = std::set<int>{}, py::arg("fallback") = true, py::arg("motion") = false,
          py::arg("gamma") = 0.8, "Plan one generated instance; returns a summary dict.");

    py::class_<DmpModel>(m, "Dmp")
        .def_property_readonly("dofs", &DmpModel::dofs)
        .def_readonly("weights", &DmpModel::weights)
        .def_readonly("start", &DmpModel::y0)
        .def_readonly("goal", &DmpModel::goal)
        .def("rollout", [](const DmpModel& d, const Eigen::VectorXd& start, const Eigen::VectorXd& goal,
                           double duration, double dt) {
            return rollout(d, start, goal, duration, dt).y;
        }, py::arg("start"), py::arg("goal"), py::arg("duration") = 1.0, py::arg("dt") = 0.002)
        .def("to_json", &dmp_to_json);

    m.def("train_dmp", [](const std::vector<double>& t, const Eigen::MatrixXd& y) {
        if (t.size() != static_cast<size_t>(y.rows())) throw Error("t and y row counts differ");
        Trajectory tr;
        tr.t = t;
        tr.y = y;
        return train_dmp(tr);
    }, py::arg("t"), py::arg("y"), "Fit a DMP to a demonstration sampled at times t (rows of y).");

    m.def("minimum_jerk", [](const Eigen::VectorXd& from, const Eigen::VectorXd& to, double duration, int samples) {
        Trajectory tr = minimum_jerk(from, to, duration, samples);
        return py::make_tuple(tr.t, tr.y);
    }, py::arg("start"), py::arg("goal"), py::arg("duration") = 1.0, py::arg("samples") = 501);
}
