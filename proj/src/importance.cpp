#include "ptamp/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "json.hpp"

#include "ptamp/geometry.hpp"

namespace ptamp {

using Eigen::MatrixXd;
using nlohmann::json;

std::vector<Segment> segment_demos(const std::vector<Demonstration>& demos, const SubgoalSequence& subgoals,
                                   const Domain& domain, bool strict, std::vector<int>* skipped) {
    std::vector<Segment> out;
    for (const auto& d : demos) {
        if (d.steps.empty()) throw Error("demo " + std::to_string(d.id) + " has no steps");
        std::vector<Segment> mine;
        bool missed = false;
        int cur = 0;
        for (size_t i = 0; i < subgoals.size(); ++i) {
            int t = cur;
            while (t < static_cast<int>(d.steps.size())) {
                const auto& s = d.steps[static_cast<size_t>(t)];
                if (s.holds(domain.quiescent) && s.holds(subgoals.subgoals[i])) break;
                ++t;
            }
            if (t == static_cast<int>(d.steps.size())) {
                if (strict)
                    throw Error("demo " + std::to_string(d.id) + " never reaches subgoal " + std::to_string(i + 1));
                missed = true;
                break;
            }
            if (t > cur) {
                Segment seg;
                seg.demo_id = d.id;
                seg.start = cur;
                seg.end = t;
                seg.from = static_cast<int>(i);
                seg.to = static_cast<int>(i + 1);
                seg.states.assign(d.steps.begin() + cur, d.steps.begin() + t + 1);
                seg.types = d.types.empty() ? infer_types(d.steps.front(), domain) : d.types;
                mine.push_back(std::move(seg));
            }
            cur = t;
        }
        if (missed) {
            if (skipped) skipped->push_back(d.id);
            continue;
        }
        for (auto& seg : mine) out.push_back(std::move(seg));
    }
    return out;
}

std::set<std::string> label_important(const Segment& seg) {
    std::set<std::string> out;
    if (seg.states.empty()) return out;
    const WorldState& s0 = seg.states.front();
    for (const auto& o : s0.movables()) {
        const AtomSet a0 = s0.atoms_of(o);
        auto p0 = s0.poses.find(o);
        for (size_t k = 1; k < seg.states.size(); ++k) {
            const WorldState& s = seg.states[k];
            auto p = s.poses.find(o);
            bool pose_changed = (p0 == s0.poses.end()) != (p == s.poses.end()) ||
                                (p != s.poses.end() && !pose_near(p0->second, p->second));
            if (pose_changed || s.atoms_of(o) != a0) {
                out.insert(o);
                break;
            }
        }
    }
    return out;
}

std::map<std::string, std::string> infer_types(const WorldState& s, const Domain& domain) {
    std::map<std::string, std::string> types;
    for (const auto& o : s.objects) types[o] = s.is_fixture(o) ? "fixture" : "object";
    for (const auto& a : s.atoms) {
        if (!domain.has_predicate(a.pred)) continue;
        const auto& decl = domain.predicate(a.pred);
        for (size_t k = 0; k < a.args.size() && k < decl.arg_types.size(); ++k) {
            auto it = types.find(a.args[k]);
            if (it == types.end()) continue;
            if (domain.is_subtype(decl.arg_types[k], it->second)) it->second = decl.arg_types[k];
        }
    }
    return types;
}

std::set<std::string> forced_important(const WorldState& current, const AtomSet& subgoal, const Domain& domain) {
    std::set<std::string> out = held_objects(current, domain);
    auto movable = [&](const std::string& o) { return current.objects.count(o) && !current.is_fixture(o); };
    for (const auto& a : subgoal) {
        if (current.atoms.count(a)) continue;
        for (const auto& o : a.args)
            if (movable(o)) out.insert(o);
        // an object that must change support leaves its current base
        if (a.args.size() != 2 || !domain.is_support(a.pred)) continue;
        for (const auto& c : current.atoms)
            if (c.args.size() == 2 && c.args[0] == a.args[0] && domain.is_support(c.pred) && movable(c.args[1]))
                out.insert(c.args[1]);
    }
    return out;
}

FeatureLayout make_layout(const Domain& domain) {
    FeatureLayout l;
    l.domain = domain.name;
    for (const auto& p : domain.predicates) {
        const auto& t = p.arg_types;
        if (t.size() <= 1) {
            l.node_preds.push_back(p.name);
        } else {
            const bool f0 = domain.is_fixture_type(t[0]), f1 = domain.is_fixture_type(t[1]);
            if (!f0 && !f1) l.relations.push_back(p.name);
            else if (!f0) l.node_preds.push_back(p.name + "/0");
            else if (!f1) l.node_preds.push_back(p.name + "/1");
        }
    }
    std::set<std::string> types;
    for (const auto& [t, parent] : domain.type_parent)
        if (!domain.is_fixture_type(t) && t != "object") types.insert(t);
    l.types.assign(types.begin(), types.end());
    if (l.types.empty()) l.types.push_back("object");
    return l;
}

namespace {

int index_of(const std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

}  // namespace

GraphInput encode_graph(const FeatureLayout& layout, const Domain& domain, const WorldState& current,
                        const AtomSet& subgoal, const std::map<std::string, std::string>& types) {
    if (layout.domain != domain.name)
        throw Error("feature layout was built for domain '" + layout.domain + "', not '" + domain.name + "'");
    GraphInput g;
    g.nodes = current.movables();
    const int n = static_cast<int>(g.nodes.size());
    std::map<std::string, int> idx;
    for (int i = 0; i < n; ++i) idx[g.nodes[static_cast<size_t>(i)]] = i;
    const int np = static_cast<int>(layout.node_preds.size());
    const int nr = static_cast<int>(layout.relations.size());
    g.x = MatrixXd::Zero(n, layout.node_dim());
    g.adj.assign(static_cast<size_t>(layout.edge_dim()), MatrixXd::Zero(n, n));

    auto add_atoms = [&](const AtomSet& atoms, int node_off, int rel_off) {
        for (const auto& a : atoms) {
            if (!domain.has_predicate(a.pred)) throw Error("atom " + a.str() + " uses a predicate outside the layout");
            if (a.args.empty()) {
                int f = index_of(layout.node_preds, a.pred);
                if (f < 0) throw Error("feature layout lacks predicate " + a.pred);
                for (int i = 0; i < n; ++i) g.x(i, node_off + f) = 1;
            } else if (a.args.size() == 1) {
                int f = index_of(layout.node_preds, a.pred);
                if (f < 0) throw Error("feature layout lacks predicate " + a.pred);
                auto it = idx.find(a.args[0]);
                if (it != idx.end()) g.x(it->second, node_off + f) = 1;
            } else {
                auto i0 = idx.find(a.args[0]), i1 = idx.find(a.args[1]);
                if (i0 != idx.end() && i1 != idx.end()) {
                    int q = index_of(layout.relations, a.pred);
                    if (q < 0) throw Error("feature layout lacks relation " + a.pred);
                    // per relation: [cur in, cur out, goal in, goal out]
                    g.adj[static_cast<size_t>(rel_off + 4 * q)](i1->second, i0->second) = 1;
                    g.adj[static_cast<size_t>(rel_off + 4 * q + 1)](i0->second, i1->second) = 1;
                } else if (i0 != idx.end() || i1 != idx.end()) {
                    const int k = i0 != idx.end() ? 0 : 1;
                    int f = index_of(layout.node_preds, a.pred + "/" + std::to_string(k));
                    if (f < 0) throw Error("feature layout lacks predicate " + a.pred);
                    g.x(k == 0 ? i0->second : i1->second, node_off + f) = 1;
                }
            }
        }
    };
    add_atoms(current.atoms, 0, 0);
    add_atoms(subgoal, np, 2);

    const int toff = 2 * np;
    std::vector<Footprint> fps(static_cast<size_t>(n));
    std::vector<Pose> poses(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::string& o = g.nodes[static_cast<size_t>(i)];
        auto ti = types.find(o);
        const std::string type = ti == types.end() ? "object" : ti->second;
        int t = index_of(layout.types, type);
        if (t >= 0) g.x(i, toff + t) = 1;
        fps[static_cast<size_t>(i)] = domain.footprint_of(type);
        auto pi = current.poses.find(o);
        if (pi != current.poses.end()) poses[static_cast<size_t>(i)] = pi->second;
        const Pose& p = poses[static_cast<size_t>(i)];
        const int poff = toff + static_cast<int>(layout.types.size());
        g.x(i, poff) = p.x / 0.5;
        g.x(i, poff + 1) = p.y / 0.3;
        g.x(i, poff + 2) = p.z / 0.3;
        g.x(i, poff + 3) = p.yaw / std::numbers::pi;
        bool named = false, unsat = false;
        for (const auto& a : subgoal)
            if (a.mentions(o)) {
                named = true;
                if (!current.atoms.count(a)) unsat = true;
            }
        g.x(i, poff + 4) = named ? 1 : 0;
        g.x(i, poff + 5) = unsat ? 1 : 0;
    }
    const size_t above = static_cast<size_t>(4 * nr);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Pose &pi = poses[static_cast<size_t>(i)], &pj = poses[static_cast<size_t>(j)];
            const Footprint &fi = fps[static_cast<size_t>(i)], &fj = fps[static_cast<size_t>(j)];
            bool overlap = std::abs(pi.x - pj.x) < fi.dx + fj.dx && std::abs(pi.y - pj.y) < fi.dy + fj.dy;
            if (overlap && pj.z > pi.z + 1e-6) {
                g.adj[above](i, j) = 1;      // j sits above i
                g.adj[above + 1](j, i) = 1;  // i sits below j
            }
        }
    g.edge_sum = MatrixXd::Zero(n, layout.edge_dim());
    for (size_t r = 0; r < g.adj.size(); ++r) g.edge_sum.col(static_cast<long>(r)) = g.adj[r].rowwise().sum();
    return g;
}


std::vector<ImportanceSample> build_dataset(const std::vector<Segment>& segments, const SubgoalSequence& subgoals,
                                            const Domain& domain, const FeatureLayout& layout) {
    std::vector<ImportanceSample> out;
    for (const auto& seg : segments) {
        const WorldState& s0 = seg.states.front();
        const AtomSet& goal = subgoals.subgoals.at(static_cast<size_t>(seg.to - 1));
        ImportanceSample smp;
        smp.graph = encode_graph(layout, domain, s0, goal, seg.types);
        auto imp = label_important(seg);
        smp.labels = Eigen::VectorXd::Zero(static_cast<long>(smp.graph.nodes.size()));
        for (size_t i = 0; i < smp.graph.nodes.size(); ++i)
            if (imp.count(smp.graph.nodes[i])) smp.labels(static_cast<long>(i)) = 1;
        out.push_back(std::move(smp));
    }
    return out;
}

std::vector<std::pair<std::string, MatrixXd*>> GnnModel::tensors() {
    std::vector<std::pair<std::string, MatrixXd*>> t;
    for (size_t l = 0; l < layers.size(); ++l) {
        auto& L = layers[l];
        const std::string p = "layer" + std::to_string(l) + ".";
        t.emplace_back(p + "w_self", &L.w_self);
        for (size_t r = 0; r < L.w_edge.size(); ++r) t.emplace_back(p + "w_edge" + std::to_string(r), &L.w_edge[r]);
        t.emplace_back(p + "w_attr", &L.w_attr);
        t.emplace_back(p + "b_msg", &L.b_msg);
        t.emplace_back(p + "w_h", &L.w_h);
        t.emplace_back(p + "w_a", &L.w_a);
        t.emplace_back(p + "b_up", &L.b_up);
    }
    t.emplace_back("w_out", &w_out);
    t.emplace_back("b_out", &b_out);
    return t;
}

std::size_t GnnModel::parameter_count() {
    std::size_t n = 0;
    for (auto& [name, m] : tensors()) n += static_cast<std::size_t>(m->size());
    return n;
}

GnnModel init_model(const FeatureLayout& layout, int layers, int width, std::uint64_t seed) {
    if (layers < 1 || width < 1) throw Error("model needs at least one layer of positive width");
    GnnModel m;
    m.layout = layout;
    m.width = width;
    Rng rng(seed);
    auto xavier = [&](int rows, int cols) {
        const double a = std::sqrt(6.0 / (rows + cols));
        std::uniform_real_distribution<double> u(-a, a);
        MatrixXd w(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) w(i, j) = u(rng);
        return w;
    };
    const int R = layout.edge_dim();
    int din = layout.node_dim();
    for (int l = 0; l < layers; ++l) {
        GnnLayer L;
        L.w_self = xavier(width, din);
        for (int r = 0; r < R; ++r) L.w_edge.push_back(xavier(width, din));
        L.w_attr = xavier(width, R);
        L.b_msg = MatrixXd::Zero(width, 1);
        L.w_h = xavier(width, din);
        L.w_a = xavier(width, width);
        L.b_up = MatrixXd::Zero(width, 1);
        m.layers.push_back(std::move(L));
        din = width;
    }
    m.w_out = xavier(width, 1);
    m.b_out = MatrixXd::Zero(1, 1);
    return m;
}

namespace {

struct Cache {
    std::vector<MatrixXd> h;    // h[0] = x, h[l+1] = output of layer l
    std::vector<MatrixXd> agg;  // pre-update aggregate per layer
    Eigen::VectorXd logits;
};

Cache run(const GnnModel& m, const GraphInput& g) {
    if (g.x.cols() != m.layout.node_dim() || static_cast<int>(g.adj.size()) != m.layout.edge_dim())
        throw Error("graph features do not match the model's layout");
    Cache c;
    const long n = g.x.rows();
    c.h.push_back(g.x);
    for (const auto& L : m.layers) {
        const MatrixXd& hin = c.h.back();
        MatrixXd others = hin.colwise().sum().replicate(n, 1) - hin;
        MatrixXd a = others * L.w_self.transpose() + g.edge_sum * L.w_attr.transpose();
        a.rowwise() += static_cast<double>(n - 1) * L.b_msg.col(0).transpose();
        for (size_t r = 0; r < L.w_edge.size(); ++r)
            if (!g.adj[r].isZero()) a += g.adj[r] * hin * L.w_edge[r].transpose();
        MatrixXd z = hin * L.w_h.transpose() + a * L.w_a.transpose();
        z.rowwise() += L.b_up.col(0).transpose();
        c.agg.push_back(std::move(a));
        c.h.push_back(z.array().tanh().matrix());
    }
    c.logits = (c.h.back() * m.w_out).col(0).array() + m.b_out(0, 0);
    return c;
}

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

Eigen::VectorXd forward(const GnnModel& m, const GraphInput& g) {
    Cache c = run(m, g);
    // |z| = 36 keeps the score strictly inside (0, 1) in double precision
    return c.logits.unaryExpr([](double z) { return sigmoid(std::clamp(z, -36.0, 36.0)); });
}

double loss_and_grad(GnnModel& m, const std::vector<ImportanceSample>& data, std::vector<MatrixXd>* grads) {
    auto tens = m.tensors();
    if (grads) {
        grads->clear();
        for (auto& [name, t] : tens) grads->push_back(MatrixXd::Zero(t->rows(), t->cols()));
    }
    long total = 0;
    for (const auto& s : data) total += s.labels.size();
    if (total == 0) throw Error("dataset has no labeled nodes");
    const double inv = 1.0 / static_cast<double>(total);
    double loss = 0;
    for (const auto& s : data) {
        Cache c = run(m, s.graph);
        const long n = s.graph.x.rows();
        for (long i = 0; i < n; ++i) loss += (softplus(c.logits(i)) - s.labels(i) * c.logits(i)) * inv;
        if (!grads) continue;
        Eigen::VectorXd dlogit(n);
        for (long i = 0; i < n; ++i) dlogit(i) = (sigmoid(c.logits(i)) - s.labels(i)) * inv;
        auto& G = *grads;
        size_t gi = G.size() - 2;
        G[gi] += c.h.back().transpose() * dlogit;
        G[gi + 1](0, 0) += dlogit.sum();
        MatrixXd dh = dlogit * m.w_out.transpose();
        size_t off = 0;
        std::vector<size_t> offs;
        for (const auto& L : m.layers) {
            offs.push_back(off);
            off += 6 + L.w_edge.size();
        }
        for (size_t l = m.layers.size(); l-- > 0;) {
            const auto& L = m.layers[l];
            const MatrixXd& hin = c.h[l];
            const MatrixXd& hout = c.h[l + 1];
            MatrixXd dz = (dh.array() * (1.0 - hout.array().square())).matrix();
            const size_t R = L.w_edge.size();
            const size_t o = offs[l];
            // order: w_self, w_edge[R], w_attr, b_msg, w_h, w_a, b_up
            G[o + R + 3] += dz.transpose() * hin;
            G[o + R + 4] += dz.transpose() * c.agg[l];
            G[o + R + 5] += dz.colwise().sum().transpose();
            MatrixXd da = dz * L.w_a;
            MatrixXd dhin = dz * L.w_h;
            MatrixXd others = hin.colwise().sum().replicate(n, 1) - hin;
            G[o] += da.transpose() * others;
            MatrixXd dw = da * L.w_self;
            dhin += dw.colwise().sum().replicate(n, 1) - dw;
            for (size_t r = 0; r < R; ++r) {
                if (s.graph.adj[r].isZero()) continue;
                G[o + 1 + r] += da.transpose() * (s.graph.adj[r] * hin);
                dhin += s.graph.adj[r].transpose() * (da * L.w_edge[r]);
            }
            G[o + R + 1] += da.transpose() * s.graph.edge_sum;
            G[o + R + 2] += static_cast<double>(n - 1) * da.colwise().sum().transpose();
            dh = std::move(dhin);
        }
    }
    return loss;
}

GnnModel train_gnn(const std::vector<ImportanceSample>& data, const FeatureLayout& layout, const TrainConfig& cfg,
                   int layers, int width) {
    if (data.empty()) throw Error("training set is empty");
    for (const auto& s : data)
        if (!s.graph.x.allFinite()) throw Error("training features are not finite");
    GnnModel m = init_model(layout, layers, width, cfg.seed);
    m.train = cfg;
    auto tens = m.tensors();
    std::vector<MatrixXd> mom, vel, grads;
    for (auto& [name, t] : tens) {
        mom.push_back(MatrixXd::Zero(t->rows(), t->cols()));
        vel.push_back(MatrixXd::Zero(t->rows(), t->cols()));
    }
    for (int e = 1; e <= cfg.epochs; ++e) {
        double loss = loss_and_grad(m, data, &grads);
        if (!std::isfinite(loss)) throw Error("non-finite loss at epoch " + std::to_string(e));
        m.loss_curve.push_back(loss);
        const double c1 = 1 - std::pow(cfg.beta1, e), c2 = 1 - std::pow(cfg.beta2, e);
        for (size_t k = 0; k < tens.size(); ++k) {
            mom[k] = cfg.beta1 * mom[k] + (1 - cfg.beta1) * grads[k];
            vel[k] = cfg.beta2 * vel[k] + (1 - cfg.beta2) * grads[k].cwiseAbs2();
            *tens[k].second -= (cfg.lr * (mom[k] / c1).array() / ((vel[k] / c2).array().sqrt() + cfg.eps)).matrix();
        }
    }
    m.loss_curve.push_back(loss_and_grad(m, data, nullptr));
    return m;
}

GradCheck gradient_check(GnnModel& m, const std::vector<ImportanceSample>& data, double eps) {
    GradCheck gc;
    std::vector<MatrixXd> grads;
    loss_and_grad(m, data, &grads);
    auto tens = m.tensors();
    for (size_t k = 0; k < tens.size(); ++k) {
        MatrixXd& t = *tens[k].second;
        MatrixXd num(t.rows(), t.cols());
        for (long i = 0; i < t.size(); ++i) {
            double& w = t.data()[i];
            const double keep = w;
            w = keep + eps;
            const double lp = loss_and_grad(m, data, nullptr);
            w = keep - eps;
            const double lm = loss_and_grad(m, data, nullptr);
            w = keep;
            num.data()[i] = (lp - lm) / (2 * eps);
        }
        const double denom = grads[k].norm() + num.norm();
        const double rel = denom > 0 ? (grads[k] - num).norm() / denom : 0.0;
        gc.per_tensor[tens[k].first] = rel;
        gc.max_abs_error = std::max(gc.max_abs_error, (grads[k] - num).cwiseAbs().maxCoeff());
        if (rel >= gc.max_rel_error) {
            gc.max_rel_error = rel;
            gc.worst_tensor = tens[k].first;
        }
    }
    return gc;
}

std::map<std::string, double> scores(const GnnModel& m, const Domain& domain, const WorldState& current,
                                     const AtomSet& subgoal, const std::map<std::string, std::string>& types) {
    if (!(make_layout(domain) == m.layout)) throw Error("model layout does not match domain '" + domain.name + "'");
    GraphInput g = encode_graph(m.layout, domain, current, subgoal, types);
    Eigen::VectorXd s = forward(m, g);
    std::map<std::string, double> out;
    for (size_t i = 0; i < g.nodes.size(); ++i) out[g.nodes[i]] = s(static_cast<long>(i));
    return out;
}

std::set<std::string> predict(const GnnModel& m, const Domain& domain, const WorldState& current,
                              const AtomSet& subgoal, double gamma, const std::map<std::string, std::string>& types) {
    if (!(gamma > 0 && gamma < 1)) throw Error("importance threshold must lie in (0, 1)");
    std::set<std::string> out = forced_important(current, subgoal, domain);
    if (current.holds(subgoal)) return out;
    for (const auto& [o, s] : scores(m, domain, current, subgoal, types))
        if (s > gamma) out.insert(o);
    return out;
}

std::set<std::string> oracle_predict(const Domain& domain, const WorldState& current, const AtomSet& subgoal,
                                     const std::map<std::string, std::string>& types, const SolverConfig& cfg) {
    if (current.holds(subgoal)) return {};
    ProblemSpec p;
    p.name = "oracle";
    p.domain_name = domain.name;
    for (const auto& o : current.objects) {
        p.object_order.push_back(o);
        auto it = types.find(o);
        if (it == types.end()) throw Error("oracle needs the type of '" + o + "'");
        p.object_types[o] = it->second;
    }
    p.init = current;
    p.goal = subgoal;
    SolverConfig c = cfg;
    c.bind_geometry = false;
    c.record_states = true;
    SolveResult r = solve(domain, p, make_world(domain, p), c);
    if (!r.ok()) throw Error(std::string("oracle solve failed: ") + status_name(r.status));
    Segment seg;
    seg.states = r.plan.states;
    // geometry is not bound here, so poses carry no signal; compare atoms only
    for (auto& s : seg.states) s.poses = current.poses;
    return label_important(seg);
}

namespace {

json mat_json(const MatrixXd& m) {
    json j;
    j["shape"] = {m.rows(), m.cols()};
    std::vector<double> v;
    for (long i = 0; i < m.rows(); ++i)
        for (long k = 0; k < m.cols(); ++k) v.push_back(m(i, k));
    j["values"] = v;
    return j;
}

MatrixXd mat_from(const json& j) {
    const long r = j.at("shape").at(0).get<long>(), c = j.at("shape").at(1).get<long>();
    const auto v = j.at("values").get<std::vector<double>>();
    if (static_cast<long>(v.size()) != r * c) throw Error("tensor values do not match its shape");
    MatrixXd m(r, c);
    for (long i = 0; i < r; ++i)
        for (long k = 0; k < c; ++k) m(i, k) = v[static_cast<size_t>(i * c + k)];
    return m;
}

}  // namespace

std::string model_to_json(const GnnModel& mc) {
    GnnModel m = mc;
    json j;
    j["version"] = 1;
    j["layout"] = {{"domain", m.layout.domain},
                   {"node_preds", m.layout.node_preds},
                   {"relations", m.layout.relations},
                   {"types", m.layout.types}};
    j["layers"] = m.layers.size();
    j["width"] = m.width;
    j["train"] = {{"epochs", m.train.epochs}, {"lr", m.train.lr}, {"seed", m.train.seed}};
    j["loss_curve"] = m.loss_curve;
    json t = json::object();
    for (auto& [name, mat] : m.tensors()) t[name] = mat_json(*mat);
    j["tensors"] = t;
    return j.dump();
}

GnnModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("version", 0) != 1) throw Error("unsupported model version");
    FeatureLayout l;
    l.domain = j.at("layout").at("domain").get<std::string>();
    l.node_preds = j.at("layout").at("node_preds").get<std::vector<std::string>>();
    l.relations = j.at("layout").at("relations").get<std::vector<std::string>>();
    l.types = j.at("layout").at("types").get<std::vector<std::string>>();
    GnnModel m = init_model(l, j.at("layers").get<int>(), j.at("width").get<int>(), 0);
    m.train.epochs = j.at("train").value("epochs", 300);
    m.train.lr = j.at("train").value("lr", 1e-3);
    m.train.seed = j.at("train").value("seed", std::uint64_t{0});
    m.loss_curve = j.value("loss_curve", std::vector<double>{});
    for (auto& [name, mat] : m.tensors()) {
        MatrixXd v = mat_from(j.at("tensors").at(name));
        if (v.rows() != mat->rows() || v.cols() != mat->cols()) throw Error("tensor " + name + " has the wrong shape");
        *mat = v;
    }
    return m;
}

std::map<std::string, AtomSet> learn_completion_templates(const std::vector<Segment>& segments,
                                                          const SubgoalSequence& subgoals, const Domain& domain) {
    std::map<std::string, std::map<AtomSet, int>> votes;
    for (const auto& seg : segments) {
        const AtomSet& goal = subgoals.subgoals.at(static_cast<size_t>(seg.to - 1));
        const WorldState& end = seg.states.back();
        for (const auto& o : label_important(seg)) {
            bool named = false;
            for (const auto& a : goal) named = named || a.mentions(o);
            if (named) continue;
            AtomSet tmpl;
            bool relational = false;
            for (const auto& a : end.atoms_of(o)) {
                if (!domain.is_fluent(a.pred)) continue;
                Atom t = a;
                for (auto& arg : t.args) {
                    if (arg == o) arg = "?o";
                    else if (!end.is_fixture(arg)) relational = true;
                }
                tmpl.insert(t);
            }
            auto ti = seg.types.find(o);
            if (!relational) ++votes[ti == seg.types.end() ? "object" : ti->second][tmpl];
        }
    }
    auto surface_support = [&](const AtomSet& t) {
        for (const auto& a : t)
            if (domain.is_support(a.pred) && a.args.size() == 2 && a.args[0] == "?o") return true;
        return false;
    };
    std::map<std::string, AtomSet> out;
    for (const auto& [type, tally] : votes) {
        const AtomSet* best = nullptr;
        int best_n = -1;
        for (const auto& [t, n] : tally) {
            if (n > best_n || (n == best_n && surface_support(t) && !surface_support(*best))) {
                best = &t;
                best_n = n;
            }
        }
        out[type] = *best;
    }
    return out;
}

}  // namespace ptamp
