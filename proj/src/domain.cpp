#include "ptamp/domain.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>

namespace ptamp {

namespace {

struct Sexp {
    bool is_list = false;
    std::string sym;
    std::vector<Sexp> items;
    int line = 1, col = 1;
};

class Reader {
public:
    explicit Reader(const std::string& text) : t_(text) {}

    Sexp read_top() {
        skip();
        if (i_ >= t_.size()) throw ParseError(line_, col_, "empty input");
        Sexp s = read();
        skip();
        if (i_ < t_.size()) throw ParseError(line_, col_, "trailing text after top-level form");
        return s;
    }

private:
    void adv() {
        if (t_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }
    void skip() {
        while (i_ < t_.size()) {
            char c = t_[i_];
            if (c == ';') {
                while (i_ < t_.size() && t_[i_] != '\n') adv();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                adv();
            } else {
                break;
            }
        }
    }
    Sexp read() {
        skip();
        if (i_ >= t_.size()) throw ParseError(line_, col_, "unexpected end of input");
        Sexp s;
        s.line = line_;
        s.col = col_;
        char c = t_[i_];
        if (c == ')') throw ParseError(line_, col_, "unexpected ')'");
        if (c == '(') {
            s.is_list = true;
            adv();
            for (;;) {
                skip();
                if (i_ >= t_.size()) throw ParseError(s.line, s.col, "unclosed '('");
                if (t_[i_] == ')') {
                    adv();
                    break;
                }
                s.items.push_back(read());
            }
            return s;
        }
        while (i_ < t_.size()) {
            c = t_[i_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';')
                break;
            s.sym += c;
            adv();
        }
        return s;
    }

    const std::string& t_;
    size_t i_ = 0;
    int line_ = 1, col_ = 1;
};

[[noreturn]] void fail(const Sexp& at, const std::string& msg) {
    throw ParseError(at.line, at.col, msg);
}

bool is_sym(const Sexp& s, const char* v) { return !s.is_list && s.sym == v; }

const std::string& sym(const Sexp& s, const char* what) {
    if (s.is_list) fail(s, std::string("expected ") + what);
    return s.sym;
}

// Parses "a b - t c - u" into (name, type) pairs; untyped names get "object".
std::vector<std::pair<std::string, std::string>> typed_list(const std::vector<Sexp>& items,
                                                            size_t from) {
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::string> pending;
    for (size_t k = from; k < items.size(); ++k) {
        const Sexp& it = items[k];
        const std::string& s = sym(it, "name");
        if (s == "-") {
            if (k + 1 >= items.size()) fail(it, "missing type after '-'");
            const std::string& ty = sym(items[k + 1], "type");
            for (auto& p : pending) out.emplace_back(p, ty);
            pending.clear();
            ++k;
        } else {
            pending.push_back(s);
        }
    }
    for (auto& p : pending) out.emplace_back(p, "object");
    return out;
}

double number(const Sexp& s) {
    const std::string& v = sym(s, "number");
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) fail(s, "bad number '" + v + "'");
        return d;
    } catch (const std::logic_error&) {
        fail(s, "bad number '" + v + "'");
    }
}

// (and l1 l2 ...) or a single literal.
std::vector<const Sexp*> conjuncts(const Sexp& s) {
    std::vector<const Sexp*> out;
    if (s.is_list && !s.items.empty() && is_sym(s.items[0], "and")) {
        for (size_t k = 1; k < s.items.size(); ++k) out.push_back(&s.items[k]);
    } else if (s.is_list && !s.items.empty()) {
        out.push_back(&s);
    } else if (!s.is_list || !s.items.empty()) {
        fail(s, "expected a conjunction");
    }
    return out;
}

Atom atom_of(const Sexp& s) {
    if (!s.is_list || s.items.empty()) fail(s, "expected an atom");
    Atom a;
    a.pred = sym(s.items[0], "predicate name");
    for (size_t k = 1; k < s.items.size(); ++k) a.args.push_back(sym(s.items[k], "argument"));
    return a;
}

Literal literal_of(const Sexp& s) {
    if (s.is_list && !s.items.empty() && is_sym(s.items[0], "not")) {
        if (s.items.size() != 2) fail(s, "'not' takes one atom");
        return Literal{atom_of(s.items[1]), true};
    }
    return Literal{atom_of(s), false};
}

void check_decl_atom(const Domain& d, const Sexp& at, const Atom& a,
                     const std::map<std::string, std::string>& var_types) {
    if (!d.has_predicate(a.pred)) fail(at, "unknown predicate '" + a.pred + "'");
    const auto& decl = d.predicate(a.pred);
    if (decl.arg_types.size() != a.args.size())
        fail(at, "arity mismatch for '" + a.pred + "': expected " +
                     std::to_string(decl.arg_types.size()) + ", got " +
                     std::to_string(a.args.size()));
    for (size_t k = 0; k < a.args.size(); ++k) {
        auto it = var_types.find(a.args[k]);
        if (it == var_types.end()) fail(at, "unknown parameter '" + a.args[k] + "'");
        if (!d.is_subtype(it->second, decl.arg_types[k]))
            fail(at, "type mismatch for '" + a.args[k] + "' in '" + a.pred + "'");
    }
}

}  // namespace

ParseError::ParseError(int l, int c, const std::string& msg)
    : Error("line " + std::to_string(l) + ", col " + std::to_string(c) + ": " + msg),
      line(l),
      col(c) {}

const char* motion_name(MotionKind k) {
    switch (k) {
        case MotionKind::Grasp: return "grasp";
        case MotionKind::Place: return "place";
        case MotionKind::Visit: return "visit";
        case MotionKind::Touch: return "touch";
    }
    return "touch";
}

bool Domain::is_subtype(const std::string& type, const std::string& ancestor) const {
    std::string t = type;
    for (int guard = 0; guard < 64; ++guard) {
        if (t == ancestor) return true;
        auto it = type_parent.find(t);
        if (it == type_parent.end()) return ancestor == "object";
        t = it->second;
    }
    return false;
}

bool Domain::is_fixture_type(const std::string& type) const { return is_subtype(type, "fixture") && type != "object"; }

bool Domain::is_surface_type(const std::string& type) const {
    for (const auto& s : surface_types)
        if (is_subtype(type, s)) return true;
    return false;
}

bool Domain::is_support(const std::string& pred) const {
    return std::find(support_preds.begin(), support_preds.end(), pred) != support_preds.end();
}

bool Domain::is_holding(const std::string& pred) const {
    return std::find(holding_preds.begin(), holding_preds.end(), pred) != holding_preds.end();
}

bool Domain::has_predicate(const std::string& name) const {
    for (const auto& p : predicates)
        if (p.name == name) return true;
    return false;
}

const PredicateDecl& Domain::predicate(const std::string& name) const {
    for (const auto& p : predicates)
        if (p.name == name) return p;
    throw Error("unknown predicate '" + name + "'");
}

bool Domain::is_fluent(const std::string& pred) const { return predicate(pred).fluent; }

const ActionSchema& Domain::action(const std::string& name) const {
    for (const auto& a : actions)
        if (a.name == name) return a;
    throw Error("unknown action '" + name + "'");
}

Footprint Domain::footprint_of(const std::string& type) const {
    std::string t = type;
    for (int guard = 0; guard < 64; ++guard) {
        auto f = footprints.find(t);
        if (f != footprints.end()) return f->second;
        auto it = type_parent.find(t);
        if (it == type_parent.end()) break;
        t = it->second;
    }
    return Footprint{};
}

std::vector<std::pair<std::string, std::string>> ProblemSpec::typed_objects() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& o : object_order) out.emplace_back(o, object_types.at(o));
    return out;
}

std::string ProblemSpec::surface_object(const Domain& d) const {
    for (const auto& o : object_order)
        if (d.is_surface_type(object_types.at(o))) return o;
    return "";
}

std::string GroundAction::str() const {
    std::string s = "(" + name;
    for (const auto& a : args) s += " " + a;
    return s + ")";
}

Domain parse_domain(const std::string& text) {
    Sexp top = Reader(text).read_top();
    if (!top.is_list || top.items.size() < 2 || !is_sym(top.items[0], "define"))
        fail(top, "expected (define (domain ...) ...)");
    Domain d;
    const Sexp& head = top.items[1];
    if (!head.is_list || head.items.size() != 2 || !is_sym(head.items[0], "domain"))
        fail(head, "expected (domain name)");
    d.name = sym(head.items[1], "domain name");

    std::vector<const Sexp*> action_forms;
    for (size_t k = 2; k < top.items.size(); ++k) {
        const Sexp& sec = top.items[k];
        if (!sec.is_list || sec.items.empty()) fail(sec, "expected a section");
        const std::string& key = sym(sec.items[0], "section keyword");
        if (key == ":types") {
            for (auto& [t, parent] : typed_list(sec.items, 1)) {
                if (t == "object" || t == "fixture") fail(sec, "cannot redeclare builtin type " + t);
                d.type_parent[t] = parent;
            }
        } else if (key == ":predicates") {
            for (size_t j = 1; j < sec.items.size(); ++j) {
                const Sexp& p = sec.items[j];
                if (!p.is_list || p.items.empty()) fail(p, "expected a predicate declaration");
                PredicateDecl decl;
                decl.name = sym(p.items[0], "predicate name");
                if (d.has_predicate(decl.name)) fail(p, "duplicate predicate '" + decl.name + "'");
                for (auto& [v, ty] : typed_list(p.items, 1)) {
                    (void)v;
                    decl.arg_types.push_back(ty);
                }
                if (decl.arg_types.size() > 2) fail(p, "predicates take at most two arguments");
                d.predicates.push_back(decl);
            }
        } else if (key == ":footprints") {
            for (size_t j = 1; j < sec.items.size(); ++j) {
                const Sexp& f = sec.items[j];
                if (!f.is_list || f.items.size() != 4) fail(f, "expected (type dx dy dz)");
                Footprint fp{number(f.items[1]), number(f.items[2]), number(f.items[3])};
                if (fp.dx <= 0 || fp.dy <= 0 || fp.dz <= 0) fail(f, "footprint must be positive");
                d.footprints[sym(f.items[0], "type")] = fp;
            }
        } else if (key == ":surface" || key == ":support" || key == ":holding") {
            auto& dst = key == ":surface" ? d.surface_types
                        : key == ":support" ? d.support_preds
                                            : d.holding_preds;
            for (size_t j = 1; j < sec.items.size(); ++j) dst.push_back(sym(sec.items[j], "name"));
        } else if (key == ":quiescent") {
            for (size_t j = 1; j < sec.items.size(); ++j) d.quiescent.insert(atom_of(sec.items[j]));
        } else if (key == ":action") {
            action_forms.push_back(&sec);
        } else if (key == ":requirements") {
            // accepted and ignored
        } else {
            fail(sec, "unsupported section '" + key + "'");
        }
    }

    for (const Sexp* af : action_forms) {
        const Sexp& sec = *af;
        if (sec.items.size() < 2) fail(sec, "action needs a name");
        ActionSchema a;
        a.name = sym(sec.items[1], "action name");
        for (const auto& other : d.actions)
            if (other.name == a.name) fail(sec, "duplicate action '" + a.name + "'");
        std::map<std::string, std::string> var_types;
        std::string motion_override;
        for (size_t j = 2; j < sec.items.size(); ++j) {
            const std::string& key = sym(sec.items[j], "action keyword");
            if (j + 1 >= sec.items.size()) fail(sec.items[j], "missing value for " + key);
            const Sexp& val = sec.items[++j];
            if (key == ":parameters") {
                if (!val.is_list) fail(val, "expected parameter list");
                for (auto& [v, ty] : typed_list(val.items, 0)) {
                    if (v.empty() || v[0] != '?') fail(val, "parameter must start with '?'");
                    if (ty != "object" && !d.type_parent.count(ty)) fail(val, "unknown type '" + ty + "'");
                    if (var_types.count(v)) fail(val, "duplicate parameter " + v);
                    a.params.push_back({v, ty});
                    var_types[v] = ty;
                }
            } else if (key == ":precondition") {
                for (const Sexp* c : conjuncts(val)) {
                    Literal l = literal_of(*c);
                    check_decl_atom(d, *c, l.atom, var_types);
                    a.pre.push_back(l);
                }
            } else if (key == ":effect") {
                for (const Sexp* c : conjuncts(val)) {
                    Literal l = literal_of(*c);
                    check_decl_atom(d, *c, l.atom, var_types);
                    (l.negated ? a.del : a.add).push_back(l.atom);
                }
            } else if (key == ":motion") {
                motion_override = sym(val, "motion kind");
            } else {
                fail(sec.items[j - 1], "unsupported action keyword '" + key + "'");
            }
        }
        for (const auto& x : a.add)
            for (const auto& y : a.del)
                if (x == y) fail(sec, "action '" + a.name + "' adds and deletes " + x.str());

        auto param_index = [&](const std::string& v) {
            for (size_t k = 0; k < a.params.size(); ++k)
                if (a.params[k].name == v) return static_cast<int>(k);
            return -1;
        };
        bool set = false;
        for (const auto& e : a.add)
            if (d.is_support(e.pred) && e.args.size() == 2) {
                a.motion = MotionKind::Place;
                a.motion_arg = param_index(e.args[0]);
                a.base_arg = param_index(e.args[1]);
                set = true;
                break;
            }
        if (!set)
            for (const auto& e : a.add)
                if (d.is_holding(e.pred) && e.args.size() == 1) {
                    a.motion = MotionKind::Grasp;
                    a.motion_arg = param_index(e.args[0]);
                    for (const auto& x : a.del)
                        if (d.is_support(x.pred) && x.args.size() == 2 && x.args[0] == e.args[0])
                            a.base_arg = param_index(x.args[1]);
                    set = true;
                    break;
                }
        if (!set)
            for (size_t k = 0; k < a.params.size(); ++k)
                if (d.is_fixture_type(a.params[k].type)) {
                    a.motion = MotionKind::Visit;
                    a.base_arg = static_cast<int>(k);
                    a.motion_arg = k == 0 ? (a.params.size() > 1 ? 1 : 0) : 0;
                    set = true;
                    break;
                }
        if (!set) {
            a.motion = MotionKind::Touch;
            a.motion_arg = 0;
        }
        if (!motion_override.empty()) {
            if (motion_override == "grasp") a.motion = MotionKind::Grasp;
            else if (motion_override == "place") a.motion = MotionKind::Place;
            else if (motion_override == "visit") a.motion = MotionKind::Visit;
            else if (motion_override == "touch") a.motion = MotionKind::Touch;
            else fail(sec, "unknown motion kind '" + motion_override + "'");
        }
        d.actions.push_back(std::move(a));
    }

    for (auto& p : d.predicates)
        for (const auto& a : d.actions) {
            for (const auto& e : a.add) p.fluent = p.fluent || e.pred == p.name;
            for (const auto& e : a.del) p.fluent = p.fluent || e.pred == p.name;
        }
    for (const auto& q : d.quiescent)
        if (!d.has_predicate(q.pred) || !q.args.empty())
            throw Error("quiescent atoms must be declared nullary predicates: " + q.str());
    return d;
}

void check_atom(const Domain& d, const std::map<std::string, std::string>& object_types,
                const Atom& a) {
    if (!d.has_predicate(a.pred)) throw Error("unknown predicate '" + a.pred + "'");
    const auto& decl = d.predicate(a.pred);
    if (decl.arg_types.size() != a.args.size())
        throw Error("arity mismatch in " + a.str() + ": expected " +
                    std::to_string(decl.arg_types.size()));
    for (size_t k = 0; k < a.args.size(); ++k) {
        auto it = object_types.find(a.args[k]);
        if (it == object_types.end()) throw Error("unknown object '" + a.args[k] + "' in " + a.str());
        if (!d.is_subtype(it->second, decl.arg_types[k]))
            throw Error("type mismatch for '" + a.args[k] + "' in " + a.str());
    }
}

ProblemSpec parse_problem(const std::string& text, const Domain& domain) {
    Sexp top = Reader(text).read_top();
    if (!top.is_list || top.items.size() < 2 || !is_sym(top.items[0], "define"))
        fail(top, "expected (define (problem ...) ...)");
    ProblemSpec p;
    const Sexp& head = top.items[1];
    if (!head.is_list || head.items.size() != 2 || !is_sym(head.items[0], "problem"))
        fail(head, "expected (problem name)");
    p.name = sym(head.items[1], "problem name");
    p.domain_name = domain.name;

    const Sexp* init = nullptr;
    const Sexp* goal = nullptr;
    for (size_t k = 2; k < top.items.size(); ++k) {
        const Sexp& sec = top.items[k];
        if (!sec.is_list || sec.items.empty()) fail(sec, "expected a section");
        const std::string& key = sym(sec.items[0], "section keyword");
        if (key == ":domain") {
            if (sec.items.size() != 2) fail(sec, "expected (:domain name)");
            if (sym(sec.items[1], "domain name") != domain.name)
                fail(sec, "problem is for domain '" + sec.items[1].sym + "', not '" + domain.name + "'");
        } else if (key == ":objects") {
            for (auto& [o, ty] : typed_list(sec.items, 1)) {
                if (ty != "object" && !domain.type_parent.count(ty)) fail(sec, "unknown type '" + ty + "'");
                if (p.object_types.count(o)) fail(sec, "duplicate object '" + o + "'");
                p.object_order.push_back(o);
                p.object_types[o] = ty;
            }
        } else if (key == ":init") {
            init = &sec;
        } else if (key == ":goal") {
            goal = &sec;
        } else {
            fail(sec, "unsupported section '" + key + "'");
        }
    }

    for (const auto& o : p.object_order) {
        p.init.objects.insert(o);
        if (domain.is_fixture_type(p.object_types[o])) p.init.fixtures.insert(o);
    }
    if (init) {
        for (size_t j = 1; j < init->items.size(); ++j) {
            const Sexp& it = init->items[j];
            if (it.is_list && !it.items.empty() && is_sym(it.items[0], ":poses")) {
                p.poses_given = true;
                for (size_t q = 1; q < it.items.size(); ++q) {
                    const Sexp& ps = it.items[q];
                    if (!ps.is_list || ps.items.size() != 5) fail(ps, "expected (obj x y z yaw)");
                    const std::string& o = sym(ps.items[0], "object");
                    if (!p.object_types.count(o)) fail(ps, "unknown object '" + o + "'");
                    p.init.poses[o] = Pose{number(ps.items[1]), number(ps.items[2]),
                                           number(ps.items[3]), number(ps.items[4])};
                }
                continue;
            }
            Atom a = atom_of(it);
            try {
                check_atom(domain, p.object_types, a);
            } catch (const Error& e) {
                fail(it, e.what());
            }
            p.init.atoms.insert(a);
        }
    }
    // Fixtures without explicit poses sit at the origin.
    for (const auto& f : p.init.fixtures)
        if (!p.init.poses.count(f)) p.init.poses[f] = Pose{};
    if (goal) {
        if (goal->items.size() != 2) fail(*goal, "expected (:goal form)");
        for (const Sexp* c : conjuncts(goal->items[1])) {
            Literal l = literal_of(*c);
            if (l.negated) fail(*c, "negative goals are not supported");
            try {
                check_atom(domain, p.object_types, l.atom);
            } catch (const Error& e) {
                fail(*c, e.what());
            }
            p.goal.insert(l.atom);
        }
    }
    return p;
}

std::vector<GroundAction> ground(const Domain& domain,
                                 const std::vector<std::pair<std::string, std::string>>& objects) {
    std::vector<GroundAction> out;
    for (size_t si = 0; si < domain.actions.size(); ++si) {
        const auto& a = domain.actions[si];
        std::vector<std::vector<std::string>> cand(a.params.size());
        for (size_t k = 0; k < a.params.size(); ++k)
            for (const auto& [o, ty] : objects)
                if (domain.is_subtype(ty, a.params[k].type)) cand[k].push_back(o);
        std::vector<std::string> bind(a.params.size());
        std::function<void(size_t)> rec = [&](size_t k) {
            if (k == a.params.size()) {
                std::map<std::string, std::string> sub;
                for (size_t q = 0; q < k; ++q) sub[a.params[q].name] = bind[q];
                auto inst = [&](const Atom& at) {
                    Atom g{at.pred, {}};
                    for (const auto& v : at.args) g.args.push_back(sub.at(v));
                    return g;
                };
                GroundAction ga;
                ga.schema = static_cast<int>(si);
                ga.name = a.name;
                ga.args = bind;
                for (const auto& l : a.pre) (l.negated ? ga.pre_neg : ga.pre_pos).insert(inst(l.atom));
                for (const auto& e : a.add) ga.add.insert(inst(e));
                for (const auto& e : a.del) ga.del.insert(inst(e));
                out.push_back(std::move(ga));
                return;
            }
            for (const auto& o : cand[k]) {
                if (std::find(bind.begin(), bind.begin() + static_cast<long>(k), o) !=
                    bind.begin() + static_cast<long>(k))
                    continue;
                bind[k] = o;
                rec(k + 1);
            }
        };
        rec(0);
    }
    return out;
}

GroundAction ground_one(const Domain& domain, const std::string& action,
                        const std::vector<std::string>& args) {
    const auto& a = domain.action(action);
    if (a.params.size() != args.size())
        throw Error("action " + action + " takes " + std::to_string(a.params.size()) + " arguments");
    std::map<std::string, std::string> sub;
    for (size_t q = 0; q < args.size(); ++q) sub[a.params[q].name] = args[q];
    auto inst = [&](const Atom& at) {
        Atom g{at.pred, {}};
        for (const auto& v : at.args) g.args.push_back(sub.at(v));
        return g;
    };
    GroundAction ga;
    for (size_t si = 0; si < domain.actions.size(); ++si)
        if (domain.actions[si].name == action) ga.schema = static_cast<int>(si);
    ga.name = action;
    ga.args = args;
    for (const auto& l : a.pre) (l.negated ? ga.pre_neg : ga.pre_pos).insert(inst(l.atom));
    for (const auto& e : a.add) ga.add.insert(inst(e));
    for (const auto& e : a.del) ga.del.insert(inst(e));
    return ga;
}

bool applicable(const WorldState& s, const GroundAction& ga) {
    if (!s.holds(ga.pre_pos)) return false;
    for (const auto& n : ga.pre_neg)
        if (s.atoms.count(n)) return false;
    return true;
}

WorldState apply(const WorldState& s, const GroundAction& ga) {
    if (!applicable(s, ga)) throw Error("action " + ga.str() + " is not applicable");
    WorldState out = s;
    for (const auto& d : ga.del) out.atoms.erase(d);
    for (const auto& a : ga.add) out.atoms.insert(a);
    return out;
}

bool holds(const WorldState& s, const AtomSet& goal) { return s.holds(goal); }

std::string write_problem(const ProblemSpec& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(define (problem " << p.name << ")\n  (:domain " << p.domain_name << ")\n  (:objects";
    // group consecutive objects by type to keep the listing compact
    for (size_t k = 0; k < p.object_order.size(); ++k) {
        const auto& o = p.object_order[k];
        os << " " << o;
        if (k + 1 == p.object_order.size() || p.object_types.at(p.object_order[k + 1]) != p.object_types.at(o))
            os << " - " << p.object_types.at(o);
    }
    os << ")\n  (:init";
    for (const auto& a : p.init.atoms) os << "\n    " << a.str();
    os << "\n    (:poses";
    for (const auto& o : p.object_order) {
        auto it = p.init.poses.find(o);
        if (it == p.init.poses.end()) continue;
        const Pose& q = it->second;
        os << "\n      (" << o << " " << q.x << " " << q.y << " " << q.z << " " << q.yaw << ")";
    }
    os << "))\n  (:goal (and";
    for (const auto& a : p.goal) os << " " << a.str();
    os << ")))\n";
    return os.str();
}

const Domain& builtin_domain(const std::string& name) {
    static std::mutex mu;
    static std::map<std::string, std::unique_ptr<Domain>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it == cache.end())
        it = cache.emplace(name, std::make_unique<Domain>(parse_domain(builtin_domain_text(name)))).first;
    return *it->second;
}

}  // namespace ptamp
