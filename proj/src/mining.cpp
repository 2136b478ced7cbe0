#include "ptamp/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <iterator>

#include "json.hpp"

namespace ptamp {

using nlohmann::json;

SequenceDatabase build_database(const std::vector<Demonstration>& demos, const Domain& domain,
                                const BuildOptions& opt, std::shared_ptr<ItemTable> table) {
    if (demos.empty()) throw Error("build_database needs at least one demonstration");
    SequenceDatabase db;
    db.items = table ? table : std::make_shared<ItemTable>();
    for (const auto& d : demos) {
        Sequence seq;
        for (const auto& step : d.steps) {
            if (opt.quiescent_only && !step.holds(domain.quiescent)) continue;
            WorldState f = fluent_filter(step, domain);
            Itemset el;
            for (auto& sg : decompose_subgraphs(f, domain)) el.push_back(canonical_encode(sg, *db.items));
            std::sort(el.begin(), el.end());
            el.erase(std::unique(el.begin(), el.end()), el.end());
            if (opt.collapse && !seq.empty() && seq.back() == el) continue;
            seq.push_back(std::move(el));
        }
        db.sequences.push_back(std::move(seq));
        db.demo_lengths.push_back(static_cast<int>(d.steps.size()));
    }
    return db;
}

int min_count(double min_support, size_t n) {
    if (!(min_support > 0 && min_support <= 1)) throw Error("min_support must lie in (0, 1]");
    return std::max(1, static_cast<int>(std::ceil(min_support * static_cast<double>(n) - 1e-9)));
}

bool contains(const Sequence& seq, const Pattern& p) {
    size_t j = 0;
    for (const auto& e : p) {
        while (j < seq.size() && !std::includes(seq[j].begin(), seq[j].end(), e.begin(), e.end())) ++j;
        if (j == seq.size()) return false;
        ++j;
    }
    return true;
}

int support(const std::vector<Sequence>& db, const Pattern& p) {
    int n = 0;
    for (const auto& s : db) n += contains(s, p) ? 1 : 0;
    return n;
}

namespace {

// Projection of one sequence: earliest end of the pattern, plus the
// positions after the prefix's end whose element contains the last pattern
// element (as a bitset of `words` words at `pos`).
struct Proj {
    int sid;
    int end;
    size_t pos;
};

struct Miner {
    const std::vector<Sequence>& db;
    int minc;
    int universe = 0;
    size_t words = 1;
    std::vector<std::vector<Itemset>> suffix;     // union of items from position j on
    std::vector<std::vector<uint64_t>> masks;     // [x * words + w]: positions holding x
    std::vector<int> stamp;
    int tick = 0;
    std::vector<FrequentPattern> out;

    Miner(const std::vector<Sequence>& d, int m) : db(d), minc(m) {
        size_t longest = 1;
        for (const auto& s : db) {
            longest = std::max(longest, s.size());
            for (const auto& e : s)
                if (!e.empty()) universe = std::max(universe, e.back() + 1);
        }
        words = (longest + 63) / 64;
        for (const auto& s : db) {
            std::vector<Itemset> suf(s.size() + 1);
            std::vector<uint64_t> mk(static_cast<size_t>(universe) * words, 0);
            for (size_t j = s.size(); j-- > 0;) {
                std::set_union(s[j].begin(), s[j].end(), suf[j + 1].begin(), suf[j + 1].end(),
                               std::back_inserter(suf[j]));
                for (int x : s[j]) mk[static_cast<size_t>(x) * words + j / 64] |= uint64_t{1} << (j % 64);
            }
            suffix.push_back(std::move(suf));
            masks.push_back(std::move(mk));
        }
        stamp.assign(static_cast<size_t>(universe), 0);
    }

    const uint64_t* mask(int sid, int x) const {
        return masks[static_cast<size_t>(sid)].data() + static_cast<size_t>(x) * words;
    }

    // dst = src & mask(x) [& positions > after]; returns lowest set position or -1.
    int intersect(uint64_t* dst, const uint64_t* src, const uint64_t* mx, int after) const {
        int first = -1;
        for (size_t w = 0; w < words; ++w) {
            uint64_t v = mx[w] & (src ? src[w] : ~uint64_t{0});
            const long lo = static_cast<long>(w * 64);
            if (after >= lo + 63) v = 0;
            else if (after >= lo) v &= ~uint64_t{0} << (after - lo + 1);
            dst[w] = v;
            if (first < 0 && v) first = static_cast<int>(lo + __builtin_ctzll(v));
        }
        return first;
    }

    // Scratch per recursion depth: item counts of the node and the child projection.
    struct Level {
        std::vector<int> cs, ci;
        std::vector<Proj> nxt;
        std::vector<uint64_t> nbits;
    };
    std::deque<Level> levels;

    // Children in lexicographic order: sequence extensions sort before
    // itemset extensions of the last element, so output needs no sort.
    void extend(Pattern& pat, const std::vector<Proj>& proj, const std::vector<uint64_t>& bits, size_t depth) {
        if (levels.size() <= depth) levels.emplace_back();
        Level& lv = levels[depth];
        const int lastmax = pat.back().back();
        lv.cs.assign(static_cast<size_t>(universe), 0);
        lv.ci.assign(static_cast<size_t>(universe), 0);
        for (const auto& pr : proj) {
            const Sequence& s = db[static_cast<size_t>(pr.sid)];
            for (int x : suffix[static_cast<size_t>(pr.sid)][static_cast<size_t>(pr.end) + 1]) ++lv.cs[static_cast<size_t>(x)];
            ++tick;
            for (size_t w = 0; w < words; ++w)
                for (uint64_t v = bits[pr.pos + w]; v; v &= v - 1) {
                    const auto& e = s[w * 64 + static_cast<size_t>(__builtin_ctzll(v))];
                    for (auto it = std::upper_bound(e.begin(), e.end(), lastmax); it != e.end(); ++it) {
                        auto& st = stamp[static_cast<size_t>(*it)];
                        if (st == tick) continue;
                        st = tick;
                        ++lv.ci[static_cast<size_t>(*it)];
                    }
                }
        }
        auto project = [&](int x, bool seq_ext) {
            Level& l = levels[depth];
            l.nxt.clear();
            l.nbits.clear();
            for (const auto& pr : proj) {
                l.nbits.resize(l.nbits.size() + words);
                uint64_t* dst = l.nbits.data() + l.nbits.size() - words;
                int j = seq_ext ? intersect(dst, nullptr, mask(pr.sid, x), pr.end)
                                : intersect(dst, bits.data() + pr.pos, mask(pr.sid, x), -1);
                if (j >= 0) l.nxt.push_back({pr.sid, j, l.nbits.size() - words});
                else l.nbits.resize(l.nbits.size() - words);
            }
            out.push_back({pat, static_cast<int>(l.nxt.size())});
            extend(pat, l.nxt, l.nbits, depth + 1);
        };
        for (int x = 0; x < universe; ++x) {
            if (levels[depth].cs[static_cast<size_t>(x)] < minc) continue;
            pat.push_back({x});
            project(x, true);
            pat.pop_back();
        }
        for (int x = lastmax + 1; x < universe; ++x) {
            if (levels[depth].ci[static_cast<size_t>(x)] < minc) continue;
            pat.back().push_back(x);
            project(x, false);
            pat.back().pop_back();
        }
    }
};

}  // namespace

std::vector<FrequentPattern> prefixspan(const std::vector<Sequence>& db, double min_support) {
    if (db.empty()) return {};
    Miner m(db, min_count(min_support, db.size()));
    for (int x = 0; x < m.universe; ++x) {
        std::vector<Proj> proj;
        std::vector<uint64_t> bits;
        for (size_t sid = 0; sid < db.size(); ++sid) {
            bits.resize(bits.size() + m.words);
            int j = m.intersect(bits.data() + bits.size() - m.words, nullptr, m.mask(static_cast<int>(sid), x), -1);
            if (j >= 0) proj.push_back({static_cast<int>(sid), j, bits.size() - m.words});
            else bits.resize(bits.size() - m.words);
        }
        if (static_cast<int>(proj.size()) < m.minc) continue;
        Pattern pat{{x}};
        m.out.push_back({pat, static_cast<int>(proj.size())});
        m.extend(pat, proj, bits, 0);
    }
    auto by_elements = [](const FrequentPattern& a, const FrequentPattern& b) { return a.elements < b.elements; };
    if (!std::is_sorted(m.out.begin(), m.out.end(), by_elements)) std::sort(m.out.begin(), m.out.end(), by_elements);
    return std::move(m.out);
}

Reward raw_reward(const Pattern& p) {
    Reward r;
    r.length = static_cast<int>(p.size());
    std::set<int> distinct;
    for (const auto& e : p) {
        r.items += static_cast<int>(e.size());
        distinct.insert(e.begin(), e.end());
    }
    r.distinct = static_cast<int>(distinct.size());
    return r;
}

std::string pattern_encoding(const Pattern& p, const ItemTable& table) {
    std::string s;
    for (const auto& e : p) {
        std::vector<std::string> parts;
        for (int id : e) parts.push_back(table.decode(id).canonical_string());
        std::sort(parts.begin(), parts.end());
        s += "<";
        for (size_t k = 0; k < parts.size(); ++k) s += (k ? "&" : "") + parts[k];
        s += ">";
    }
    return s;
}

namespace {

bool progressive(const Pattern& p) {
    for (size_t k = 0; k + 1 < p.size(); ++k)
        if (std::includes(p[k].begin(), p[k].end(), p[k + 1].begin(), p[k + 1].end())) return false;
    return true;
}

}  // namespace

SubgoalSequence select_target_sequence(const std::vector<FrequentPattern>& patterns, const ItemTable& table,
                                       const AtomSet& goal, const SelectOptions& opt) {
    if (patterns.empty()) throw Error("no frequent patterns to select from");
    std::vector<const FrequentPattern*> cand;
    for (const auto& p : patterns)
        if (static_cast<int>(p.elements.size()) <= opt.max_length && (!opt.progressive || progressive(p.elements)))
            cand.push_back(&p);
    if (cand.empty())
        for (const auto& p : patterns)
            if (static_cast<int>(p.elements.size()) <= opt.max_length) cand.push_back(&p);
    if (cand.empty()) throw Error("no frequent pattern fits the demonstration length");

    std::vector<Reward> raw;
    for (const auto* c : cand) raw.push_back(raw_reward(c->elements));
    auto norm = [&](auto field) {
        double lo = 1e300, hi = -1e300;
        for (const auto& r : raw) {
            lo = std::min(lo, static_cast<double>(r.*field));
            hi = std::max(hi, static_cast<double>(r.*field));
        }
        return std::pair<double, double>{lo, hi};
    };
    auto [llo, lhi] = norm(&Reward::length);
    auto [qlo, qhi] = norm(&Reward::items);
    auto [vlo, vhi] = norm(&Reward::distinct);
    auto scaled = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
    size_t best = 0;
    std::string best_enc;
    for (size_t k = 0; k < cand.size(); ++k) {
        Reward& r = raw[k];
        r.R_l = scaled(r.length, llo, lhi);
        r.R_q = scaled(r.items, qlo, qhi);
        r.R_v = scaled(r.distinct, vlo, vhi);
        r.R = r.R_l + r.R_q + r.R_v;
        if (k == 0) {
            best_enc = pattern_encoding(cand[0]->elements, table);
            continue;
        }
        const double eps = 1e-12;
        if (r.R > raw[best].R + eps) {
            best = k;
            best_enc = pattern_encoding(cand[k]->elements, table);
        } else if (r.R > raw[best].R - eps) {
            std::string enc = pattern_encoding(cand[k]->elements, table);
            if (enc < best_enc) {
                best = k;
                best_enc = enc;
            }
        }
    }
    SubgoalSequence out;
    out.pattern = cand[best]->elements;
    out.support = cand[best]->support;
    out.reward = raw[best];
    for (const auto& e : out.pattern) {
        AtomSet sg;
        for (int id : e) {
            Subgraph s = table.decode(id);
            sg.insert(s.atoms.begin(), s.atoms.end());
        }
        out.subgoals.push_back(std::move(sg));
    }
    if (out.subgoals.empty() || !std::includes(out.subgoals.back().begin(), out.subgoals.back().end(), goal.begin(), goal.end())) {
        out.subgoals.push_back(goal);
        out.goal_appended = true;
    }
    return out;
}

SubgoalSequence mine_subgoals(const std::vector<Demonstration>& demos, const Domain& domain, const AtomSet& goal,
                              double min_support, const BuildOptions& bopt) {
    SequenceDatabase db = build_database(demos, domain, bopt);
    auto pats = prefixspan(db, min_support);
    SelectOptions sopt;
    sopt.max_length = *std::min_element(db.demo_lengths.begin(), db.demo_lengths.end());
    SubgoalSequence s = select_target_sequence(pats, *db.items, goal, sopt);
    s.min_support = min_support;
    return s;
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

}  // namespace

std::string subgoals_to_json(const SubgoalSequence& s) {
    json j;
    j["min_support"] = s.min_support;
    j["support"] = s.support;
    j["goal_appended"] = s.goal_appended;
    j["reward"] = {{"R_l", s.reward.R_l}, {"R_q", s.reward.R_q}, {"R_v", s.reward.R_v}, {"R", s.reward.R},
                   {"length", s.reward.length}, {"items", s.reward.items}, {"distinct", s.reward.distinct}};
    json sg = json::array();
    for (const auto& g : s.subgoals) sg.push_back(atoms_json(g));
    j["subgoals"] = sg;
    json comp = json::object();
    for (const auto& [type, atoms] : s.completion) comp[type] = atoms_json(atoms);
    j["completion"] = comp;
    return j.dump(2);
}

SubgoalSequence subgoals_from_json(const std::string& text) {
    json j = json::parse(text);
    SubgoalSequence s;
    s.min_support = j.value("min_support", 0.9);
    s.support = j.value("support", 0);
    s.goal_appended = j.value("goal_appended", false);
    if (j.contains("reward")) {
        const auto& r = j["reward"];
        s.reward.R_l = r.value("R_l", 0.0);
        s.reward.R_q = r.value("R_q", 0.0);
        s.reward.R_v = r.value("R_v", 0.0);
        s.reward.R = r.value("R", 0.0);
        s.reward.length = r.value("length", 0);
        s.reward.items = r.value("items", 0);
        s.reward.distinct = r.value("distinct", 0);
    }
    for (const auto& g : j.at("subgoals")) s.subgoals.push_back(atoms_from(g));
    if (j.contains("completion"))
        for (auto it = j["completion"].begin(); it != j["completion"].end(); ++it)
            s.completion[it.key()] = atoms_from(it.value());
    if (s.subgoals.empty()) throw Error("subgoal file lists no subgoals");
    return s;
}

}  // namespace ptamp
