#include "ptamp/core.hpp"

#include <algorithm>
#include <cmath>

namespace ptamp {

bool Atom::mentions(const std::string& obj) const {
    return std::find(args.begin(), args.end(), obj) != args.end();
}

std::string Atom::str() const {
    std::string s = "(" + pred;
    for (const auto& a : args) s += " " + a;
    return s + ")";
}

Atom make_atom(std::string pred, std::vector<std::string> args) {
    return Atom{std::move(pred), std::move(args)};
}

std::string atoms_str(const AtomSet& atoms) {
    std::string s;
    for (const auto& a : atoms) {
        if (!s.empty()) s += " ";
        s += a.str();
    }
    return s;
}

bool pose_near(const Pose& a, const Pose& b, double tol) {
    return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol &&
           std::abs(a.z - b.z) <= tol && std::abs(a.yaw - b.yaw) <= tol;
}

std::vector<std::string> WorldState::movables() const {
    std::vector<std::string> out;
    for (const auto& o : objects)
        if (!fixtures.count(o)) out.push_back(o);
    return out;
}

bool WorldState::holds(const AtomSet& goal) const {
    return std::includes(atoms.begin(), atoms.end(), goal.begin(), goal.end());
}

std::map<std::string, AtomSet> WorldState::unary() const {
    std::map<std::string, AtomSet> out;
    for (const auto& a : atoms)
        if (a.args.size() == 1) out[a.args[0]].insert(a);
    return out;
}

AtomSet WorldState::binary() const {
    AtomSet out;
    for (const auto& a : atoms)
        if (a.args.size() == 2) out.insert(a);
    return out;
}

AtomSet WorldState::atoms_of(const std::string& obj) const {
    AtomSet out;
    for (const auto& a : atoms)
        if (a.mentions(obj)) out.insert(a);
    return out;
}

void WorldState::check() const {
    for (const auto& a : atoms)
        for (const auto& o : a.args)
            if (!objects.count(o))
                throw std::invalid_argument("atom " + a.str() + " names unknown object " + o);
    for (const auto& o : objects) {
        auto it = poses.find(o);
        if (it == poses.end()) throw std::invalid_argument("object " + o + " has no pose");
        const Pose& p = it->second;
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
            !std::isfinite(p.yaw) || p.z < 0)
            throw std::invalid_argument("object " + o + " has an invalid pose");
    }
    for (const auto& f : fixtures)
        if (!objects.count(f)) throw std::invalid_argument("fixture " + f + " is not an object");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

}  // namespace ptamp
