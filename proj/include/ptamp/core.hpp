#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptamp {

struct Atom {
    std::string pred;
    std::vector<std::string> args;

    auto operator<=>(const Atom&) const = default;
    bool operator==(const Atom&) const = default;

    bool mentions(const std::string& obj) const;
    std::string str() const;  // "(pred a b)"
};

using AtomSet = std::set<Atom>;

Atom make_atom(std::string pred, std::vector<std::string> args = {});
std::string atoms_str(const AtomSet& atoms);

struct Pose {
    double x = 0, y = 0, z = 0, yaw = 0;
    bool operator==(const Pose&) const = default;
};

bool pose_near(const Pose& a, const Pose& b, double tol = 1e-6);

struct Footprint {
    double dx = 0.025, dy = 0.025, dz = 0.025;  // half extents
    bool operator==(const Footprint&) const = default;
};

// One timestep of the scene. Fixtures (table, sink, ...) are objects too but
// never become scene-graph nodes.
struct WorldState {
    std::set<std::string> objects;
    std::set<std::string> fixtures;
    AtomSet atoms;
    std::map<std::string, Pose> poses;

    bool operator==(const WorldState&) const = default;

    std::vector<std::string> movables() const;
    bool is_fixture(const std::string& o) const { return fixtures.count(o) > 0; }
    bool holds(const AtomSet& goal) const;
    std::map<std::string, AtomSet> unary() const;
    AtomSet binary() const;
    AtomSet atoms_of(const std::string& obj) const;

    // Throws std::invalid_argument when an atom names an unknown object or a
    // pose is missing.
    void check() const;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Stable 64-bit mixing used to derive independent RNG streams.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(const std::string& s);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

using Rng = std::mt19937_64;

}  // namespace ptamp
