#pragma once

// Shared helpers for the suite implementations.

#include <cmath>
#include <algorithm>
#include <string>
#include <vector>

#include "dyadlab/verify.hpp"

namespace dyadlab::suites {

// splitmix64 with Box-Muller normals: the streams do not depend on the
// standard library
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::size_t below(std::size_t n) { return std::size_t(next() % n); }
    double normal() {
        double u = std::max(uniform(), 1e-300), v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
    }
    bool coin(double p = 0.5) { return uniform() < p; }

private:
    std::uint64_t s_;
};

// exp(N(0,1)) values, occasionally zeroed
inline GridFunction random_nonneg(const Mesh& m, Rng& r, double zero_prob = 0.0) {
    GridFunction f(m, 0.0);
    for (auto& v : f.values()) v = r.coin(zero_prob) ? 0.0 : std::exp(r.normal());
    if (zero_prob > 0.0) f[r.below(m.cells())] = std::exp(r.normal());
    return f;
}

inline GridFunction random_signed(const Mesh& m, Rng& r) {
    GridFunction f(m, 0.0);
    for (auto& v : f.values()) v = r.normal();
    return f;
}

// a few cells carry most of the mass
inline GridFunction spiky(const Mesh& m, Rng& r) {
    GridFunction f(m, 0.0);
    for (auto& v : f.values()) v = 0.05 * r.uniform();
    int spikes = 1 + int(r.below(3));
    for (int k = 0; k < spikes; ++k) f[r.below(m.cells())] += std::exp(2.0 * r.uniform());
    return f;
}

inline std::vector<DyadicCube> random_family(const Mesh& m, Rng& r, std::size_t n) {
    auto cubes = all_cubes(m);
    std::vector<DyadicCube> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(cubes[r.below(cubes.size())]);
    return out;
}

inline GridFunction scaled(GridFunction f, double c) {
    for (auto& v : f.values()) v *= c;
    return f;
}

// ||M g||_Y / ||g||_Y as a certified lower bound: value over upper
inline double maximal_ratio_lb(const SpaceSpec& y, const GridFunction& g, const Budget& b, Cert* cert = nullptr) {
    Estimate top = norm_estimate(y, apply(dyadic_maximal(), g, Exec::Serial), b);
    Estimate bottom = norm_estimate(y, g, b);
    if (cert) *cert = weakest(top.cert, bottom.cert);
    return std::isfinite(bottom.upper) && bottom.upper > 0.0 ? top.value / bottom.upper : 0.0;
}

inline std::string label(const std::string& space, int L, int i = -1) {
    std::string s = space + "@L" + std::to_string(L);
    if (i >= 0) s += "#" + std::to_string(i);
    return s;
}

inline double param(const SuiteConfig& c, const char* key) { return c.params.at(key).get<double>(); }

inline EstimateOptions options(const SuiteContext& c, std::uint64_t seed) {
    EstimateOptions o;
    o.budget = c.cfg.budget;
    o.budget.seed = seed;
    return o;
}

inline SuiteReport begin(const SuiteContext& c) {
    SuiteReport r;
    r.id = c.cfg.id;
    r.seed = c.cfg.seed;
    return r;
}

}  // namespace dyadlab::suites
