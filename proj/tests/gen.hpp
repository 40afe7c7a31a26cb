#pragma once

// Seeded generators for property tests. splitmix64 keeps streams identical
// across standard libraries.

#include <cmath>
#include <cstdint>
#include <vector>

#include "dyadlab/mesh.hpp"
#include "dyadlab/spaces.hpp"

namespace gen {

struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int below(int n) { return int(next() % std::uint64_t(n)); }
    double gauss() {
        double u = uniform(), v = uniform();
        if (u < 1e-300) u = 1e-300;
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
    }
};

inline dyadlab::GridFunction positive(const dyadlab::Mesh& m, Rng& r, double lo = 0.1, double hi = 3.0) {
    dyadlab::GridFunction f(m, 0.0);
    for (auto& v : f.values()) v = r.uniform(lo, hi);
    return f;
}

// nonnegative with some zero cells
inline dyadlab::GridFunction sparse_nonneg(const dyadlab::Mesh& m, Rng& r, double zero_prob = 0.3) {
    dyadlab::GridFunction f(m, 0.0);
    for (auto& v : f.values()) v = r.uniform() < zero_prob ? 0.0 : r.uniform(0.05, 4.0);
    if (f.values()[0] == 0.0 && f.size() > 0) f.values()[r.below(int(f.size()))] = 1.0;
    return f;
}

inline dyadlab::GridFunction lognormal(const dyadlab::Mesh& m, Rng& r, double sigma) {
    dyadlab::GridFunction f(m, 0.0);
    for (auto& v : f.values()) v = std::exp(sigma * r.gauss());
    return f;
}

inline std::vector<dyadlab::DyadicCube> random_family(const dyadlab::Mesh& m, Rng& r, int count) {
    auto all = dyadlab::all_cubes(m);
    std::vector<dyadlab::DyadicCube> out;
    for (int i = 0; i < count; ++i) out.push_back(all[r.below(int(all.size()))]);
    return out;
}

// one instance of every space family, including quasi-Banach and weak ones
inline std::vector<dyadlab::SpaceSpec> sample_spaces(const dyadlab::Mesh& m, Rng& r) {
    using namespace dyadlab;
    GridFunction w = positive(m, r, 0.3, 3.0);
    GridFunction pe(m, 0.0);
    for (auto& v : pe.values()) v = r.uniform() < 0.15 ? INFINITY : r.uniform(1.0, 4.0);
    std::vector<CellPhi> cells;
    for (std::size_t i = 0; i < m.cells(); ++i) {
        double a = r.uniform(0.1, 0.4);
        cells.push_back(make_table({0, 0.5, 1.5}, {0, a, a + r.uniform(1.0, 2.0)}, 3.0, false));
    }
    PhiFunction phi(m, cells);
    return {weighted_lebesgue(1.0, w),
            weighted_lebesgue(2.5, w),
            weighted_lebesgue(INFINITY, w),
            weighted_lebesgue(0.5, w),
            variable_lebesgue(pe, w),
            musielak_orlicz(phi),
            orlicz_amemiya(phi),
            morrey(1.0, 3.0, w),
            morrey(2.0, 4.0, w),
            concavification(weighted_lebesgue(3.0, w), 2.0),
            concavification(musielak_orlicz(phi), 0.5),
            concavification(musielak_orlicz(phi), 2.0),
            kothe_dual(variable_lebesgue(pe, w)),
            weak_type(weighted_lebesgue(2.0, w)),
            weak_type(musielak_orlicz(phi))};
}

}  // namespace gen
