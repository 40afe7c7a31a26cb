#include <cmath>
#include <set>

#include "doctest.h"
#include "dyadlab/dyadic.hpp"
#include "dyadlab/kernels.hpp"
#include "gen.hpp"

using namespace dyadlab;

TEST_CASE("mesh measures and counts") {
    for (int d = 1; d <= 2; ++d)
        for (int L = 0; L <= 4; ++L) {
            Mesh m(d, L);
            CHECK(m.cells() == (std::size_t(1) << (L * d)));
            CHECK(double(m.cells()) * m.cell_measure() == 1.0);
            std::size_t total = 0;
            for (int k = 0; k <= L; ++k) total += m.cubes_at(k);
            CHECK(m.cube_count() == total);
        }
}

TEST_CASE("cube tree invariants") {
    Mesh m(2, 3);
    for (const auto& q : all_cubes(m)) {
        auto [b, e] = cell_range(m, q);
        CHECK(e - b == (std::size_t(1) << ((m.L - q.level) * m.d)));
        CHECK(cube_of(m, slot_of(m, q)) == q);
        if (q.level < m.L) {
            std::size_t covered = 0;
            for (const auto& c : children(q)) {
                CHECK(parent(c) == q);
                CHECK(strictly_contains(q, c));
                auto [cb, ce] = cell_range(m, c);
                CHECK(cb >= b);
                CHECK(ce <= e);
                covered += ce - cb;
            }
            CHECK(covered == e - b);
        }
    }
}

TEST_CASE("public order is level-major then lexicographic") {
    Mesh m(2, 2);
    auto cubes = all_cubes(m);
    for (std::size_t i = 1; i < cubes.size(); ++i) CHECK(cubes[i - 1] < cubes[i]);
    CHECK(cubes.size() == m.cube_count());
}

TEST_CASE("cells of a cube match its coordinates") {
    Mesh m(2, 3);
    for (const auto& q : all_cubes(m)) {
        auto [b, e] = cell_range(m, q);
        const double side = std::ldexp(1.0, -q.level);
        for (std::size_t c = 0; c < m.cells(); ++c) {
            auto x = cell_center(m, c);
            bool in = true;
            for (int j = 0; j < 2; ++j) in = in && x[j] >= q.index[j] * side && x[j] < (q.index[j] + 1) * side;
            CHECK(in == (c >= b && c < e));
        }
    }
}

TEST_CASE("cube text round trip and malformed input") {
    DyadicCube q{2, {1, 3}};
    CHECK(parse_cube(to_string(q), 2) == q);
    CHECK_THROWS_AS(parse_cube("2 1", 2), Error);
    CHECK_THROWS_AS(parse_cube("x 1 2", 2), Error);
}

TEST_CASE("grid function validation") {
    Mesh m(1, 2);
    CHECK_THROWS_AS(GridFunction(m, std::vector<double>{1, 2, 3}), Error);
    Mesh other(1, 3);
    CHECK_THROWS_AS(check_same_mesh(m, other, "x"), Error);
}

TEST_CASE("serial and parallel kernels agree bitwise") {
    gen::Rng r(11);
    for (int d = 1; d <= 2; ++d) {
        Mesh m(d, d == 1 ? 12 : 6);
        std::vector<double> v(m.cells());
        for (auto& x : v) x = r.uniform(-1, 1);
        auto a = cube_integrals(m, v, Exec::Serial);
        auto b = cube_integrals(m, v, Exec::Parallel);
        CHECK(a == b);
        std::vector<unsigned char> mask(m.cube_count());
        for (auto& x : mask) x = r.uniform() < 0.4;
        std::vector<double> s1(m.cells()), s2(m.cells()), x1(m.cells()), x2(m.cells());
        prefix_sum(m, a.data(), mask.data(), s1.data(), Exec::Serial);
        prefix_sum(m, a.data(), mask.data(), s2.data(), Exec::Parallel);
        prefix_max(m, a.data(), mask.data(), x1.data(), -5.0, Exec::Serial);
        prefix_max(m, a.data(), mask.data(), x2.data(), -5.0, Exec::Parallel);
        CHECK(s1 == s2);
        CHECK(x1 == x2);
        for (std::size_t s = 0; s < m.cube_count(); s += 7) CHECK(cube_integral(m, v.data(), s) == a[s]);
    }
}

TEST_CASE("prefix kernels against direct enumeration") {
    gen::Rng r(5);
    Mesh m(1, 4);
    std::vector<double> slot(m.cube_count());
    for (auto& x : slot) x = r.uniform();
    std::vector<unsigned char> mask(m.cube_count());
    for (auto& x : mask) x = r.uniform() < 0.5;
    std::vector<double> s(m.cells()), mx(m.cells());
    prefix_sum(m, slot.data(), mask.data(), s.data());
    prefix_max(m, slot.data(), mask.data(), mx.data(), 0.0);
    for (std::size_t c = 0; c < m.cells(); ++c) {
        double es = 0.0, em = 0.0;
        for (std::size_t q = 0; q < m.cube_count(); ++q) {
            auto [b, e] = cell_range(m, q);
            if (mask[q] && c >= b && c < e) {
                es += slot[q];
                em = std::max(em, slot[q]);
            }
        }
        CHECK(s[c] == doctest::Approx(es).epsilon(1e-14));
        CHECK(mx[c] == em);
    }
}

TEST_CASE("shifted grids") {
    Mesh m(1, 3);
    auto sh = shifted_cubes(m);
    CHECK(!sh.empty());
    for (const auto& s : sh) {
        CHECK(s.cells.size() == (std::size_t(1) << ((m.L - s.level) * m.d)));
        std::set<std::size_t> uniq(s.cells.begin(), s.cells.end());
        CHECK(uniq.size() == s.cells.size());
    }
}
