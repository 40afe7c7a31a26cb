#include <cmath>

#include "doctest.h"
#include "dyadlab/dyadic.hpp"
#include "dyadlab/spaces.hpp"
#include "gen.hpp"

using namespace dyadlab;

namespace {

double pairing(const GridFunction& f, const GridFunction& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::fabs(f[i] * g[i]) * f.mesh().cell_measure();
    return s;
}

double lp_direct(const GridFunction& f, double p, const GridFunction& w) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::fabs(f[i]) * w[i]);
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::fabs(f[i]) * w[i], p) * f.mesh().cell_measure();
    return std::pow(s, 1.0 / p);
}

// Dense tableau simplex for max c.x, A x <= b, x >= 0 with b >= 0. Bland's
// rule, so no cycling.
double simplex_max(std::vector<std::vector<double>> A, std::vector<double> b, const std::vector<double>& c) {
    const std::size_t m = A.size(), n = c.size();
    std::vector<std::vector<double>> T(m + 1, std::vector<double>(n + m + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
        T[i][n + i] = 1.0;
        T[i][n + m] = b[i];
    }
    for (std::size_t j = 0; j < n; ++j) T[m][j] = -c[j];
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;
    for (;;) {
        std::size_t col = n + m;
        for (std::size_t j = 0; j < n + m; ++j)
            if (T[m][j] < -1e-13) {
                col = j;
                break;
            }
        if (col == n + m) break;
        std::size_t row = m;
        double best = INFINITY;
        for (std::size_t i = 0; i < m; ++i)
            if (T[i][col] > 1e-13) {
                double r = T[i][n + m] / T[i][col];
                if (r < best - 1e-15 || (std::fabs(r - best) <= 1e-15 && basis[i] < basis[row])) {
                    best = r;
                    row = i;
                }
            }
        REQUIRE(row < m);
        double piv = T[row][col];
        for (auto& v : T[row]) v /= piv;
        for (std::size_t i = 0; i <= m; ++i)
            if (i != row && T[i][col] != 0.0) {
                double f = T[i][col];
                for (std::size_t j = 0; j <= n + m; ++j) T[i][j] -= f * T[row][j];
            }
        basis[row] = col;
    }
    return T[m][n + m];
}

// sup of the pairing with g over the unit ball of Morrey(1, q, w)
double morrey_p1_lp(double q, const GridFunction& w, const GridFunction& g) {
    const Mesh& m = g.mesh();
    std::vector<std::vector<double>> A;
    std::vector<double> b, c(g.size());
    for (const auto& Q : all_cubes(m)) {
        std::vector<double> row(g.size(), 0.0);
        auto [lo, hi] = cell_range(m, Q);
        for (std::size_t x = lo; x < hi; ++x) row[x] = 1.0;
        A.push_back(row);
        b.push_back(std::pow(cube_measure(Q, m.d), 1.0 - (std::isinf(q) ? 0.0 : 1.0 / q)));
    }
    for (std::size_t x = 0; x < g.size(); ++x) c[x] = std::fabs(g[x]) / w[x];
    return simplex_max(A, b, c);
}

}  // namespace

TEST_CASE("norm examples") {
    Mesh m(1, 2);
    GridFunction f(m, std::vector<double>{2, 2, 2, 2});
    CHECK(norm(lebesgue(m, 2.0), f) == doctest::Approx(2.0).epsilon(1e-14));

    GridFunction one(m, 1.0);
    for (auto [p, q] : {std::pair{1.0, 2.0}, {2.0, 3.0}, {1.5, double(INFINITY)}, {2.0, 2.0}}) {
        double best = 0.0;
        for (const auto& Q : all_cubes(m)) {
            double mq = cube_measure(Q, 1);
            double e = (std::isinf(q) ? 0.0 : 1.0 / q) - 1.0 / p;
            best = std::max(best, std::pow(mq, e) * std::pow(mq, 1.0 / p));
        }
        CHECK(best == 1.0);
        CHECK(norm(morrey(p, q, one), one) == doctest::Approx(1.0).epsilon(1e-14));
    }

    gen::Rng r(3);
    for (int t = 0; t < 10; ++t) {
        GridFunction g = gen::sparse_nonneg(m, r);
        for (double rr : {0.5, 2.0, 3.0}) {
            double s = 0.0;
            for (double v : g.values()) s += std::pow(v, 1.0 / rr) * m.cell_measure();
            CHECK(norm(concavification(lebesgue(m, 1.0), rr), g) == doctest::Approx(std::pow(s, rr)).epsilon(1e-12));
        }
    }
    GridFunction bad(m, std::vector<double>{1, NAN, 0, 0});
    CHECK_THROWS_AS(norm(lebesgue(m, 2.0), bad), Error);
}

TEST_CASE("dual norm examples") {
    Mesh m(1, 3);
    gen::Rng r(4);
    GridFunction zero(m, 0.0);
    CHECK(kothe_dual_norm(lebesgue(m, 2.0), zero).value == 0.0);
    for (int t = 0; t < 20; ++t) {
        GridFunction g = gen::sparse_nonneg(m, r);
        GridFunction w = gen::positive(m, r);
        CHECK(kothe_dual_norm(lebesgue(m, INFINITY), g).value == doctest::Approx(lp_direct(g, 1.0, GridFunction(m, 1.0))));
        for (double p : {1.0, 1.5, 3.0, double(INFINITY)}) {
            auto d = kothe_dual_norm(weighted_lebesgue(p, w), g);
            CHECK(d.cert == Cert::Exact);
            CHECK(d.value == doctest::Approx(lp_direct(g, conjugate_exponent(p), reciprocal(w))).epsilon(1e-12));
            CHECK(pairing(d.witness, g) == doctest::Approx(d.value).epsilon(1e-10));
            CHECK(norm(weighted_lebesgue(p, w), d.witness) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("weak norm examples") {
    Mesh m1(1, 1);
    GridFunction f(m1, std::vector<double>{2, 1});
    CHECK(weak_norm(lebesgue(m1, 1.0), f) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(weak_norm(lebesgue(m1, 1.0), GridFunction(m1, 0.0)) == 0.0);

    Mesh m(2, 2);
    gen::Rng r(5);
    for (int t = 0; t < 10; ++t) {
        GridFunction ind(m, 0.0);
        for (auto& v : ind.values()) v = r.uniform() < 0.4 ? 1.0 : 0.0;
        ind[0] = 1.0;
        for (const auto& x : gen::sample_spaces(m, r))
            CHECK(weak_norm(x, ind) == doctest::Approx(norm(x, ind)).epsilon(1e-10));
    }
}

TEST_CASE("mixed norm examples") {
    Mesh m(1, 3);
    gen::Rng r(6);
    auto x = lebesgue(m, 2.0);
    GridFunction f = gen::sparse_nonneg(m, r);
    MixedFamily single{m, {DyadicCube{1, {0}}}, {f}};
    CHECK(mixed_norm(x, 2.0, single) == doctest::Approx(norm(x, f)));
    CHECK(mixed_norm(x, INFINITY, single) == doctest::Approx(norm(x, f)));

    MixedFamily same{m, {DyadicCube{0, {0}}, DyadicCube{1, {1}}, DyadicCube{2, {3}}}, {f, f, f}};
    for (const auto& y : gen::sample_spaces(m, r)) CHECK(mixed_norm(y, INFINITY, same) == doctest::Approx(norm(y, f)).epsilon(1e-12));

    GridFunction a(m, 0.0), b(m, 0.0);
    for (std::size_t i = 0; i < 4; ++i) a[i] = r.uniform(0.5, 2.0);
    for (std::size_t i = 4; i < 8; ++i) b[i] = r.uniform(0.5, 2.0);
    MixedFamily two{m, {DyadicCube{1, {0}}, DyadicCube{1, {1}}}, {a, b}};
    CHECK(mixed_norm(x, 2.0, two) == doctest::Approx(std::hypot(norm(x, a), norm(x, b))).epsilon(1e-12));
    CHECK_THROWS_AS(mixed_norm(x, 0.5, two), Error);
}

TEST_CASE("monotone, homogeneous and quasi-triangle on random inputs") {
    gen::Rng r(7);
    for (int d = 1; d <= 2; ++d) {
        Mesh m(d, d == 1 ? 3 : 2);
        for (int t = 0; t < 6; ++t) {
            for (const auto& x : gen::sample_spaces(m, r)) {
                double K = quasi_triangle_constant(x);
                if (is_banach(x)) CHECK(K == 1.0);
                for (const auto& Q : all_cubes(m)) {
                    double n = norm(x, indicator(m, Q));
                    CHECK(n > 0.0);
                    CHECK(std::isfinite(n));
                }
                GridFunction f = gen::sparse_nonneg(m, r), g = gen::sparse_nonneg(m, r);
                GridFunction lo = f;
                for (auto& v : lo.values()) v *= r.uniform();
                double nf = norm(x, f);
                CHECK(norm(x, lo) <= nf * (1 + 1e-12));
                double c = r.uniform(0.1, 7.0);
                GridFunction cf = f;
                for (auto& v : cf.values()) v *= -c;
                CHECK(norm(x, cf) == doctest::Approx(c * nf).epsilon(1e-10));
                GridFunction s = f;
                for (std::size_t i = 0; i < s.size(); ++i) s[i] += g[i];
                CHECK(norm(x, s) <= K * (nf + norm(x, g)) * (1 + 1e-9));
            }
        }
    }
}

TEST_CASE("quasi-triangle constants on the canonical form") {
    Mesh m(1, 2);
    GridFunction w(m, 1.0);
    CHECK(quasi_triangle_constant(weighted_lebesgue(0.5, w)) == doctest::Approx(2.0));
    CHECK(quasi_triangle_constant(concavification(weighted_lebesgue(1.0, w), 2.0)) == doctest::Approx(2.0));
    CHECK(quasi_triangle_constant(concavification(weighted_lebesgue(4.0, w), 2.0)) == 1.0);
    CHECK(quasi_triangle_constant(weak_type(weighted_lebesgue(2.0, w))) == 2.0);
    CHECK(is_banach(kothe_dual(morrey(1.0, 2.0, w))));
    CHECK_FALSE(is_banach(weighted_lebesgue(0.5, w)));
}

TEST_CASE("biduality for exact duals") {
    gen::Rng r(8);
    Mesh m(1, 3);
    for (int t = 0; t < 8; ++t) {
        for (const auto& x : gen::sample_spaces(m, r)) {
            if (!is_banach(x)) continue;
            GridFunction f = gen::sparse_nonneg(m, r);
            auto d = kothe_dual_norm(kothe_dual(x), f);
            if (d.cert != Cert::Exact) continue;
            auto nx = norm_estimate(x, f);
            if (nx.cert != Cert::Exact) continue;
            CHECK(d.value == doctest::Approx(nx.value).epsilon(1e-8));
        }
    }
}

TEST_CASE("hoelder pairing against every dual") {
    gen::Rng r(9);
    Mesh m(1, 3);
    Budget b;
    b.starts = 2;
    b.rounds = 10;
    for (int t = 0; t < 5; ++t) {
        for (const auto& x : gen::sample_spaces(m, r)) {
            GridFunction f = gen::sparse_nonneg(m, r), g = gen::sparse_nonneg(m, r);
            auto d = kothe_dual_norm(x, g, b);
            CHECK(d.value <= d.upper * (1 + 1e-12));
            if (d.cert == Cert::Exact) {
                CHECK(pairing(f, g) <= norm(x, f) * d.value * (1 + 1e-9));
            } else if (std::isfinite(d.upper)) {
                CHECK(pairing(f, g) <= norm(x, f) * d.upper * (1 + 1e-9));
            }
            // witnesses sit on the unit sphere and pair up to the reported value
            if (d.witness.size() && d.value > 0.0) {
                auto nw = norm_estimate(x, d.witness, b);
                if (nw.cert == Cert::Exact)
                    CHECK(nw.value == doctest::Approx(1.0).epsilon(1e-8));
                else
                    CHECK(nw.value <= 1.0 + 1e-8);
                CHECK(pairing(d.witness, g) >= d.value * (1 - 1e-6));
            }
        }
    }
}

TEST_CASE("concavification duality on the lebesgue scale") {
    gen::Rng r(10);
    Mesh m(2, 2);
    for (int t = 0; t < 20; ++t) {
        double p = r.uniform(1.0, 5.0), th = r.uniform(0.05, 0.95);
        GridFunction w = gen::positive(m, r), g = gen::sparse_nonneg(m, r);
        double lhs = kothe_dual_norm(concavification(weighted_lebesgue(p, w), th), g).value;
        // (X')^th . L^{1/(1-th)} with X' = L^{p'}_{1/w}: exponents add harmonically
        double pc = conjugate_exponent(p);
        double inv = (std::isinf(pc) ? 0.0 : th / pc) + (1.0 - th);
        double rhs = lp_direct(g, 1.0 / inv, power(reciprocal(w), th));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
}

TEST_CASE("weak norm never exceeds the norm") {
    gen::Rng r(11);
    Mesh m(1, 3);
    for (int t = 0; t < 8; ++t)
        for (const auto& x : gen::sample_spaces(m, r)) {
            GridFunction f = gen::sparse_nonneg(m, r);
            CHECK(weak_norm(x, f) <= norm(x, f) * (1 + 1e-12));
        }
}

TEST_CASE("morrey p = 1 dual matches the dense LP") {
    gen::Rng r(12);
    for (int L = 1; L <= 3; ++L) {
        Mesh m(1, L);
        for (int t = 0; t < 15; ++t) {
            GridFunction w = gen::positive(m, r, 0.3, 3.0), g = gen::sparse_nonneg(m, r);
            double q = t % 3 == 0 ? 1.5 : r.uniform(1.1, 6.0);
            auto d = kothe_dual_norm(morrey(1.0, q, w), g);
            double lp = morrey_p1_lp(q, w, g);
            CHECK(d.cert == Cert::Exact);
            CHECK(d.value == doctest::Approx(lp).epsilon(1e-10));
            CHECK(norm(block(1.0, q, reciprocal(w)), g) == doctest::Approx(lp).epsilon(1e-10));
        }
    }
}

TEST_CASE("morrey surrogate brackets the dual") {
    gen::Rng r(13);
    Mesh m(1, 3);
    Budget b;
    for (int t = 0; t < 10; ++t) {
        GridFunction w = gen::positive(m, r, 0.5, 2.0), g = gen::sparse_nonneg(m, r);
        double p = r.uniform(1.2, 3.0), q = p + r.uniform(0.5, 3.0);
        auto d = kothe_dual_norm(morrey(p, q, w), g, b);
        CHECK(d.cert == Cert::LowerBound);
        CHECK(d.value <= d.upper * (1 + 1e-12));
        CHECK(d.upper <= d.value * 1.05);
        // the Morrey ball sits inside the L^p_w ball
        CHECK(d.upper <= kothe_dual_norm(weighted_lebesgue(p, w), g).value * (1 + 1e-9));
    }
}

TEST_CASE("json and text rendering are stable") {
    Mesh m(1, 1);
    GridFunction w(m, std::vector<double>{1.0, 2.0});
    auto x = kothe_dual(morrey(1.0, INFINITY, w));
    json j = to_json(x);
    CHECK(j["space"] == "kothe_dual");
    CHECK(j["inner"]["q"] == "inf");
    CHECK(describe(x) == describe(kothe_dual(morrey(1.0, INFINITY, w))));
    CHECK(describe(x) != describe(kothe_dual(morrey(1.0, 4.0, w))));
}
