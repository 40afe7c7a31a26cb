#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "dyadlab/dyadic.hpp"
#include "gen.hpp"

using namespace dyadlab;

namespace {

// direct summation oracles
double avg_direct(const GridFunction& f, const DyadicCube& q) {
    auto [b, e] = cell_range(f.mesh(), q);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += std::fabs(f[i]);
    return s / double(e - b);
}

std::vector<double> sparse_direct(const GridFunction& f, const std::vector<DyadicCube>& s) {
    std::vector<DyadicCube> u = s;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    std::vector<double> out(f.size(), 0.0);
    for (const auto& q : u) {
        auto [b, e] = cell_range(f.mesh(), q);
        double a = avg_direct(f, q);
        for (std::size_t i = b; i < e; ++i) out[i] += a;
    }
    return out;
}

std::vector<double> maximal_direct(const GridFunction& f) {
    std::vector<double> out(f.size(), 0.0);
    for (const auto& q : all_cubes(f.mesh())) {
        auto [b, e] = cell_range(f.mesh(), q);
        double a = avg_direct(f, q);
        for (std::size_t i = b; i < e; ++i) out[i] = std::max(out[i], a);
    }
    return out;
}

std::vector<DyadicCube> full_tree(const Mesh& m) { return all_cubes(m); }

}  // namespace

TEST_CASE("average examples") {
    Mesh m(1, 2);
    GridFunction one(m, 1.0);
    for (const auto& q : all_cubes(m)) CHECK(average(one, q) == 1.0);
    GridFunction f(m, std::vector<double>{1, 2, 3, 4});
    CHECK(average(f, DyadicCube{1, {0}}) == doctest::Approx(1.5).epsilon(1e-15));
    GridFunction half(m, std::vector<double>{1, 0, 0, 0});
    CHECK(average(half, DyadicCube{1, {0}}, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(average(f, DyadicCube{3, {0}}), Error);
}

TEST_CASE("stopping cubes examples") {
    Mesh m(1, 2);
    GridFunction one(m, 1.0);
    CHECK(cz_stopping_cubes(one, 2.0).empty());
    auto root = cz_stopping_cubes(one, 0.5);
    REQUIRE(root.size() == 1);
    CHECK(root[0] == DyadicCube{0, {0}});
    GridFunction f(m, std::vector<double>{4, 0, 0, 0});
    auto s = cz_stopping_cubes(f, 1.5);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == DyadicCube{1, {0}});
    CHECK_THROWS_AS(cz_stopping_cubes(f, 0.0), Error);
}

TEST_CASE("stopping cubes are maximal, disjoint and cover the level set") {
    gen::Rng r(101);
    for (int trial = 0; trial < 40; ++trial) {
        Mesh m(1 + trial % 2, trial % 2 ? 3 : 5);
        GridFunction f = gen::sparse_nonneg(m, r, 0.5);
        auto mf = maximal_direct(f);
        double lambda = r.uniform(0.2, 3.0);
        auto cubes = cz_stopping_cubes(f, lambda);
        std::vector<int> cover(f.size(), 0);
        for (const auto& q : cubes) {
            CHECK(avg_direct(f, q) > lambda);
            if (q.level > 0) CHECK(avg_direct(f, parent(q)) <= lambda);
            auto [b, e] = cell_range(m, q);
            for (std::size_t i = b; i < e; ++i) ++cover[i];
        }
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(cover[i] <= 1);
            CHECK((cover[i] == 1) == (mf[i] > lambda));
        }
    }
}

TEST_CASE("sparsity examples") {
    Mesh m1(1, 1);
    auto d = is_sparse(m1, full_tree(m1), 0.5, SparseMethod::Exact);
    CHECK(d.sparse);
    REQUIRE(d.witness);
    CHECK(check_witness(m1, d.cubes, *d.witness, 0.5));

    for (int L = 1; L <= 4; ++L) {
        Mesh m(1, L);
        double eta = 1.0 / (L + 1);
        CHECK(is_sparse(m, full_tree(m), eta, SparseMethod::Exact).sparse);
        CHECK(is_sparse(m, full_tree(m), eta, SparseMethod::Fast).sparse);
        CHECK_FALSE(is_sparse(m, full_tree(m), eta * 1.01, SparseMethod::Exact).sparse);
        auto fast = is_sparse(m, full_tree(m), eta * 1.01, SparseMethod::Fast);
        CHECK_FALSE(fast.sparse);
        REQUIRE(fast.violator);
        CHECK(*fast.violator == DyadicCube{0, {0}});
    }

    Mesh m(2, 2);
    std::vector<DyadicCube> disjoint_family{{1, {0, 0}}, {2, {2, 3}}, {2, {3, 2}}};
    auto dd = is_sparse(m, disjoint_family, 1.0);
    CHECK(dd.sparse);
    CHECK(check_witness(m, dd.cubes, *dd.witness, 1.0));
    CHECK_THROWS_AS(is_sparse(m, disjoint_family, 0.0), Error);
    CHECK_THROWS_AS(is_sparse(m, disjoint_family, 1.5), Error);
}

TEST_CASE("packing and flow decisions agree exhaustively") {
    for (int L = 1; L <= 3; ++L) {
        Mesh m(1, L);
        auto all = all_cubes(m);
        const std::size_t n = all.size();
        for (double eta : {1.0, 0.75, 0.5, 0.4, 1.0 / 3.0, 0.25}) {
            for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
                if (__builtin_popcount(mask) > 12) continue;
                std::vector<DyadicCube> s;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask >> i & 1) s.push_back(all[i]);
                auto a = is_sparse(m, s, eta, SparseMethod::Fast);
                auto b = is_sparse(m, s, eta, SparseMethod::Exact);
                REQUIRE(a.sparse == b.sparse);
                if (a.sparse) {
                    CHECK(check_witness(m, a.cubes, *a.witness, eta));
                    CHECK(check_witness(m, b.cubes, *b.witness, eta));
                }
            }
        }
    }
    gen::Rng r(7);
    Mesh m(1, 4);
    for (int t = 0; t < 300; ++t) {
        auto s = gen::random_family(m, r, 1 + r.below(12));
        double eta = r.uniform(0.2, 1.0);
        CHECK(is_sparse(m, s, eta, SparseMethod::Fast).sparse == is_sparse(m, s, eta, SparseMethod::Exact).sparse);
    }
}

TEST_CASE("collection text round trip") {
    Mesh m(2, 2);
    std::vector<DyadicCube> s{{0, {0, 0}}, {1, {1, 0}}, {2, {0, 3}}};
    auto dec = is_sparse(m, s, 0.5, SparseMethod::Fast);
    REQUIRE(dec.sparse);
    SparseCollection c{m, dec.cubes, 0.5, dec.witness};
    auto text = collection_to_text(c);
    auto back = collection_from_text(text, m, 0.5);
    CHECK(back.cubes == c.cubes);
    REQUIRE(back.witness);
    CHECK(*back.witness == *c.witness);
    CHECK(collection_to_text(back) == text);

    try {
        collection_from_text("0 0 0\n1 9\n", m, 0.5);
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("sparse renormalization examples and postconditions") {
    Mesh m(1, 3);
    GridFunction one(m, 1.0);
    auto r1 = sparse_renormalize(m, {DyadicCube{0, {0}}}, 0.5, one);
    REQUIRE(r1.cubes.size() == 1);
    CHECK(r1.cubes[0] == DyadicCube{0, {0}});
    CHECK(r1.C >= 1.0);

    gen::Rng r(23);
    GridFunction f = gen::positive(m, r);
    std::vector<DyadicCube> disjoint_family{{1, {0}}, {2, {2}}, {3, {7}}};
    auto r2 = sparse_renormalize(m, disjoint_family, 0.5, f);
    CHECK(r2.cubes == disjoint_family);

    auto check_post = [&](const Mesh& mm, const std::vector<DyadicCube>& s, double nu, const GridFunction& g) {
        auto res = sparse_renormalize(mm, s, nu, g);
        for (const auto& q : res.cubes) {
            double sum = 0.0;
            for (const auto& c : children_in(res.cubes, q)) sum += cube_measure(c, mm.d);
            CHECK(sum <= (1.0 - nu) * cube_measure(q, mm.d) * (1 + 1e-12));
        }
        CHECK(check_witness(mm, res.cubes, res.witness, nu));
        CHECK(is_sparse(mm, res.cubes, nu, SparseMethod::Exact).sparse);
        auto as = sparse_direct(g, s);
        auto ae = sparse_direct(g, res.cubes);
        for (std::size_t i = 0; i < as.size(); ++i) CHECK(as[i] <= res.C * ae[i] * (1 + 1e-12));
    };
    check_post(m, all_cubes(m), 0.5, one);
    for (int t = 0; t < 30; ++t) {
        Mesh mm(1 + t % 2, t % 2 ? 2 : 4);
        auto s = gen::random_family(mm, r, 2 + r.below(10));
        check_post(mm, s, r.uniform(0.1, 0.9), gen::sparse_nonneg(mm, r));
    }
    CHECK_THROWS_AS(sparse_renormalize(m, disjoint_family, 1.0, f), Error);
}

TEST_CASE("weak decomposition examples and bounds") {
    Mesh m(1, 4);
    GridFunction one(m, 1.0);
    auto tree = all_cubes(m);
    auto packed = sparse_renormalize(m, tree, 0.5, one).cubes;
    auto wd = weak_decomposition(m, packed, 0.5, one);
    CHECK(wd.layers.empty());
    auto wc = check_weak_decomposition(m, packed, 0.5, one, one, wd);
    CHECK(wc.lhs == 0.0);
    CHECK(wc.rhs == 0.0);

    // packing violated: the full tree has child measure |Q|
    try {
        weak_decomposition(m, tree, 0.5, one);
        FAIL("expected a precondition error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Precondition);
        CHECK(std::string(e.what()).find("0 0") != std::string::npos);
    }

    gen::Rng r(31);
    for (int t = 0; t < 30; ++t) {
        Mesh mm(1, 4);
        double nu = r.uniform(0.2, 0.8);
        GridFunction f = gen::sparse_nonneg(mm, r, 0.6);
        for (auto& v : f.values()) v *= r.uniform(0.01, 0.3);
        auto s = sparse_renormalize(mm, gen::random_family(mm, r, 3 + r.below(12)), nu, f).cubes;
        auto d = weak_decomposition(mm, s, nu, f);
        std::size_t assigned = 0;
        for (const auto& layer : d.layers) {
            assigned += layer.cubes.size();
            for (std::size_t i = 0; i < layer.cubes.size(); ++i) {
                double meas = 0.0;
                for (const auto& q : layer.F[i]) {
                    CHECK(contains(layer.cubes[i], q));
                    meas += cube_measure(q, mm.d);
                }
                CHECK(meas <= std::pow(1 - nu, std::ldexp(1.0, layer.m)) * cube_measure(layer.cubes[i], mm.d) *
                                  (1 + 1e-12));
            }
        }
        CHECK(assigned + d.unassigned == s.size());
        GridFunction g = gen::sparse_nonneg(mm, r, 0.2);
        // direct oracle for the left side
        auto as = sparse_direct(f, s);
        auto mf = maximal_direct(f);
        double lhs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (as[i] > 2.0 && !(mf[i] > 0.25)) lhs += std::fabs(g[i]) * mm.cell_measure();
        auto c = check_weak_decomposition(mm, s, nu, f, g, d);
        CHECK(c.lhs == doctest::Approx(lhs).epsilon(1e-12));
        CHECK(c.lhs <= c.rhs * (1 + 1e-12) + 1e-15);
    }

    // averages at most 1/4 put every cube in a layer
    GridFunction small(m, 0.2);
    auto d2 = weak_decomposition(m, packed, 0.5, small);
    std::size_t total = 0;
    for (const auto& layer : d2.layers) total += layer.cubes.size();
    CHECK(total == packed.size());
}

TEST_CASE("weak decomposition on a long chain has a nonzero left side") {
    Mesh m(1, 10);
    std::vector<DyadicCube> chain;
    for (int k = 0; k <= 10; ++k) chain.push_back(DyadicCube{k, {0}});
    GridFunction f(m, 0.2);
    gen::Rng r(3);
    GridFunction g = gen::positive(m, r);
    auto d = weak_decomposition(m, chain, 0.4, f);
    REQUIRE(d.layers.size() == 1);
    CHECK(d.layers[0].m == 1);
    auto c = check_weak_decomposition(m, chain, 0.4, f, g, d);
    CHECK(c.lhs == doctest::Approx(g[0] * m.cell_measure()).epsilon(1e-14));
    CHECK(c.lhs <= c.rhs);
    CHECK(c.worst_layer <= 1.0 + 1e-12);
}
