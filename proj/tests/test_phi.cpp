#include <cmath>

#include "doctest.h"
#include "dyadlab/phi.hpp"
#include "gen.hpp"

using namespace dyadlab;

namespace {

double lp(const GridFunction& f, double p) {
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::fabs(v), p) * f.mesh().cell_measure();
    return std::pow(s, 1.0 / p);
}

// grid evaluation of sup_t (s t - phi(t)) as an independent conjugate oracle
double conj_numeric(const CellPhi& phi, double s) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        double t = 20.0 * i / 200000.0;
        double v = phi_value(phi, t);
        if (std::isinf(v)) break;
        best = std::max(best, s * t - v);
    }
    return best;
}

}  // namespace

TEST_CASE("tables validate shape") {
    CHECK_THROWS_AS(make_table({0, 1, 2}, {0, 1, 1.5}, 2.0, false), Error);  // concave
    CHECK_THROWS_AS(make_table({0, 1}, {0, 1}, 0.5, false), Error);          // tail too flat
    CHECK_THROWS_AS(make_table({1, 2}, {0, 1}, 2.0, false), Error);          // not starting at 0
    auto t = make_table({0, 1, 2, 3}, {0, 1, 2, 4}, 2.0, false);
    CHECK(t.t.size() == 2);  // (1,1) and (3,4) are collinear with their neighbours
    CHECK(phi_value(t, 2.5) == doctest::Approx(3.0));
    CHECK(phi_value(t, 10.0) == doctest::Approx(4.0 + 14.0));
}

TEST_CASE("phi values and slopes") {
    PowerPhi pw{3.0, 2.0};
    CHECK(phi_value(pw, 1.5) == doctest::Approx(std::pow(3.0, 3.0) / 3.0));
    CHECK(phi_slope(pw, 1.5) == doctest::Approx(8.0 * 2.25));
    auto ind = indicator_phi(4.0);
    CHECK(phi_value(ind, 0.25) == 0.0);
    CHECK(std::isinf(phi_value(ind, 0.2500001)));
    CHECK(phi_cap(ind) == 0.25);
    auto lin = linear_phi(3.0);
    CHECK(phi_value(lin, 2.0) == 6.0);
    CHECK(phi_tail_slope(lin) == 3.0);
}

TEST_CASE("conjugates match the numeric Legendre transform") {
    std::vector<CellPhi> cases{PowerPhi{2.5, 1.3}, make_table({0, 0.5, 1.5}, {0, 0.25, 1.5}, 3.0, false),
                               make_table({0, 1, 2}, {0, 0.5, 2}, 0.0, true), linear_phi(2.0), indicator_phi(0.5)};
    for (const auto& phi : cases) {
        CellPhi star = phi_conjugate(phi);
        for (double s : {0.1, 0.4, 0.9, 1.3, 1.9, 2.6}) {
            double exact = phi_value(star, s);
            double num = conj_numeric(phi, s);
            if (std::isinf(exact)) {
                CHECK(s > phi_tail_slope(phi));
                CHECK(num >= 19.0 * (s - phi_tail_slope(phi)));
            } else {
                CHECK(exact == doctest::Approx(num).epsilon(1e-4));
            }
        }
        CellPhi back = phi_conjugate(star);
        for (double t : {0.05, 0.3, 0.7, 1.1, 1.8}) {
            double a = phi_value(phi, t), b = phi_value(back, t);
            if (std::isinf(a))
                CHECK(std::isinf(b));
            else
                CHECK(a == doctest::Approx(b).epsilon(1e-12));
        }
    }
}

TEST_CASE("luxemburg norm examples") {
    Mesh m(1, 3);
    gen::Rng r(77);
    GridFunction zero(m, 0.0);
    CHECK(luxemburg_norm(PhiFunction::uniform(m, PowerPhi{2.0, 1.0}), zero) == 0.0);
    for (int t = 0; t < 30; ++t) {
        GridFunction f = gen::sparse_nonneg(m, r);
        for (double p : {2.0, 3.7}) {
            auto phi = PhiFunction::uniform(m, PowerPhi{p, 1.0});
            CHECK(luxemburg_norm(phi, f) == doctest::Approx(std::pow(p, -1.0 / p) * lp(f, p)).epsilon(1e-10));
        }
        auto one = PhiFunction::uniform(m, linear_phi(1.0));
        CHECK(luxemburg_norm(one, f) == doctest::Approx(lp(f, 1.0)).epsilon(1e-10));
        auto inf = PhiFunction::uniform(m, indicator_phi(1.0));
        double mx = 0.0;
        for (double v : f.values()) mx = std::max(mx, v);
        CHECK(luxemburg_norm(inf, f) == doctest::Approx(mx).epsilon(1e-12));
    }
}

TEST_CASE("amemiya norm equals the dual of the luxemburg norm on lebesgue cases") {
    Mesh m(1, 3);
    gen::Rng r(78);
    for (int t = 0; t < 20; ++t) {
        GridFunction g = gen::sparse_nonneg(m, r);
        // L^1 Luxemburg: dual is the sup norm
        auto one = PhiFunction::uniform(m, linear_phi(1.0));
        double mx = 0.0;
        for (double v : g.values()) mx = std::max(mx, v);
        CHECK(amemiya_norm(one.conjugate(), g).value == doctest::Approx(mx).epsilon(1e-10));
        // L^inf Luxemburg: dual is L^1
        auto inf = PhiFunction::uniform(m, indicator_phi(1.0));
        auto am = amemiya_norm(inf.conjugate(), g);
        CHECK(am.value == doctest::Approx(lp(g, 1.0)).epsilon(1e-10));
        CHECK(am.limit);
        // t^p/p: Luxemburg norm p^{-1/p}||f||_p, dual p^{1/p}||g||_{p'}
        double p = 2.5, pc = p / (p - 1);
        auto pw = PhiFunction::uniform(m, PowerPhi{p, 1.0});
        CHECK(amemiya_norm(pw.conjugate(), g).value == doctest::Approx(std::pow(p, 1 / p) * lp(g, pc)).epsilon(1e-9));
    }
}

TEST_CASE("hoelder pairing and dual witnesses") {
    Mesh m(1, 3);
    gen::Rng r(79);
    for (int t = 0; t < 30; ++t) {
        GridFunction pe(m, 0.0);
        for (auto& v : pe.values()) v = r.uniform() < 0.2 ? INFINITY : r.uniform(1.0, 4.0);
        GridFunction w = gen::positive(m, r, 0.5, 2.0);
        auto phi = PhiFunction::variable_exponent(pe, w);
        GridFunction f = gen::sparse_nonneg(m, r), g = gen::sparse_nonneg(m, r);
        double pair = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) pair += f[i] * g[i] * m.cell_measure();
        double nf = luxemburg_norm(phi, f);
        double ng = amemiya_norm(phi.conjugate(), g).value;
        CHECK(pair <= nf * ng * (1 + 1e-9));
        auto wf = luxemburg_dual_witness(phi, g);
        CHECK(luxemburg_norm(phi, wf) == doctest::Approx(1.0).epsilon(1e-9));
        double wp = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) wp += wf[i] * g[i] * m.cell_measure();
        CHECK(wp == doctest::Approx(ng).epsilon(1e-6));
    }
}

TEST_CASE("delta2 checks") {
    Mesh m(1, 1);
    for (double p : {1.5, 2.0, 3.0}) {
        auto rep = delta2_check(PhiFunction::uniform(m, PowerPhi{p, 1.0}), p);
        CHECK(rep.delta2);
        CHECK(rep.K2 == doctest::Approx(std::pow(2.0, p)).epsilon(1e-12));
        CHECK(rep.delta_s);
        CHECK_FALSE(delta2_check(PhiFunction::uniform(m, PowerPhi{p, 1.0}), p - 0.25).delta_s);
    }
    auto inf = delta2_check(PhiFunction::uniform(m, indicator_phi(1.0)), 2.0);
    CHECK_FALSE(inf.delta2);
    std::vector<double> grid{0.0};
    for (int j = 0; j <= 60; ++j) grid.push_back(std::pow(2.0, j / 4.0) / 1024);
    auto e = PhiFunction::sampled(m, [](double t) { return std::expm1(t); }, grid);
    auto rep = delta2_check(e, 2.0, 1.0 / 1024, 15);
    CHECK_FALSE(rep.delta2);
    CHECK(rep.witness_t > 1.0);
}
