#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dyadlab/kernels.hpp"
#include "dyadlab/spaces.hpp"

namespace dyadlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// |Q|^{e} for every slot
std::vector<double> level_powers(const Mesh& m, double e) {
    std::vector<double> out(m.cube_count());
    for (int k = 0; k <= m.L; ++k) {
        double v = std::pow(2.0, -double(k) * m.d * e);
        std::fill(out.begin() + m.level_offset(k), out.begin() + m.level_offset(k + 1), v);
    }
    return out;
}

double inv_q(double q) { return std::isinf(q) ? 0.0 : 1.0 / q; }

// Convex, nonincreasing, piecewise linear on [0, inf); zero past the last
// breakpoint.
struct PL {
    std::vector<double> t, v;
    double at(double s) const {
        if (s >= t.back()) return v.back();
        auto it = std::upper_bound(t.begin(), t.end(), s);
        std::size_t j = std::size_t(it - t.begin());
        double a = (s - t[j - 1]) / (t[j] - t[j - 1]);
        return v[j - 1] + a * (v[j] - v[j - 1]);
    }
};

PL add(const PL& a, const PL& b) {
    PL r;
    std::vector<double> ts;
    std::merge(a.t.begin(), a.t.end(), b.t.begin(), b.t.end(), std::back_inserter(ts));
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (double s : ts) {
        r.t.push_back(s);
        r.v.push_back(a.at(s) + b.at(s));
    }
    return r;
}

// min_{s >= t} (s - t) c + G(s)
PL lift(const PL& g, double c) {
    std::size_t k = 0;
    while (k + 1 < g.t.size()) {
        double slope = (g.v[k + 1] - g.v[k]) / (g.t[k + 1] - g.t[k]);
        if (slope >= -c) break;
        ++k;
    }
    if (k == 0) return g;
    PL r;
    r.t.push_back(0.0);
    r.v.push_back(g.v[k] + g.t[k] * c);
    for (std::size_t j = k; j < g.t.size(); ++j) {
        r.t.push_back(g.t[j]);
        r.v.push_back(g.v[j]);
    }
    return r;
}

DualResult morrey_dual_p1(const Morrey& s, const GridFunction& g) {
    const Mesh& m = g.mesh();
    const double mu = m.cell_measure();
    // mass u_x = f_x w_x mu; constraints u(Q) <= cap_Q = |Q|^{1 - 1/q}
    std::vector<double> cap = level_powers(m, 1.0 - inv_q(s.q));
    std::vector<double> h(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) h[i] = std::fabs(g[i]) / s.w[i];

    // greedy is optimal on the laminar capacity polymatroid
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });
    std::vector<double> left = cap;
    GridFunction f(m, 0.0);
    double primal = 0.0;
    for (std::size_t x : order) {
        if (h[x] == 0.0) break;
        double u = kInf;
        std::size_t code = x;
        for (int k = m.L; k >= 0; --k, code >>= m.d) u = std::min(u, left[m.level_offset(k) + code]);
        if (u <= 0.0) continue;
        code = x;
        for (int k = m.L; k >= 0; --k, code >>= m.d) left[m.level_offset(k) + code] -= u;
        f[x] = u / (s.w[x] * mu);
        primal += u * h[x];
    }

    // dual LP: min sum cap_Q lambda_Q with sum_{Q ni x} lambda_Q >= h_x
    std::vector<PL> cur(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) {
        double c = cap[m.level_offset(m.L) + x];
        if (h[x] > 0.0)
            cur[x] = PL{{0.0, h[x]}, {c * h[x], 0.0}};
        else
            cur[x] = PL{{0.0}, {0.0}};
    }
    for (int k = m.L - 1; k >= 0; --k) {
        std::vector<PL> next(m.cubes_at(k));
        for (std::size_t q = 0; q < next.size(); ++q) {
            PL acc = cur[q * m.fanout()];
            for (std::size_t c = 1; c < m.fanout(); ++c) acc = add(acc, cur[q * m.fanout() + c]);
            next[q] = lift(acc, cap[m.level_offset(k) + q]);
        }
        cur = std::move(next);
    }
    double dual = cur[0].at(0.0);

    DualResult r;
    r.value = primal;
    r.upper = std::max(primal, dual);
    r.cert = (dual - primal) <= 1e-10 * std::max(dual, 1e-300) ? Cert::Exact : Cert::LowerBound;
    double n = morrey_norm(s, f);
    if (n > 0.0)
        for (auto& v : f.values()) v /= n;
    r.witness = f;
    return r;
}

DualResult morrey_dual_surrogate(const Morrey& s, const GridFunction& g, const Budget& b) {
    const Mesh& m = g.mesh();
    const double mu = m.cell_measure();
    const double p = s.p, pc = p / (p - 1.0), t = pc - 1.0;
    const std::vector<double> cpq = level_powers(m, (inv_q(s.q) - 1.0 / p) * p);
    const std::size_t n = g.size(), nq = m.cube_count();
    std::vector<double> ag(n), wp(n);
    for (std::size_t i = 0; i < n; ++i) {
        ag[i] = std::fabs(g[i]);
        wp[i] = std::pow(s.w[i], p);
    }
    std::vector<double> y(nq, 1.0 / double(nq)), slot(nq), W(n), v(n), grad(nq);
    GridFunction f(m, 0.0), best_f(m, 0.0);
    double lo = 0.0, up = kInf;
    for (int it = 0; it < b.max_iter; ++it) {
        for (std::size_t q = 0; q < nq; ++q) slot[q] = y[q] * cpq[q];
        prefix_sum(m, slot.data(), nullptr, W.data(), Exec::Serial);
        double hsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            W[i] *= wp[i];
            if (ag[i] == 0.0) {
                v[i] = 0.0;
                f[i] = 0.0;
                continue;
            }
            double gp = std::pow(ag[i], pc);
            double Wt = std::pow(W[i], -t);
            hsum += gp * Wt * mu;
            v[i] = gp * Wt / W[i] * wp[i];
            f[i] = std::pow(ag[i] / W[i], pc - 1.0);
        }
        up = std::min(up, std::pow(hsum, 1.0 / pc));
        if (it < 64 || it % 8 == 0 || it + 1 == b.max_iter) {
            double pair = 0.0;
            for (std::size_t i = 0; i < n; ++i) pair += f[i] * ag[i] * mu;
            double nf = morrey_norm(s, f);
            if (nf > 0.0 && pair / nf > lo) {
                lo = pair / nf;
                best_f = f;
                for (auto& x : best_f.values()) x /= nf;
            }
            if (up - lo <= b.gap * up) break;
        }
        cube_integrals(m, v.data(), grad.data(), Exec::Serial);
        double total = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            y[q] *= std::pow(cpq[q] * grad[q], 1.0 / pc);
            total += y[q];
        }
        if (!(total > 0.0)) break;
        for (auto& x : y) x /= total;
    }
    DualResult r;
    r.value = lo;
    r.upper = std::max(lo, up);
    r.cert = Cert::LowerBound;
    r.witness = best_f;
    return r;
}

}  // namespace

double morrey_norm(const Morrey& s, const GridFunction& f) {
    check_same_mesh(s.w.mesh(), f.mesh(), "morrey_norm");
    const Mesh& m = f.mesh();
    if (std::isinf(s.p)) {
        double best = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) best = std::max(best, std::fabs(f[i]) * s.w[i]);
        return best;
    }
    std::vector<double> vals(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) vals[i] = std::pow(std::fabs(f[i]) * s.w[i], s.p);
    std::vector<double> I = cube_integrals(m, vals);
    std::vector<double> c = level_powers(m, inv_q(s.q) - 1.0 / s.p);
    double best = 0.0;
    for (std::size_t q = 0; q < I.size(); ++q) best = std::max(best, c[q] * std::pow(I[q], 1.0 / s.p));
    return best;
}

DualResult morrey_norming(const Morrey& s, const GridFunction& g) {
    const Mesh& m = g.mesh();
    DualResult r;
    r.value = morrey_norm(s, g);
    r.witness = GridFunction(m, 0.0);
    if (r.value == 0.0) return r;
    std::vector<double> vals(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) vals[i] = std::pow(std::fabs(g[i]) * s.w[i], s.p);
    std::vector<double> I = cube_integrals(m, vals);
    std::vector<double> c = level_powers(m, inv_q(s.q) - 1.0 / s.p);
    std::size_t best = 0;
    for (std::size_t q = 0; q < I.size(); ++q)
        if (c[q] * std::pow(I[q], 1.0 / s.p) > c[best] * std::pow(I[best], 1.0 / s.p)) best = q;
    // Hoelder extremal of g w on the worst cube
    const double nq = std::pow(I[best], 1.0 / s.p);
    auto [lo, hi] = cell_range(m, best);
    for (std::size_t x = lo; x < hi; ++x) {
        double a = std::fabs(g[x]) * s.w[x];
        r.witness[x] = c[best] * std::pow(a / nq, s.p - 1.0) * s.w[x];
    }
    return r;
}

DualResult morrey_dual(const Morrey& s, const GridFunction& g, const Budget& b) {
    check_same_mesh(s.w.mesh(), g.mesh(), "morrey_dual");
    if (s.p == s.q || std::isinf(s.q))
        return kothe_dual_norm(weighted_lebesgue(std::isinf(s.q) ? s.q : s.p, s.w), g, b);
    if (s.p == 1.0) return morrey_dual_p1(s, g);
    return morrey_dual_surrogate(s, g, b);
}

}  // namespace dyadlab
