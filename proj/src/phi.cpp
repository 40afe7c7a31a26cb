#include "dyadlab/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dyadlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seg_slope(const TablePhi& tb, std::size_t j) { return (tb.v[j + 1] - tb.v[j]) / (tb.t[j + 1] - tb.t[j]); }

bool same_slope(double a, double b) { return std::fabs(a - b) <= 1e-13 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

}  // namespace

TablePhi make_table(std::vector<double> t, std::vector<double> v, double tail, bool capped) {
    require(!t.empty() && t.size() == v.size(), ErrorKind::Domain, "phi table needs matching nonempty t and v");
    require(t[0] == 0.0 && v[0] == 0.0, ErrorKind::Domain, "phi table must start at (0,0)");
    for (std::size_t j = 0; j + 1 < t.size(); ++j) {
        require(std::isfinite(t[j + 1]) && std::isfinite(v[j + 1]), ErrorKind::Domain, "phi table must be finite");
        require(t[j + 1] > t[j], ErrorKind::Domain, "phi table abscissae must increase");
        require(v[j + 1] >= v[j], ErrorKind::Domain, "phi table must be nondecreasing");
    }
    TablePhi tb{std::move(t), std::move(v), tail, capped};
    for (std::size_t j = 0; j + 2 < tb.t.size(); ++j) {
        double a = seg_slope(tb, j), b = seg_slope(tb, j + 1);
        require(b >= a * (1 - 1e-12), ErrorKind::Domain, "phi table is not convex");
    }
    if (capped) {
        require(tb.t.size() >= 2, ErrorKind::Domain, "capped phi table needs a positive cap");
    } else {
        require(std::isfinite(tail) && tail > 0.0, ErrorKind::Domain, "phi table needs a positive finite tail slope");
        if (tb.t.size() >= 2)
            require(tail >= seg_slope(tb, tb.t.size() - 2) * (1 - 1e-12), ErrorKind::Domain, "phi tail breaks convexity");
    }
    // drop collinear vertices so equal functions have equal tables
    TablePhi out{{0.0}, {0.0}, tail, capped};
    for (std::size_t j = 1; j < tb.t.size(); ++j) {
        double in = (tb.v[j] - out.v.back()) / (tb.t[j] - out.t.back());
        double next;
        if (j + 1 < tb.t.size())
            next = seg_slope(tb, j);
        else
            next = capped ? kInf : tail;
        if (same_slope(in, next)) continue;
        out.t.push_back(tb.t[j]);
        out.v.push_back(tb.v[j]);
    }
    if (capped && out.t.back() != tb.t.back()) {
        out.t.push_back(tb.t.back());
        out.v.push_back(tb.v.back());
    }
    return out;
}

TablePhi linear_phi(double w) {
    require(w > 0.0 && std::isfinite(w), ErrorKind::Domain, "weight must be positive");
    return make_table({0.0}, {0.0}, w, false);
}

TablePhi indicator_phi(double w) {
    require(w > 0.0 && std::isfinite(w), ErrorKind::Domain, "weight must be positive");
    return make_table({0.0, 1.0 / w}, {0.0, 0.0}, 0.0, true);
}

double phi_value(const CellPhi& phi, double t) {
    if (const auto* pw = std::get_if<PowerPhi>(&phi)) return std::pow(pw->w * t, pw->p) / pw->p;
    const auto& tb = std::get<TablePhi>(phi);
    const std::size_t n = tb.t.size();
    if (t > tb.t[n - 1]) return tb.capped ? kInf : tb.v[n - 1] + tb.tail * (t - tb.t[n - 1]);
    auto it = std::lower_bound(tb.t.begin(), tb.t.end(), t);
    std::size_t j = std::size_t(it - tb.t.begin());
    if (tb.t[j] == t) return tb.v[j];
    // t lies in (t[j-1], t[j])
    double a = (t - tb.t[j - 1]) / (tb.t[j] - tb.t[j - 1]);
    return tb.v[j - 1] + a * (tb.v[j] - tb.v[j - 1]);
}

double phi_slope(const CellPhi& phi, double t) {
    if (const auto* pw = std::get_if<PowerPhi>(&phi)) return std::pow(pw->w, pw->p) * std::pow(t, pw->p - 1.0);
    const auto& tb = std::get<TablePhi>(phi);
    const std::size_t n = tb.t.size();
    if (t > tb.t[n - 1]) return tb.capped ? kInf : tb.tail;
    if (t == 0.0) return n >= 2 ? seg_slope(tb, 0) : tb.tail;
    auto it = std::lower_bound(tb.t.begin(), tb.t.end(), t);
    std::size_t j = std::size_t(it - tb.t.begin());
    return seg_slope(tb, j - 1);
}

double phi_slope_right(const CellPhi& phi, double t) {
    if (std::holds_alternative<PowerPhi>(phi)) return phi_slope(phi, t);
    const auto& tb = std::get<TablePhi>(phi);
    const std::size_t n = tb.t.size();
    auto it = std::lower_bound(tb.t.begin(), tb.t.end(), t);
    if (it == tb.t.end() || *it != t) return phi_slope(phi, t);
    std::size_t j = std::size_t(it - tb.t.begin());
    if (j + 1 < n) return seg_slope(tb, j);
    return tb.capped ? kInf : tb.tail;
}

double phi_cap(const CellPhi& phi) {
    if (const auto* tb = std::get_if<TablePhi>(&phi)) return tb->capped ? tb->t.back() : kInf;
    return kInf;
}

double phi_tail_slope(const CellPhi& phi) {
    if (const auto* tb = std::get_if<TablePhi>(&phi)) return tb->capped ? kInf : tb->tail;
    return kInf;
}

CellPhi phi_conjugate(const CellPhi& phi) {
    if (const auto* pw = std::get_if<PowerPhi>(&phi)) return PowerPhi{pw->p / (pw->p - 1.0), 1.0 / pw->w};
    const auto& tb = std::get<TablePhi>(phi);
    const std::size_t n = tb.t.size();
    std::vector<double> u{0.0}, val{0.0};
    auto push = [&](double s, double y) {
        if (s > u.back()) {
            u.push_back(s);
            val.push_back(std::max(y, val.back()));
        }
    };
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double s = seg_slope(tb, j);
        push(s, s * tb.t[j + 1] - tb.v[j + 1]);
    }
    if (tb.capped) return make_table(u, val, tb.t[n - 1], false);
    push(tb.tail, tb.tail * tb.t[n - 1] - tb.v[n - 1]);
    return make_table(u, val, 0.0, true);
}

std::string describe(const CellPhi& phi) {
    std::ostringstream os;
    os.precision(6);
    if (const auto* pw = std::get_if<PowerPhi>(&phi)) {
        os << "power(p=" << pw->p << ",w=" << pw->w << ")";
        return os.str();
    }
    const auto& tb = std::get<TablePhi>(phi);
    os << "table(" << tb.t.size() << " vertices," << (tb.capped ? "capped" : "linear tail") << ")";
    return os.str();
}

PhiFunction::PhiFunction(const Mesh& m, std::vector<CellPhi> cells) : mesh_(m), cells_(std::move(cells)) {
    require(cells_.size() == m.cells(), ErrorKind::Structural, "phi function needs one entry per cell");
    for (const auto& c : cells_)
        if (const auto* pw = std::get_if<PowerPhi>(&c))
            require(pw->p > 1.0 && std::isfinite(pw->p) && pw->w > 0.0 && std::isfinite(pw->w), ErrorKind::Domain,
                    "power phi needs 1 < p < inf and positive weight");
}

PhiFunction PhiFunction::variable_exponent(const GridFunction& p, const GridFunction& w) {
    check_same_mesh(p.mesh(), w.mesh(), "variable exponent");
    require(w.all_positive() && w.all_finite(), ErrorKind::Domain, "weight must be positive and finite");
    std::vector<CellPhi> cells;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double e = p[i];
        require(e >= 1.0, ErrorKind::Domain, "variable exponent must lie in [1, inf]");
        if (e == 1.0)
            cells.push_back(linear_phi(w[i]));
        else if (std::isinf(e))
            cells.push_back(indicator_phi(w[i]));
        else
            cells.push_back(PowerPhi{e, w[i]});
    }
    return PhiFunction(p.mesh(), std::move(cells));
}

PhiFunction PhiFunction::uniform(const Mesh& m, const CellPhi& cell) {
    return PhiFunction(m, std::vector<CellPhi>(m.cells(), cell));
}

PhiFunction PhiFunction::sampled(const Mesh& m, const std::function<double(double)>& fn,
                                 const std::vector<double>& grid) {
    require(grid.size() >= 2 && grid[0] == 0.0, ErrorKind::Domain, "sample grid must start at 0");
    std::vector<double> v;
    for (double t : grid) v.push_back(fn(t));
    const std::size_t n = grid.size();
    double tail = (v[n - 1] - v[n - 2]) / (grid[n - 1] - grid[n - 2]);
    return uniform(m, make_table(grid, v, tail, false));
}

PhiFunction PhiFunction::conjugate() const {
    std::vector<CellPhi> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(phi_conjugate(c));
    return PhiFunction(mesh_, std::move(out));
}

double PhiFunction::modular(const GridFunction& f, double s) const {
    check_same_mesh(mesh_, f.mesh(), "modular");
    const double mu = mesh_.cell_measure();
    double total = 0.0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        double a = std::fabs(f[i]);
        if (a == 0.0) continue;
        double v = phi_value(cells_[i], a * s);
        if (std::isinf(v)) return kInf;
        total += v * mu;
    }
    return total;
}

double luxemburg_norm(const PhiFunction& phi, const GridFunction& f) {
    check_finite(f, "luxemburg_norm");
    double fmax = 0.0, lam_min = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double a = std::fabs(f[i]);
        fmax = std::max(fmax, a);
        double cap = phi_cap(phi.cell(i));
        if (a > 0.0 && std::isfinite(cap)) lam_min = std::max(lam_min, a / cap);
    }
    if (fmax == 0.0) return 0.0;
    auto rho = [&](double lam) { return phi.modular(f, 1.0 / lam); };
    if (lam_min > 0.0 && rho(lam_min) <= 1.0) return lam_min;
    double hi = std::max(lam_min, fmax);
    int guard = 0;
    while (!(rho(hi) <= 1.0)) {
        hi *= 2.0;
        if (++guard > 2100) fail(ErrorKind::Diagnostic, "luxemburg_norm: modular stays above 1");
    }
    double lo = hi;
    if (lam_min > 0.0) {
        lo = lam_min;
    } else {
        guard = 0;
        do {
            lo *= 0.5;
            if (++guard > 2100) return 0.0;
        } while (rho(lo) <= 1.0);
        hi = std::min(hi, 2.0 * lo);
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        (rho(mid) <= 1.0 ? hi : lo) = mid;
    }
    return hi;
}

AmemiyaResult amemiya_norm(const PhiFunction& phi, const GridFunction& g) {
    check_finite(g, "amemiya_norm");
    const double mu = phi.mesh().cell_measure();
    double k_cap = kInf, limit = 0.0, gmax = 0.0;
    bool linear_tails = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double a = std::fabs(g[i]);
        if (a == 0.0) continue;
        gmax = std::max(gmax, a);
        const auto& c = phi.cell(i);
        double cap = phi_cap(c);
        if (std::isfinite(cap)) k_cap = std::min(k_cap, cap / a);
        double s = phi_tail_slope(c);
        if (std::isfinite(s))
            limit += s * a * mu;
        else
            linear_tails = false;
    }
    AmemiyaResult res;
    if (gmax == 0.0) return res;
    auto F = [&](double k) { return (1.0 + phi.modular(g, k)) / k; };

    double best = kInf, best_k = 0.0;
    auto probe = [&](double k) {
        double v = F(k);
        if (v < best) {
            best = v;
            best_k = k;
        }
        return v;
    };

    double hi;
    if (std::isfinite(k_cap)) {
        hi = k_cap;
        probe(hi);
    } else {
        hi = 1.0 / gmax;
        double prev = probe(hi);
        for (int it = 0; it < 2100; ++it) {
            double v = probe(2.0 * hi);
            hi *= 2.0;
            if (v >= prev) break;
            prev = v;
            if (!std::isfinite(hi) || hi > 1e300) break;
        }
    }
    double lo = std::isfinite(k_cap) ? k_cap : hi;
    {
        double prev = probe(lo);
        for (int it = 0; it < 2100; ++it) {
            double v = probe(0.5 * lo);
            lo *= 0.5;
            if (v >= prev) break;
            prev = v;
        }
    }
    // golden section on log k; F is unimodal in k
    double a = std::log(lo), b = std::log(hi);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = probe(std::exp(x1)), f2 = probe(std::exp(x2));
    for (int it = 0; it < 300 && (b - a) > 1e-13; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = probe(std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = probe(std::exp(x2));
        }
    }
    if (!std::isfinite(best) && !linear_tails)
        fail(ErrorKind::Diagnostic, "amemiya_norm: could not bracket the minimum");
    res.value = best;
    res.k = best_k;
    if (linear_tails && limit <= best * (1.0 + 1e-12)) {
        res.value = limit;
        res.k = kInf;
        res.limit = true;
    }
    return res;
}

namespace {

// Subdifferential [lo, hi] of phi at t. The Amemiya minimizer is only known
// to ~1e-13, so t is snapped onto a nearby table vertex first.
void subgradient(const CellPhi& c, double t, double& lo, double& hi) {
    if (const auto* tb = std::get_if<TablePhi>(&c)) {
        for (double v : tb->t)
            if (std::fabs(t - v) <= 1e-9 * v) t = v;
        if (tb->capped && t >= tb->t.back()) {
            lo = phi_slope(c, t);
            hi = kInf;
            return;
        }
    }
    lo = phi_slope(c, t);
    hi = phi_slope_right(c, t);
}

// Best point of the segment lo + th * dir, th >= 0, for a ratio that is
// linear over convex in th, hence quasi-concave.
GridFunction best_selection(const GridFunction& lo, const GridFunction& dir,
                            const std::function<double(const GridFunction&)>& ratio) {
    auto at = [&](double th) {
        GridFunction h = lo;
        for (std::size_t i = 0; i < h.size(); ++i) h[i] += th * dir[i];
        return h;
    };
    bool moves = std::any_of(dir.values().begin(), dir.values().end(), [](double v) { return v > 0.0; });
    if (!moves) return lo;
    double top = 1.0, prev = ratio(at(0.0));
    for (int it = 0; it < 200; ++it) {
        double v = ratio(at(top));
        if (!(v > prev)) break;
        prev = v;
        top *= 2.0;
    }
    double a = 0.0, b = top;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = ratio(at(x1)), f2 = ratio(at(x2));
    for (int it = 0; it < 200 && b - a > 1e-14 * top; ++it) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = ratio(at(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = ratio(at(x2));
        }
    }
    double best = 0.0, bv = ratio(at(0.0));
    for (double th : {a, b, x1, x2, top})
        if (double v = ratio(at(th)); v > bv) bv = v, best = th;
    return at(best);
}

double pair_abs(const GridFunction& f, const GridFunction& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::fabs(f[i] * g[i]);
    return s * f.mesh().cell_measure();
}

// lo and direction from the subdifferentials of c_i at t_i
void selection_segment(const PhiFunction& phi, const GridFunction& g, const std::vector<double>& t,
                       GridFunction& lo, GridFunction& dir) {
    lo = GridFunction(g.mesh(), 0.0);
    dir = GridFunction(g.mesh(), 0.0);
    double scale = 0.0;
    std::vector<char> open(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == 0.0) continue;
        double a, b;
        subgradient(phi.cell(i), t[i], a, b);
        lo[i] = a;
        if (std::isfinite(b))
            dir[i] = b - a;
        else
            open[i] = 1;
        scale = std::max(scale, a);
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        if (open[i]) dir[i] = std::max(scale, 1.0);
}

}  // namespace

GridFunction luxemburg_dual_witness(const PhiFunction& phi, const GridFunction& g) {
    PhiFunction star = phi.conjugate();
    auto am = amemiya_norm(star, g);
    GridFunction f(g.mesh(), 0.0);
    if (am.limit) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i] != 0.0) f[i] = phi_cap(phi.cell(i));
    } else {
        // every selection from the subdifferential of phi* at k|g| satisfies
        // Young's equality; the right one also has modular 1
        std::vector<double> t(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) t[i] = am.k * std::fabs(g[i]);
        GridFunction lo, dir;
        selection_segment(star, g, t, lo, dir);
        f = best_selection(lo, dir, [&](const GridFunction& h) {
            double n = luxemburg_norm(phi, h);
            return n > 0.0 ? pair_abs(h, g) / n : 0.0;
        });
    }
    double n = luxemburg_norm(phi, f);
    if (n > 0.0)
        for (auto& x : f.values()) x /= n;
    return f;
}

GridFunction amemiya_dual_witness(const PhiFunction& phi, const GridFunction& f) {
    double lam = luxemburg_norm(phi, f);
    GridFunction g(f.mesh(), 0.0);
    if (lam == 0.0) return g;
    PhiFunction star = phi.conjugate();
    std::vector<double> t(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) t[i] = std::fabs(f[i]) / lam;
    GridFunction lo, dir;
    selection_segment(phi, f, t, lo, dir);
    g = best_selection(lo, dir, [&](const GridFunction& h) {
        double n = amemiya_norm(star, h).value;
        return n > 0.0 ? pair_abs(h, f) / n : 0.0;
    });
    double n = amemiya_norm(star, g).value;
    if (n > 0.0)
        for (auto& x : g.values()) x /= n;
    return g;
}

Delta2Report delta2_check(const PhiFunction& phi, double s, double t0, int steps) {
    require(t0 > 0.0 && steps >= 4, ErrorKind::Domain, "delta2_check needs t0 > 0 and at least 4 doublings");
    require(s > 0.0, ErrorKind::Domain, "delta2_check needs s > 0");
    Delta2Report rep;
    std::vector<double> grid(steps + 1);
    for (int j = 0; j <= steps; ++j) grid[j] = std::ldexp(t0, j);

    // row[j] = max over cells of the ratio whose top point is grid[j]
    std::vector<double> row2(steps + 1, 0.0), rows(steps + 1, 0.0);
    std::vector<std::size_t> cell2(steps + 1, 0), cells_(steps + 1, 0);
    std::vector<int> base_s(steps + 1, 0);
    for (std::size_t c = 0; c < phi.cells().size(); ++c) {
        std::vector<double> v(steps + 1);
        for (int j = 0; j <= steps; ++j) v[j] = phi_value(phi.cell(c), grid[j]);
        for (int j = 1; j <= steps; ++j) {
            double r;
            if (v[j - 1] > 0.0)
                r = v[j] / v[j - 1];
            else
                r = v[j] > 0.0 ? kInf : 0.0;
            if (r > row2[j]) {
                row2[j] = r;
                cell2[j] = c;
            }
            for (int i = 0; i < j; ++i) {
                double q;
                if (v[i] > 0.0)
                    q = std::ldexp(1.0, -(j - i)) == 0.0 ? 0.0 : std::pow(2.0, -(j - i) * s) * v[j] / v[i];
                else
                    q = v[j] > 0.0 ? kInf : 0.0;
                if (q > rows[j]) {
                    rows[j] = q;
                    cells_[j] = c;
                    base_s[j] = i;
                }
            }
        }
    }
    auto judge = [&](const std::vector<double>& row, double& K, int& arg) {
        K = 0.0;
        arg = 1;
        for (int j = 1; j <= steps; ++j)
            if (row[j] > K) {
                K = row[j];
                arg = j;
            }
        if (!std::isfinite(K)) return false;
        const int split = 1 + (3 * steps) / 4;
        double lower = 0.0, upper = 0.0;
        for (int j = 1; j <= steps; ++j) (j < split ? lower : upper) = std::max(j < split ? lower : upper, row[j]);
        bool rising = row[steps] > row[steps - 1] * (1 + 1e-9) && row[steps - 1] > row[steps - 2] * (1 + 1e-9);
        return !(upper > lower * (1 + 1e-9) && rising);
    };
    int a2 = 1, as = 1;
    rep.delta2 = judge(row2, rep.K2, a2);
    rep.delta_s = judge(rows, rep.Ks, as);
    if (!rep.delta2) {
        rep.witness_t = grid[a2 - 1];
        rep.witness_cell = cell2[a2];
        rep.witness_lambda = 2.0;
        rep.reason = std::isfinite(rep.K2) ? "doubling ratio still growing at the top of the grid"
                                           : "doubling ratio infinite";
    } else if (!rep.delta_s) {
        rep.witness_t = grid[base_s[as]];
        rep.witness_cell = cells_[as];
        rep.witness_lambda = std::ldexp(1.0, as - base_s[as]);
        rep.reason = "Delta^s ratio unbounded on the grid";
    }
    return rep;
}

}  // namespace dyadlab
