#include "dyadlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>

namespace dyadlab {

namespace {

std::vector<DyadicCube> dedupe(const Mesh& m, std::vector<DyadicCube> cubes) {
    for (const auto& q : cubes) check_cube(m, q);
    std::sort(cubes.begin(), cubes.end());
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
    return cubes;
}

std::vector<unsigned char> slot_mask(const Mesh& m, const std::vector<DyadicCube>& cubes) {
    std::vector<unsigned char> mask(m.cube_count(), 0);
    for (const auto& q : cubes) mask[slot_of(m, q)] = 1;
    return mask;
}

std::size_t ancestor_slot(const Mesh& m, std::size_t cell, int level) {
    return m.level_offset(level) + (cell >> ((m.L - level) * m.d));
}

// Sum of <|f|>_{Q'} over cubes Q' of the mask inside `q` that contain each cell of q.
std::vector<double> local_sparse_sum(const Mesh& m, const std::vector<unsigned char>& mask,
                                     const std::vector<double>& avg, const DyadicCube& q) {
    auto [b, e] = cell_range(m, q);
    std::vector<double> out(e - b, 0.0);
    for (std::size_t c = b; c < e; ++c) {
        double s = 0.0;
        for (int j = q.level; j <= m.L; ++j) {
            std::size_t a = ancestor_slot(m, c, j);
            if (mask[a]) s += avg[a];
        }
        out[c - b] = s;
    }
    return out;
}

}  // namespace

double average(const GridFunction& f, const DyadicCube& q, double r) {
    require(r > 0.0 && std::isfinite(r), ErrorKind::Domain, "average exponent must lie in (0, inf)");
    const Mesh& m = f.mesh();
    std::size_t slot = slot_of(m, q);
    auto [b, e] = cell_range(m, slot);
    std::vector<double> vals(m.cells(), 0.0);
    for (std::size_t i = b; i < e; ++i) vals[i] = r == 1.0 ? std::fabs(f[i]) : std::pow(std::fabs(f[i]), r);
    double a = cube_integral(m, vals.data(), slot) / cube_measure(q, m.d);
    return r == 1.0 ? a : std::pow(a, 1.0 / r);
}

std::vector<double> cube_averages(const GridFunction& f, Exec ex) {
    const Mesh& m = f.mesh();
    std::vector<double> a(m.cells());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::fabs(f[i]);
    auto out = cube_integrals(m, a, ex);
    for (int k = 0; k <= m.L; ++k) {
        const double inv = std::ldexp(1.0, k * m.d);
        for (std::size_t s = m.level_offset(k); s < m.level_offset(k + 1); ++s) out[s] *= inv;
    }
    return out;
}

std::vector<DyadicCube> cz_stopping_cubes(const GridFunction& f, double lambda) {
    require(lambda > 0.0, ErrorKind::Domain, "stopping level must be positive");
    const Mesh& m = f.mesh();
    auto avg = cube_averages(f);
    std::vector<unsigned char> covered(m.cube_count(), 0);
    std::vector<DyadicCube> out;
    for (std::size_t s = 0; s < m.cube_count(); ++s) {
        int k = level_of_slot(m, s);
        if (k > 0) {
            std::size_t p = m.level_offset(k - 1) + ((s - m.level_offset(k)) >> m.d);
            if (covered[p]) {
                covered[s] = 1;
                continue;
            }
        }
        if (avg[s] > lambda) {
            covered[s] = 1;
            out.push_back(cube_of(m, s));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------- sparsity

namespace {

SparseDecision packing_decision(const Mesh& m, const std::vector<DyadicCube>& cubes, double eta) {
    SparseDecision dec;
    dec.cubes = cubes;
    dec.method = "packing";
    std::vector<double> sub(m.cube_count(), 0.0);
    for (const auto& q : cubes) sub[slot_of(m, q)] = cube_measure(q, m.d);
    for (int k = m.L - 1; k >= 0; --k)
        for (std::size_t c = 0; c < m.cubes_at(k); ++c) {
            std::size_t s = m.level_offset(k) + c;
            std::size_t first = m.level_offset(k + 1) + c * m.fanout();
            for (std::size_t t = 0; t < m.fanout(); ++t) sub[s] += sub[first + t];
        }
    for (const auto& q : cubes) {
        double lim = cube_measure(q, m.d) / eta;
        if (sub[slot_of(m, q)] > lim * (1.0 + 1e-12)) {
            dec.violator = q;
            return dec;
        }
    }
    dec.sparse = true;

    // Smallest cubes first: each takes eta|Q| from the part of Q its
    // descendants left free. The packing bound guarantees enough room.
    std::vector<std::size_t> order(cubes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cubes[a].level > cubes[b].level; });
    std::vector<double> free(m.cells(), 1.0);
    SparseWitness w(cubes.size());
    for (std::size_t i : order) {
        const auto& q = cubes[i];
        auto [b, e] = cell_range(m, q);
        double need = eta * double(e - b);
        for (std::size_t c = b; c < e && need > 0.0; ++c) {
            if (free[c] <= 0.0) continue;
            double take = std::min(free[c], need);
            free[c] -= take;
            need -= take;
            w[i].push_back({c, take});
        }
        if (need > 1e-9 * eta * double(e - b))
            fail(ErrorKind::Diagnostic, "greedy witness ran out of room at cube " + to_string(q));
    }
    dec.witness = std::move(w);
    return dec;
}

SparseDecision flow_decision(const Mesh& m, const std::vector<DyadicCube>& cubes, double eta) {
    using namespace boost;
    using Traits = adjacency_list_traits<vecS, vecS, directedS>;
    using Graph = adjacency_list<
        vecS, vecS, directedS, no_property,
        property<edge_capacity_t, long long,
                 property<edge_residual_capacity_t, long long, property<edge_reverse_t, Traits::edge_descriptor>>>>;
    using Edge = Traits::edge_descriptor;

    // integer capacities: push_relabel checks flow conservation exactly.
    // One cell is up to 2^50 units, fewer on large meshes to keep the total
    // flow inside 63 bits.
    const double unit = std::ldexp(1.0, std::min(50, 61 - m.L * m.d));
    const std::size_t nq = cubes.size(), nc = m.cells();
    Graph g(2 + nq + nc);
    const std::size_t src = 0, sink = 1;
    auto cap = get(edge_capacity, g);
    auto rev = get(edge_reverse, g);
    auto add = [&](std::size_t u, std::size_t v, long long c) {
        Edge e1 = add_edge(u, v, g).first;
        Edge e2 = add_edge(v, u, g).first;
        cap[e1] = c;
        cap[e2] = 0;
        rev[e1] = e2;
        rev[e2] = e1;
        return e1;
    };
    long long demand = 0;
    std::vector<std::vector<std::pair<std::size_t, Edge>>> links(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        auto [b, e] = cell_range(m, cubes[i]);
        // small relative slack, well inside the 1e-12 check_witness allows
        long long need = std::llround(eta * double(e - b) * unit * (1.0 - 1e-13));
        demand += need;
        add(src, 2 + i, need);
        for (std::size_t c = b; c < e; ++c) links[i].push_back({c, add(2 + i, 2 + nq + c, (long long)unit)});
    }
    for (std::size_t c = 0; c < nc; ++c) add(2 + nq + c, sink, (long long)unit);
    long long flow = push_relabel_max_flow(g, src, sink);

    SparseDecision dec;
    dec.cubes = cubes;
    dec.method = "flow";
    dec.sparse = flow >= demand;
    if (dec.sparse) {
        auto res = get(edge_residual_capacity, g);
        SparseWitness w(nq);
        for (std::size_t i = 0; i < nq; ++i)
            for (auto [c, e] : links[i]) {
                long long used = cap[e] - res[e];
                if (used > 0) w[i].push_back({c, std::min(1.0, double(used) / unit)});
            }
        dec.witness = std::move(w);
    } else {
        // name the first cube whose packing sum is too large, if any
        auto pk = packing_decision(m, cubes, eta);
        dec.violator = pk.violator;
    }
    return dec;
}

}  // namespace

SparseDecision is_sparse(const Mesh& m, const std::vector<DyadicCube>& in, double eta, SparseMethod method) {
    require(eta > 0.0 && eta <= 1.0, ErrorKind::Domain, "sparsity parameter must lie in (0,1]");
    auto cubes = dedupe(m, in);
    if (method == SparseMethod::Auto)
        method = (m.cells() * std::max<std::size_t>(cubes.size(), 1) <= 4096) ? SparseMethod::Exact : SparseMethod::Fast;
    return method == SparseMethod::Fast ? packing_decision(m, cubes, eta) : flow_decision(m, cubes, eta);
}

bool check_witness(const Mesh& m, const std::vector<DyadicCube>& cubes, const SparseWitness& w, double eta,
                   std::string* why) {
    auto bad = [&](const std::string& s) {
        if (why) *why = s;
        return false;
    };
    if (w.size() != cubes.size()) return bad("witness size mismatch");
    std::vector<double> used(m.cells(), 0.0);
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        auto [b, e] = cell_range(m, cubes[i]);
        double mass = 0.0;
        for (const auto& sh : w[i]) {
            if (sh.cell < b || sh.cell >= e) return bad("cell outside cube " + to_string(cubes[i]));
            if (!(sh.fraction > 0.0 && sh.fraction <= 1.0)) return bad("bad fraction");
            used[sh.cell] += sh.fraction;
            mass += sh.fraction;
        }
        if (mass < eta * double(e - b) * (1.0 - 1e-12)) return bad("E_Q too small for " + to_string(cubes[i]));
    }
    for (std::size_t c = 0; c < used.size(); ++c)
        if (used[c] > 1.0 + 1e-12) return bad("cell " + std::to_string(c) + " overused");
    return true;
}

std::string collection_to_text(const SparseCollection& s) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < s.cubes.size(); ++i) {
        os << to_string(s.cubes[i]);
        if (s.witness) {
            os << " :";
            const auto& shares = (*s.witness)[i];
            for (std::size_t j = 0; j < shares.size(); ++j) {
                os << (j ? "," : " ") << shares[j].cell;
                if (shares[j].fraction != 1.0) os << '@' << shares[j].fraction;
            }
        }
        os << '\n';
    }
    return os.str();
}

SparseCollection collection_from_text(const std::string& text, const Mesh& m, double eta) {
    SparseCollection s;
    s.mesh = m;
    s.eta = eta;
    std::istringstream is(text);
    std::string line;
    SparseWitness w;
    bool any_witness = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto colon = line.find(':');
        try {
            s.cubes.push_back(parse_cube(line.substr(0, colon), m.d));
        } catch (const Error& e) {
            fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": " + e.what());
        }
        check_cube(m, s.cubes.back());
        std::vector<CellShare> shares;
        if (colon != std::string::npos) {
            any_witness = true;
            std::string rest = line.substr(colon + 1);
            std::replace(rest.begin(), rest.end(), ',', ' ');
            std::istringstream rs(rest);
            std::string tok;
            while (rs >> tok) {
                CellShare sh;
                auto at = tok.find('@');
                try {
                    sh.cell = std::stoull(tok.substr(0, at));
                    if (at != std::string::npos) sh.fraction = std::stod(tok.substr(at + 1));
                } catch (const std::exception&) {
                    fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": bad witness entry '" + tok + "'");
                }
                shares.push_back(sh);
            }
        }
        w.push_back(std::move(shares));
    }
    if (any_witness) s.witness = std::move(w);
    return s;
}

std::vector<DyadicCube> children_in(const std::vector<DyadicCube>& family, const DyadicCube& q) {
    std::vector<DyadicCube> inside;
    for (const auto& r : family)
        if (strictly_contains(q, r)) inside.push_back(r);
    std::vector<DyadicCube> out;
    for (const auto& r : inside) {
        bool maximal = true;
        for (const auto& t : inside)
            if (strictly_contains(t, r)) {
                maximal = false;
                break;
            }
        if (maximal) out.push_back(r);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> sparse_sum(const Mesh& m, const std::vector<DyadicCube>& family, const GridFunction& f,
                               Exec ex) {
    check_same_mesh(m, f.mesh(), "sparse_sum");
    auto avg = cube_averages(f, ex);
    auto mask = slot_mask(m, family);
    std::vector<double> out(m.cells());
    prefix_sum(m, avg.data(), mask.data(), out.data(), ex);
    return out;
}

double packing_ratio(const Mesh& m, const std::vector<DyadicCube>& family, DyadicCube* worst) {
    double best = 0.0;
    for (const auto& q : family) {
        double s = 0.0;
        for (const auto& c : children_in(family, q)) s += cube_measure(c, m.d);
        double r = s / cube_measure(q, m.d);
        if (r > best) {
            best = r;
            if (worst) *worst = q;
        }
    }
    return best;
}

// ---------------------------------------------------------------- Lemma-style constructions

RenormalizeResult sparse_renormalize(const Mesh& m, const std::vector<DyadicCube>& s_in, double nu,
                                     const GridFunction& f) {
    require(nu > 0.0 && nu < 1.0, ErrorKind::Domain, "nu must lie in (0,1)");
    check_same_mesh(m, f.mesh(), "sparse_renormalize");
    check_finite(f, "sparse_renormalize");
    auto s = dedupe(m, s_in);
    auto mask = slot_mask(m, s);
    auto avg = cube_averages(f);
    const double mu = m.cell_measure();

    // Localized weak (1,1) bound: over every cube Q, sup_v v |{x in Q: A_{S(Q)} f >= v}| / int_Q |f|.
    double wk = 0.0;
    for (std::size_t slot = 0; slot < m.cube_count(); ++slot) {
        DyadicCube q = cube_of(m, slot);
        double mass = avg[slot] * cube_measure(q, m.d);
        if (!(mass > 0.0)) continue;
        auto vals = local_sparse_sum(m, mask, avg, q);
        std::sort(vals.begin(), vals.end(), std::greater<>());
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i + 1 < vals.size() && vals[i + 1] == vals[i]) continue;
            wk = std::max(wk, vals[i] * double(i + 1) * mu / mass);
        }
    }

    RenormalizeResult res;
    res.weak_bound = wk;
    res.K = wk / (1.0 - nu) * (1.0 + 1e-12);
    res.C = 2.0 * res.K;

    std::map<DyadicCube, std::vector<DyadicCube>> kids;
    std::vector<DyadicCube> work;
    for (const auto& q : s) {
        bool maximal = true;
        for (const auto& t : s)
            if (strictly_contains(t, q)) {
                maximal = false;
                break;
            }
        if (maximal) work.push_back(q);
    }

    while (!work.empty()) {
        DyadicCube q0 = work.back();
        work.pop_back();
        auto& ch = kids[q0];
        std::size_t slot = slot_of(m, q0);
        if (!(avg[slot] > 0.0) || q0.level == m.L) continue;
        const double t = res.K * avg[slot];
        auto vals = local_sparse_sum(m, mask, avg, q0);
        auto [b, e] = cell_range(m, slot);
        // maximal dyadic cubes strictly inside q0 made of cells with value > t
        for (int k = q0.level + 1; k <= m.L; ++k) {
            const std::size_t side = std::size_t(1) << ((m.L - k) * m.d);
            for (std::size_t c0 = b; c0 < e; c0 += side) {
                bool all = true;
                for (std::size_t c = c0; c < c0 + side && all; ++c) all = vals[c - b] > t;
                if (!all) continue;
                DyadicCube r = cell_cube(m, c0);
                while (r.level > k) r = parent(r);
                bool covered = false;
                for (const auto& x : ch)
                    if (contains(x, r)) {
                        covered = true;
                        break;
                    }
                if (!covered) ch.push_back(r);
            }
        }
        for (const auto& r : ch) work.push_back(r);
    }

    for (const auto& [q, ch] : kids) res.cubes.push_back(q);
    std::sort(res.cubes.begin(), res.cubes.end());
    for (const auto& q : res.cubes) {
        auto [b, e] = cell_range(m, q);
        std::vector<unsigned char> taken(e - b, 0);
        for (const auto& c : kids[q]) {
            auto [cb, ce] = cell_range(m, c);
            for (std::size_t i = cb; i < ce; ++i) taken[i - b] = 1;
        }
        std::vector<CellShare> shares;
        for (std::size_t i = b; i < e; ++i)
            if (!taken[i - b]) shares.push_back({i, 1.0});
        res.witness.push_back(std::move(shares));
    }
    return res;
}

WeakDecomposition weak_decomposition(const Mesh& m, const std::vector<DyadicCube>& s_in, double nu,
                                     const GridFunction& f) {
    require(nu > 0.0 && nu < 1.0, ErrorKind::Domain, "nu must lie in (0,1)");
    check_same_mesh(m, f.mesh(), "weak_decomposition");
    auto s = dedupe(m, s_in);
    for (const auto& q : s) {
        double sum = 0.0;
        for (const auto& c : children_in(s, q)) sum += cube_measure(c, m.d);
        if (sum > (1.0 - nu) * cube_measure(q, m.d) * (1.0 + 1e-12))
            fail(ErrorKind::Precondition, "child packing fails at cube " + to_string(q));
    }
    auto avg = cube_averages(f);

    WeakDecomposition wd;
    std::map<int, std::vector<DyadicCube>> by_m;
    for (const auto& q : s) {
        double a = avg[slot_of(m, q)];
        if (!(a > 0.0) || a > 0.25) {
            ++wd.unassigned;
            continue;
        }
        int k = int(std::floor(std::log(1.0 / a) / std::log(4.0)));
        while (k > 0 && a > std::ldexp(1.0, -2 * k)) --k;
        while (a <= std::ldexp(1.0, -2 * (k + 1))) ++k;
        by_m[std::max(k, 1)].push_back(q);
    }
    for (auto& [mm, cubes] : by_m) {
        WeakLayer layer;
        layer.m = mm;
        layer.cubes = cubes;
        for (const auto& q : cubes) {
            int n = 0;
            for (const auto& t : cubes)
                if (strictly_contains(t, q)) ++n;
            layer.generation.push_back(n);
        }
        const long long jump = mm >= 40 ? -1 : (1LL << mm);
        for (std::size_t i = 0; i < cubes.size(); ++i) {
            std::vector<DyadicCube> F;
            if (jump > 0)
                for (std::size_t j = 0; j < cubes.size(); ++j)
                    if (layer.generation[j] == layer.generation[i] + jump && contains(cubes[i], cubes[j]))
                        F.push_back(cubes[j]);
            layer.F.push_back(std::move(F));
        }
        wd.layers.push_back(std::move(layer));
    }
    return wd;
}

WeakCheck check_weak_decomposition(const Mesh& m, const std::vector<DyadicCube>& s, double nu,
                                   const GridFunction& f, const GridFunction& g, const WeakDecomposition& wd) {
    check_same_mesh(m, g.mesh(), "check_weak_decomposition");
    auto a = sparse_sum(m, s, f);
    auto avg = cube_averages(f);
    std::vector<double> mf(m.cells());
    prefix_max(m, avg.data(), nullptr, mf.data());
    std::vector<double> ag(m.cells());
    for (std::size_t i = 0; i < ag.size(); ++i) ag[i] = std::fabs(g[i]);
    auto gint = cube_integrals(m, ag);

    WeakCheck out;
    std::vector<double> masked(m.cells(), 0.0);
    for (std::size_t i = 0; i < m.cells(); ++i)
        if (a[i] > 2.0 && !(mf[i] > 0.25)) masked[i] = ag[i];
    out.lhs = cube_integrals(m, masked)[0];
    for (const auto& layer : wd.layers) {
        const double scale = std::ldexp(1.0, -2 * layer.m);
        const double shrink = std::pow(1.0 - nu, std::ldexp(1.0, layer.m));
        for (std::size_t i = 0; i < layer.cubes.size(); ++i) {
            double meas = 0.0;
            for (const auto& r : layer.F[i]) {
                out.rhs += scale * gint[slot_of(m, r)];
                meas += cube_measure(r, m.d);
            }
            if (meas > 0.0) {
                double bound = shrink * cube_measure(layer.cubes[i], m.d);
                out.worst_layer = std::max(out.worst_layer, bound > 0.0 ? meas / bound : INFINITY);
            }
        }
    }
    return out;
}

}  // namespace dyadlab
