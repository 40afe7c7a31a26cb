#include "dyadlab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <random>

#include "dyadlab/dyadic.hpp"
#include "dyadlab/search.hpp"

namespace dyadlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const WeightedLebesgue* as_lebesgue(const SpaceSpec& y) { return std::get_if<WeightedLebesgue>(&y.node); }

json budget_json(const Budget& b) {
    return json{{"seed", b.seed},         {"starts", b.starts}, {"rounds", b.rounds},
                {"samples", b.samples},   {"max_iter", b.max_iter}, {"gap", b.gap}};
}

ConstantReport base(const std::string& name, const std::string& space, const Budget& b) {
    ConstantReport r;
    r.name = name;
    r.space = space;
    r.budget = b;
    return r;
}

// keep the larger value; ties go to the smaller serialized witness
void merge(ConstantReport& into, double value, double upper, Cert cert, json witness) {
    if (value > into.value || into.witness.empty() || (value == into.value && witness.dump() < into.witness.dump())) {
        into.value = value;
        into.witness = std::move(witness);
    }
    into.upper = (into.upper == kInf || upper == kInf) ? kInf : std::max(into.upper, upper);
    into.cert = weakest(into.cert, cert);
}

// [w]_p factor pair on a cell set
double weight_product(const GridFunction& w, double p, const std::vector<std::size_t>& cells) {
    const double n = double(cells.size());
    if (p == 1.0) {
        double a = 0.0, mn = kInf;
        for (std::size_t c : cells) a += w[c], mn = std::min(mn, w[c]);
        return (a / n) / mn;
    }
    if (std::isinf(p)) {
        double a = 0.0, mx = 0.0;
        for (std::size_t c : cells) a += 1.0 / w[c], mx = std::max(mx, w[c]);
        return mx * (a / n);
    }
    const double pc = p / (p - 1.0);
    double a = 0.0, b = 0.0;
    for (std::size_t c : cells) a += std::pow(w[c], p), b += std::pow(w[c], -pc);
    return std::pow(a / n, 1.0 / p) * std::pow(b / n, 1.0 / pc);
}

std::vector<std::size_t> cells_of(const Mesh& m, const DyadicCube& q) {
    auto [b, e] = cell_range(m, q);
    std::vector<std::size_t> out;
    for (std::size_t c = b; c < e; ++c) out.push_back(c);
    return out;
}

double fw_direct(const GridFunction& v, const DyadicCube& q) {
    const Mesh& m = v.mesh();
    auto avg = cube_averages(v);
    auto [b, e] = cell_range(m, q);
    double vq = 0.0, integral = 0.0;
    for (std::size_t c = b; c < e; ++c) {
        vq += v[c];
        double best = 0.0;
        DyadicCube cc = cell_cube(m, c);
        while (true) {
            best = std::max(best, avg[slot_of(m, cc)]);
            if (cc.level == q.level) break;
            cc = parent(cc);
        }
        integral += best;
    }
    return integral / vq;
}

double cube_a_value(const SpaceSpec& x, const DyadicCube& q, const Budget& b, double* upper, Cert* cert) {
    const Mesh& m = x.mesh();
    GridFunction ind = indicator(m, q);
    Estimate n = norm_estimate(x, ind, b);
    DualResult d = kothe_dual_norm(x, ind, b);
    const double mq = cube_measure(q, m.d);
    if (upper) *upper = n.upper * d.upper / mq;
    if (cert) *cert = weakest(n.cert, d.cert);
    return n.value * d.value / mq;
}

double target_norm(const SpaceSpec& x, Target t, const GridFunction& f, const Budget& b) {
    return t == Target::Strong ? norm_estimate(x, f, b).value : weak_norm_estimate(x, f, b).value;
}

bool monotone(const OperatorSpec& t) { return !std::holds_alternative<SharpMaximal>(t.node); }

bool linear(const OperatorSpec& t) {
    return std::holds_alternative<Averaging>(t.node) || std::holds_alternative<DisjointAveraging>(t.node) ||
           std::holds_alternative<SparseOperator>(t.node);
}

std::vector<DyadicCube> family_of(const OperatorSpec& t) {
    if (const auto* s = std::get_if<Averaging>(&t.node)) return {s->cube};
    if (const auto* s = std::get_if<DisjointAveraging>(&t.node)) return s->family;
    if (const auto* s = std::get_if<SparseOperator>(&t.node)) return s->family;
    return {};
}

GridFunction local_norm_function(const SpaceSpec& x, const std::vector<DyadicCube>& fam, const GridFunction& f,
                                 const Budget& b) {
    const Mesh& m = x.mesh();
    GridFunction F(m, 0.0);
    for (const auto& q : fam) {
        GridFunction ind = indicator(m, q);
        GridFunction fq = f;
        for (std::size_t i = 0; i < fq.size(); ++i) fq[i] *= ind[i];
        double v = norm_estimate(x, fq, b).value / norm_estimate(x, ind, b).value;
        auto [lo, hi] = cell_range(m, q);
        for (std::size_t c = lo; c < hi; ++c) F[c] = v;
    }
    return F;
}

double g_ratio(const SpaceSpec& x, const std::vector<DyadicCube>& fam, const GridFunction& f, const GridFunction& g,
               const Budget& b) {
    const Mesh& m = x.mesh();
    double s = 0.0;
    for (const auto& q : fam) {
        GridFunction ind = indicator(m, q), fq = f, gq = g;
        for (std::size_t i = 0; i < fq.size(); ++i) fq[i] *= ind[i], gq[i] *= ind[i];
        s += norm_estimate(x, fq, b).value * kothe_dual_norm(x, gq, b).value;
    }
    double den = norm_estimate(x, f, b).value * kothe_dual_norm(x, g, b).value;
    return den > 0.0 ? s / den : 0.0;
}

std::vector<std::vector<double>> standard_seeds(const Mesh& m) {
    std::vector<std::vector<double>> seeds;
    seeds.push_back(std::vector<double>(m.cells(), 1.0));
    const int top = std::min(m.L, 3);
    for (std::size_t s = 1; s < m.level_offset(top + 1); ++s) {
        auto [b, e] = cell_range(m, s);
        std::vector<double> v(m.cells(), 0.0);
        for (std::size_t c = b; c < e; ++c) v[c] = 1.0;
        seeds.push_back(std::move(v));
    }
    if (m.cells() <= 64)
        for (std::size_t c = 0; c < m.cells(); ++c) {
            std::vector<double> v(m.cells(), 0.0);
            v[c] = 1.0;
            seeds.push_back(std::move(v));
        }
    return seeds;
}

void split_partitions(const Mesh& m, const DyadicCube& q, std::vector<std::vector<DyadicCube>>& out) {
    out.clear();
    out.push_back({q});
    if (q.level == m.L) return;
    std::vector<std::vector<DyadicCube>> acc{{}};
    for (const auto& c : children(q)) {
        std::vector<std::vector<DyadicCube>> sub;
        split_partitions(m, c, sub);
        std::vector<std::vector<DyadicCube>> next;
        for (const auto& a : acc)
            for (const auto& s : sub) {
                auto v = a;
                v.insert(v.end(), s.begin(), s.end());
                next.push_back(std::move(v));
            }
        acc = std::move(next);
    }
    for (auto& a : acc) {
        std::sort(a.begin(), a.end());
        out.push_back(std::move(a));
    }
}

std::vector<DyadicCube> random_partition(const Mesh& m, std::mt19937_64& rng) {
    std::vector<DyadicCube> out, stack{DyadicCube{0, std::vector<int>(m.d, 0)}};
    while (!stack.empty()) {
        DyadicCube q = stack.back();
        stack.pop_back();
        if (q.level < m.L && (rng() >> 11) * 0x1.0p-53 < 0.5) {
            for (auto& c : children(q)) stack.push_back(std::move(c));
        } else {
            out.push_back(q);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// body(i) for i < n on the OpenMP pool; the first exception is rethrown
template <class F>
void parallel_for(std::size_t n, F&& body) {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(dyadlab_constants_err)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) { return std::size_t(rng() % n); }

struct FamilyPlan {
    std::vector<std::vector<DyadicCube>> families;
    bool exhaustive = false;
    json search;
};

FamilyPlan partition_plan(const Mesh& m, const EstimateOptions& o) {
    FamilyPlan plan;
    const std::size_t cap = 5000;
    std::size_t count = partition_count(m, cap + 1);
    bool can = count <= cap;
    if (o.mode == SearchMode::Exhaustive)
        require(can, ErrorKind::Precondition, "exhaustive antichain search needs at most 5000 partitions");
    if (can && o.mode != SearchMode::Random) {
        plan.families = all_partitions(m);
        plan.exhaustive = true;
        plan.search = json{{"mode", "exhaustive"}, {"partitions", plan.families.size()}};
    } else {
        std::mt19937_64 rng(o.budget.seed);
        plan.families.push_back({DyadicCube{0, std::vector<int>(m.d, 0)}});
        std::vector<DyadicCube> leaves;
        for (std::size_t c = 0; c < m.cells(); ++c) leaves.push_back(cell_cube(m, c));
        plan.families.push_back(leaves);
        for (int s = 0; s < o.budget.samples; ++s) plan.families.push_back(random_partition(m, rng));
        plan.search = json{{"mode", "random"}, {"partitions", plan.families.size()}};
    }
    return plan;
}

}  // namespace

const char* to_string(SearchMode m) {
    switch (m) {
        case SearchMode::Auto: return "auto";
        case SearchMode::Exhaustive: return "exhaustive";
        case SearchMode::Random: return "random";
    }
    return "?";
}

SearchMode parse_search_mode(const std::string& s) {
    if (s == "auto") return SearchMode::Auto;
    if (s == "exhaustive") return SearchMode::Exhaustive;
    if (s == "random" || s == "greedy") return SearchMode::Random;
    fail(ErrorKind::Config, "unknown search mode '" + s + "'");
}

json function_json(const GridFunction& f) { return json(f.values()); }

GridFunction function_from_json(const Mesh& m, const json& j) {
    require(j.is_array(), ErrorKind::Config, "function must be an array");
    return GridFunction(m, j.get<std::vector<double>>());
}

json family_json(const std::vector<DyadicCube>& family) {
    json a = json::array();
    for (const auto& q : family) a.push_back(to_string(q));
    return a;
}

std::vector<DyadicCube> family_from_json(const json& j, int d) {
    std::vector<DyadicCube> out;
    for (const auto& s : j) out.push_back(parse_cube(s.get<std::string>(), d));
    return out;
}

json to_json(const ConstantReport& r) {
    json j{{"name", r.name},
           {"space", r.space},
           {"value", r.value},
           {"upper", std::isfinite(r.upper) ? json(r.upper) : json("inf")},
           {"certification", to_string(r.cert)},
           {"witness", r.witness},
           {"search", r.search},
           {"seed", r.budget.seed},
           {"budget", budget_json(r.budget)}};
    return j;
}

void enforce(const ConstantReport& r, const EstimateOptions& o) {
    if (o.strict && r.cert != Cert::Exact)
        fail(ErrorKind::Certification, r.name + " on " + r.space + " is only a lower bound");
}

ConstantReport muckenhoupt_weight_constant(const GridFunction& w, double p, bool shifted) {
    require(p >= 1.0, ErrorKind::Domain, "[w]_p needs p >= 1");
    require(w.all_finite() && w.all_positive(), ErrorKind::Domain, "weight must be positive and finite");
    const Mesh& m = w.mesh();
    ConstantReport r = base("muckenhoupt_p", describe(weighted_lebesgue(p, w)), Budget{});
    r.value = 0.0;
    json best;
    for (const auto& q : all_cubes(m)) {
        double v = weight_product(w, p, cells_of(m, q));
        if (v > r.value) {
            r.value = v;
            best = json{{"cube", to_string(q)}};
        }
    }
    std::size_t nshift = 0;
    if (shifted)
        for (const auto& s : shifted_cubes(m)) {
            ++nshift;
            double v = weight_product(w, p, s.cells);
            if (v > r.value) {
                r.value = v;
                json cells = json::array();
                for (std::size_t c : s.cells) cells.push_back(c);
                best = json{{"cells", cells}};
            }
        }
    if (std::isinf(p)) {
        // [w]_inf is [1/w]_1 with the factors swapped
        double a1 = 0.0;
        for (const auto& q : all_cubes(m)) a1 = std::max(a1, weight_product(reciprocal(w), 1.0, cells_of(m, q)));
        if (!shifted && std::fabs(a1 - r.value) > 1e-12 * r.value)
            fail(ErrorKind::Diagnostic, "[w]_inf and [1/w]_1 disagree");
        r.search["reciprocal_a1"] = a1;
    }
    best["p"] = exponent_json(p);
    best["weight"] = function_json(w);
    r.witness = best;
    r.upper = r.value;
    r.search["cubes"] = m.cube_count();
    r.search["shifted_cubes"] = nshift;
    return r;
}

ConstantReport fujii_wilson_constant(const GridFunction& v) {
    require(v.all_finite() && v.all_positive(), ErrorKind::Domain, "weight must be positive and finite");
    const Mesh& m = v.mesh();
    const double mu = m.cell_measure();
    auto avg = cube_averages(v);
    auto mass = cube_integrals(m, v.values());
    std::vector<double> inner(m.cube_count(), 0.0);
    // per cell: suffix maxima of the averages along its ancestor chain
    std::vector<double> chain(m.L + 1);
    for (std::size_t c = 0; c < m.cells(); ++c) {
        std::size_t code = c;
        for (int k = m.L; k >= 0; --k, code >>= m.d) chain[k] = avg[m.level_offset(k) + code];
        double run = 0.0;
        code = c;
        for (int k = m.L; k >= 0; --k, code >>= m.d) {
            run = std::max(run, chain[k]);
            inner[m.level_offset(k) + code] += run * mu;
        }
    }
    ConstantReport r = base("fujii_wilson", describe(weighted_lebesgue(1.0, v)), Budget{});
    for (const auto& q : all_cubes(m)) {
        std::size_t s = slot_of(m, q);
        double val = inner[s] / mass[s];
        if (val > r.value) {
            r.value = val;
            r.witness = json{{"cube", to_string(q)}};
        }
    }
    r.witness["weight"] = function_json(v);
    r.upper = r.value;
    r.search["cubes"] = m.cube_count();
    return r;
}

ConstantReport muckenhoupt_space_constant(const SpaceSpec& x, const EstimateOptions& o) {
    const Mesh& m = x.mesh();
    ConstantReport r = base("A", describe(x), o.budget);
    r.upper = 0.0;
    for (const auto& q : all_cubes(m)) {
        double up;
        Cert c;
        double v = cube_a_value(x, q, o.budget, &up, &c);
        if (c == Cert::Exact && v < 1.0 - 1e-9)
            fail(ErrorKind::Diagnostic, "|Q|^{-1}||1_Q|| ||1_Q||' below 1 at " + to_string(q));
        merge(r, v, up, c, json{{"cube", to_string(q)}});
    }
    if (r.cert == Cert::Exact) r.upper = r.value;
    r.search["cubes"] = m.cube_count();
    enforce(r, o);
    return r;
}

std::size_t partition_count(const Mesh& m, std::size_t cap) {
    std::size_t c = 1;
    for (int k = m.L - 1; k >= 0; --k) {
        std::size_t p = 1;
        for (std::size_t i = 0; i < m.fanout(); ++i) {
            if (p > cap / std::max<std::size_t>(c, 1)) return cap;
            p *= c;
        }
        c = std::min(cap, p + 1);
    }
    return c;
}

std::vector<std::vector<DyadicCube>> all_partitions(const Mesh& m) {
    std::vector<std::vector<DyadicCube>> out;
    split_partitions(m, DyadicCube{0, std::vector<int>(m.d, 0)}, out);
    std::sort(out.begin(), out.end());
    return out;
}

GridFunction averaging_witness(const SpaceSpec& x, const DyadicCube& q, const Budget& b) {
    const Mesh& m = x.mesh();
    GridFunction ind = indicator(m, q);
    DualResult d = kothe_dual_norm(x, ind, b);
    GridFunction f = d.witness.size() ? abs(d.witness) : ind;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= ind[i];
    double n = norm_estimate(x, f, b).value;
    if (!(n > 0.0)) {
        f = ind;
        n = norm_estimate(x, f, b).value;
    }
    for (auto& v : f.values()) v /= n;
    return f;
}

ConstantReport op_norm(const OperatorSpec& t, const SpaceSpec& x, Target target, const EstimateOptions& o,
                       const std::vector<GridFunction>& extra_seeds) {
    const Mesh& m = x.mesh();
    const Budget& b = o.budget;
    SpaceSpec y = canonical(x);
    ConstantReport r = base(target == Target::Strong ? "op_norm" : "weak_op_norm", describe(x), b);
    r.search["operator"] = describe(t);
    const double mu = m.cell_measure();
    auto ratio = [&](const GridFunction& f) {
        double n = norm_estimate(x, f, b).value;
        return n > 0.0 ? target_norm(x, target, apply(t, f, Exec::Serial), b) / n : 0.0;
    };
    const auto* wl = as_lebesgue(y);

    if (wl && wl->p == 1.0) {
        // sublinear T: the norm is convex in f, so atoms suffice
        for (std::size_t c = 0; c < m.cells(); ++c) {
            GridFunction f(m, 0.0);
            f[c] = 1.0 / (wl->w[c] * mu);
            double v = ratio(f);
            if (v > r.value) {
                r.value = v;
                r.witness = json{{"f", function_json(f)}};
            }
        }
        r.search["atoms"] = m.cells();
        if (target == Target::Strong) {
            r.upper = r.value;
        } else if (const auto* dm = std::get_if<DyadicMaximal>(&t.node); dm && !dm->shifted) {
            // A <= weak <= A_strong and both ends are [w]_1 on L^1_w
            double a1 = a1_constant(wl->w);
            r.upper = a1;
            r.cert = r.value >= a1 * (1 - 1e-12) ? Cert::Exact : Cert::LowerBound;
        } else {
            r.cert = Cert::LowerBound;
        }
        enforce(r, o);
        return r;
    }
    if (wl && std::isinf(wl->p) && monotone(t)) {
        GridFunction f = reciprocal(wl->w);
        r.value = ratio(f);
        r.upper = r.value;
        r.witness = json{{"f", function_json(f)}};
        r.search["top_element"] = true;
        return r;
    }
    if (wl && wl->p > 1.0 && std::isfinite(wl->p) && linear(t) && target == Target::Strong) {
        const std::size_t n = m.cells();
        // B(x, y) = w_x K(x, y) / w_y with T f = K f
        std::vector<double> A(n * n, 0.0);
        for (std::size_t c = 0; c < n; ++c) {
            GridFunction e(m, 0.0);
            e[c] = 1.0;
            GridFunction col = apply(t, e, Exec::Serial);
            for (std::size_t i = 0; i < n; ++i) A[i * n + c] = wl->w[i] * col[i] / wl->w[c];
        }
        auto pr = boyd_norm(A, n, wl->p, std::vector<double>(n, 1.0), b.gap, b.max_iter);
        GridFunction f(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) f[i] = pr.x[i] / wl->w[i];
        r.value = ratio(f);
        r.upper = std::max(pr.upper, r.value);
        r.cert = (r.upper - r.value) <= b.gap * r.upper ? Cert::Exact : Cert::LowerBound;
        r.witness = json{{"f", function_json(f)}};
        r.search["power_iterations"] = pr.iterations;
        enforce(r, o);
        return r;
    }

    auto seeds = standard_seeds(m);
    if (wl) seeds.push_back(reciprocal(wl->w).values());
    for (const auto& q : family_of(t)) seeds.push_back(averaging_witness(x, q, b).values());
    for (const auto& s : extra_seeds) seeds.push_back(s.values());
    std::vector<char> support(m.cells(), 1);
    auto res = ascend([&](const std::vector<double>& v) { return ratio(GridFunction(m, v)); }, seeds, support, b);
    GridFunction f(m, res.x);
    r.value = ratio(f);
    r.cert = Cert::LowerBound;
    r.witness = json{{"f", function_json(f)}};
    r.search["evaluations"] = res.evaluations;
    r.search["seeds"] = seeds.size();
    r.search["best_start"] = res.best_start;
    enforce(r, o);
    return r;
}

ConstantReport a_strong_constant(const SpaceSpec& x, const EstimateOptions& o) {
    const Mesh& m = x.mesh();
    SpaceSpec y = canonical(x);
    ConstantReport r = base("A_strong", describe(x), o.budget);
    if (o.closed_forms && as_lebesgue(y)) {
        // A_P is block diagonal on weighted Lebesgue spaces, so the sup is
        // attained by a single averaging operator
        r.upper = 0.0;
        for (const auto& q : all_cubes(m)) {
            double up;
            Cert c;
            double v = cube_a_value(x, q, o.budget, &up, &c);
            if (v > r.value || r.witness.empty())
                merge(r, v, up, c,
                      json{{"family", family_json({q})}, {"f", function_json(averaging_witness(x, q, o.budget))}});
            else
                merge(r, v, up, c, r.witness);
        }
        r.search = json{{"mode", "closed_form"}, {"cubes", m.cube_count()}};
        if (r.cert == Cert::Exact) r.upper = r.value;
        enforce(r, o);
        return r;
    }
    FamilyPlan plan = partition_plan(m, o);
    EstimateOptions inner = o;
    inner.strict = false;
    r.upper = 0.0;
    std::vector<ConstantReport> found(plan.families.size());
    parallel_for(found.size(), [&](std::size_t i) {
        found[i] = op_norm(disjoint_averaging(plan.families[i]), x, Target::Strong, inner);
    });
    for (std::size_t i = 0; i < found.size(); ++i) {
        json w = found[i].witness;
        w["family"] = family_json(plan.families[i]);
        merge(r, found[i].value, found[i].upper, found[i].cert, w);
    }
    r.search = plan.search;
    if (!plan.exhaustive) r.cert = Cert::LowerBound;
    if (r.cert == Cert::Exact) r.upper = r.value;
    enforce(r, o);
    return r;
}

ConstantReport a_sparse_constant(const SpaceSpec& x, double eta, const EstimateOptions& o) {
    require(eta > 0.0 && eta <= 1.0, ErrorKind::Domain, "sparsity parameter must lie in (0,1]");
    const Mesh& m = x.mesh();
    auto cubes = all_cubes(m);
    const std::size_t n = cubes.size();
    bool can = n <= 15;
    if (o.mode == SearchMode::Exhaustive)
        require(can, ErrorKind::Precondition, "exhaustive sparse search needs at most 15 cubes");
    std::vector<std::vector<DyadicCube>> families;
    bool exhaustive = false;
    if (can && o.mode != SearchMode::Random) {
        const std::size_t total = std::size_t(1) << n;
        std::vector<char> sparse(total, 0);
        sparse[0] = 1;
        for (std::size_t mask = 1; mask < total; ++mask) {
            std::vector<DyadicCube> fam;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1) fam.push_back(cubes[i]);
            sparse[mask] = is_sparse(m, fam, eta, SparseMethod::Fast).sparse;
        }
        for (std::size_t mask = 1; mask < total; ++mask) {
            if (!sparse[mask]) continue;
            bool maximal = true;
            for (std::size_t i = 0; i < n && maximal; ++i)
                if (!(mask >> i & 1) && sparse[mask | (std::size_t(1) << i)]) maximal = false;
            if (!maximal) continue;
            std::vector<DyadicCube> fam;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1) fam.push_back(cubes[i]);
            families.push_back(std::move(fam));
        }
        exhaustive = true;
    } else {
        std::mt19937_64 rng(o.budget.seed);
        for (int s = 0; s < o.budget.samples + 1; ++s) {
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            if (s > 0)  // the first family takes the cubes top-down
                for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
            std::vector<DyadicCube> fam;
            for (std::size_t i : order) {
                fam.push_back(cubes[i]);
                if (!is_sparse(m, fam, eta, SparseMethod::Fast).sparse) fam.pop_back();
            }
            std::sort(fam.begin(), fam.end());
            families.push_back(std::move(fam));
        }
    }
    ConstantReport r = base("A_sparse", describe(x), o.budget);
    r.upper = 0.0;
    EstimateOptions inner = o;
    inner.strict = false;
    std::vector<ConstantReport> found(families.size());
    parallel_for(found.size(), [&](std::size_t i) {
        found[i] = op_norm(sparse_operator(families[i]), x, Target::Strong, inner);
    });
    for (std::size_t i = 0; i < found.size(); ++i) {
        json w = found[i].witness;
        w["family"] = family_json(families[i]);
        merge(r, found[i].value, found[i].upper, found[i].cert, w);
    }
    r.search = json{{"mode", exhaustive ? "exhaustive" : "random"}, {"families", families.size()}, {"eta", eta}};
    if (!exhaustive) r.cert = Cert::LowerBound;
    if (r.cert == Cert::Exact) r.upper = r.value;
    enforce(r, o);
    return r;
}

GReport g_constant(const SpaceSpec& x, const EstimateOptions& o) {
    const Mesh& m = x.mesh();
    SpaceSpec y = canonical(x);
    GReport g{base("G", describe(x), o.budget), base("C2", describe(x), o.budget),
              base("C2_tilde", describe(x), o.budget)};
    const auto* wl = as_lebesgue(y);
    if (o.closed_forms && wl && wl->p >= 1.0) {
        // sequence Hoelder: all three are 1
        json w{{"family", family_json({DyadicCube{0, std::vector<int>(m.d, 0)}})},
               {"f", function_json(GridFunction(m, 1.0))},
               {"g", function_json(GridFunction(m, 1.0))}};
        for (auto* r : {&g.G, &g.C2, &g.C2_tilde}) {
            r->value = r->upper = 1.0;
            r->witness = w;
            r->search = json{{"mode", "closed_form"}};
        }
        return g;
    }
    FamilyPlan plan = partition_plan(m, o);
    const Budget& b = o.budget;
    std::vector<char> support(m.cells(), 1), support2(2 * m.cells(), 1);
    auto seeds = standard_seeds(m);
    for (auto* r : {&g.G, &g.C2, &g.C2_tilde}) r->cert = Cert::LowerBound;
    struct Found {
        AscentResult c2, c2t, g;
    };
    std::vector<Found> found(plan.families.size());
    parallel_for(found.size(), [&](std::size_t i) {
        const auto& fam = plan.families[i];
        auto c2 = [&](const std::vector<double>& v) {
            GridFunction f(m, v);
            double n = norm_estimate(x, f, b).value;
            return n > 0.0 ? norm_estimate(x, local_norm_function(x, fam, f, b), b).value / n : 0.0;
        };
        auto c2t = [&](const std::vector<double>& v) {
            GridFunction f(m, v);
            double n = norm_estimate(x, local_norm_function(x, fam, f, b), b).value;
            return n > 0.0 ? norm_estimate(x, f, b).value / n : 0.0;
        };
        found[i].c2 = ascend(c2, seeds, support, b);
        found[i].c2t = ascend(c2t, seeds, support, b);
        std::vector<std::vector<double>> seeds2;
        for (const auto& s : seeds) {
            auto v = s;
            v.insert(v.end(), s.begin(), s.end());
            seeds2.push_back(std::move(v));
        }
        found[i].g = ascend(
            [&](const std::vector<double>& v) {
                GridFunction f(m, std::vector<double>(v.begin(), v.begin() + m.cells()));
                GridFunction h(m, std::vector<double>(v.begin() + m.cells(), v.end()));
                return g_ratio(x, fam, f, h, b);
            },
            seeds2, support2, b);
    });
    for (std::size_t i = 0; i < found.size(); ++i) {
        const json fam = family_json(plan.families[i]);
        const auto& a = found[i];
        merge(g.C2, a.c2.value, kInf, Cert::LowerBound, json{{"family", fam}, {"f", a.c2.x}});
        merge(g.C2_tilde, a.c2t.value, kInf, Cert::LowerBound, json{{"family", fam}, {"f", a.c2t.x}});
        merge(g.G, a.g.value, kInf, Cert::LowerBound,
              json{{"family", fam},
                   {"f", std::vector<double>(a.g.x.begin(), a.g.x.begin() + m.cells())},
                   {"g", std::vector<double>(a.g.x.begin() + m.cells(), a.g.x.end())}});
    }
    for (auto* r : {&g.G, &g.C2, &g.C2_tilde}) {
        r->search = plan.search;
        r->upper = kInf;
    }
    enforce(g.G, o);
    return g;
}

ConvexityReport convexity_constants(const SpaceSpec& x, double r, double s, const EstimateOptions& o) {
    require(r >= 1.0 && r <= s, ErrorKind::Domain, "convexity constants need 1 <= r <= s");
    const Mesh& m = x.mesh();
    ConvexityReport out{base("convexity", describe(x), o.budget), base("concavity", describe(x), o.budget)};
    out.convexity.search["r"] = exponent_json(r);
    out.concavity.search["s"] = exponent_json(s);
    SpaceSpec y = canonical(x);
    if (const auto* wl = as_lebesgue(y); o.closed_forms && wl && r <= wl->p && wl->p <= s) {
        json w{{"members", json::array({function_json(GridFunction(m, 1.0))})}};
        for (auto* rep : {&out.convexity, &out.concavity}) {
            rep->value = rep->upper = 1.0;
            rep->witness = w;
            rep->search["mode"] = "closed_form";
        }
        return out;
    }
    auto lp_sum = [](const std::vector<double>& v, double e) {
        if (std::isinf(e)) return *std::max_element(v.begin(), v.end());
        double t = 0.0;
        for (double a : v) t += std::pow(a, e);
        return std::pow(t, 1.0 / e);
    };
    std::mt19937_64 rng(o.budget.seed);
    auto unif = [&] { return (rng() >> 11) * 0x1.0p-53; };
    for (auto* rep : {&out.convexity, &out.concavity}) {
        rep->cert = Cert::LowerBound;
        rep->value = 1.0;
        rep->witness = json{{"members", json::array({function_json(GridFunction(m, 1.0))})}};
    }
    for (int t = 0; t < o.budget.samples; ++t) {
        const int k = 2 + int(uniform_index(rng, 3));
        const int kind = int(uniform_index(rng, 3));
        std::vector<GridFunction> fam;
        for (int j = 0; j < k; ++j) {
            GridFunction f(m, 0.0);
            if (kind == 0) {  // indicators of random cubes
                std::size_t s = uniform_index(rng, m.cube_count());
                auto [lo, hi] = cell_range(m, s);
                for (std::size_t c = lo; c < hi; ++c) f[c] = 1.0;
            } else {
                for (auto& v : f.values()) v = (kind == 1 && unif() < 0.5) ? 0.0 : std::exp(2.0 * (unif() - 0.5));
            }
            if (std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0; })) f[0] = 1.0;
            fam.push_back(std::move(f));
        }
        MixedFamily F{m, std::vector<DyadicCube>(fam.size(), DyadicCube{0, std::vector<int>(m.d, 0)}), fam};
        std::vector<double> norms;
        for (const auto& f : fam) norms.push_back(norm_estimate(x, f, o.budget).value);
        json members = json::array();
        for (const auto& f : fam) members.push_back(function_json(f));
        double cv = norm_estimate(x, mixed_envelope(F, r), o.budget).value / lp_sum(norms, r);
        if (cv > out.convexity.value) {
            out.convexity.value = cv;
            out.convexity.witness = json{{"members", members}};
        }
        double den = norm_estimate(x, mixed_envelope(F, s), o.budget).value;
        double cc = den > 0.0 ? lp_sum(norms, s) / den : 0.0;
        if (cc > out.concavity.value) {
            out.concavity.value = cc;
            out.concavity.witness = json{{"members", members}};
        }
    }
    out.convexity.search["families"] = o.budget.samples;
    out.concavity.search["families"] = o.budget.samples;
    enforce(out.convexity, o);
    enforce(out.concavity, o);
    return out;
}

double reevaluate(const ConstantReport& r, const SpaceSpec& x, const std::optional<OperatorSpec>& t) {
    const Mesh& m = x.mesh();
    const json& w = r.witness;
    const Budget& b = r.budget;
    if (r.name == "muckenhoupt_p") {
        GridFunction wt = function_from_json(m, w.at("weight"));
        double p = w.at("p").is_string() ? kInf : w.at("p").get<double>();
        if (w.contains("cells")) return weight_product(wt, p, w.at("cells").get<std::vector<std::size_t>>());
        return weight_product(wt, p, cells_of(m, parse_cube(w.at("cube").get<std::string>(), m.d)));
    }
    if (r.name == "fujii_wilson")
        return fw_direct(function_from_json(m, w.at("weight")), parse_cube(w.at("cube").get<std::string>(), m.d));
    if (r.name == "A") return cube_a_value(x, parse_cube(w.at("cube").get<std::string>(), m.d), b, nullptr, nullptr);
    if (r.name == "A_strong" || r.name == "A_sparse") {
        auto fam = family_from_json(w.at("family"), m.d);
        GridFunction f = function_from_json(m, w.at("f"));
        return norm_estimate(x, apply(sparse_operator(fam), f), b).value / norm_estimate(x, f, b).value;
    }
    if (r.name == "op_norm" || r.name == "weak_op_norm") {
        require(t.has_value(), ErrorKind::Precondition, "reevaluate: operator needed");
        GridFunction f = function_from_json(m, w.at("f"));
        Target tg = r.name == "op_norm" ? Target::Strong : Target::Weak;
        return target_norm(x, tg, apply(*t, f), b) / norm_estimate(x, f, b).value;
    }
    if (r.name == "G") {
        auto fam = family_from_json(w.at("family"), m.d);
        return g_ratio(x, fam, function_from_json(m, w.at("f")), function_from_json(m, w.at("g")), b);
    }
    if (r.name == "C2" || r.name == "C2_tilde") {
        auto fam = family_from_json(w.at("family"), m.d);
        GridFunction f = function_from_json(m, w.at("f"));
        double a = norm_estimate(x, local_norm_function(x, fam, f, b), b).value;
        double c = norm_estimate(x, f, b).value;
        return r.name == "C2" ? a / c : c / a;
    }
    if (r.name == "convexity" || r.name == "concavity") {
        std::vector<GridFunction> fam;
        for (const auto& f : w.at("members")) fam.push_back(function_from_json(m, f));
        const json& e = r.search.at(r.name == "convexity" ? "r" : "s");
        double ex = e.is_string() ? kInf : e.get<double>();
        MixedFamily F{m, std::vector<DyadicCube>(fam.size(), DyadicCube{0, std::vector<int>(m.d, 0)}), fam};
        std::vector<double> norms;
        for (const auto& f : fam) norms.push_back(norm_estimate(x, f, b).value);
        double agg = 0.0;
        if (std::isinf(ex))
            agg = *std::max_element(norms.begin(), norms.end());
        else {
            for (double v : norms) agg += std::pow(v, ex);
            agg = std::pow(agg, 1.0 / ex);
        }
        double env = norm_estimate(x, mixed_envelope(F, ex), b).value;
        return r.name == "convexity" ? env / agg : agg / env;
    }
    fail(ErrorKind::Precondition, "reevaluate: unknown constant '" + r.name + "'");
}

}  // namespace dyadlab
