#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "suite_util.hpp"

namespace dyadlab {

using namespace suites;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SpaceSpec instance_space(const SuiteConfig& c, std::size_t k, const Mesh& m, std::uint64_t seed) {
    return space_from_doc(c.spaces.at(k), m, seed);
}

// |Q|^{-1} ||1_Q||_X ||1_Q||_X'
std::pair<double, Cert> cube_constant(const SpaceSpec& x, const DyadicCube& q, const Budget& b) {
    const Mesh& m = x.mesh();
    GridFunction ind = indicator(m, q);
    Estimate n = norm_estimate(x, ind, b);
    DualResult d = kothe_dual_norm(x, ind, b);
    return {n.value * d.value / cube_measure(q, m.d), weakest(n.cert, d.cert)};
}

std::vector<GridFunction> cube_witnesses(const SpaceSpec& x, const Budget& b) {
    std::vector<GridFunction> out;
    for (const auto& q : all_cubes(x.mesh())) out.push_back(averaging_witness(x, q, b));
    return out;
}

}  // namespace

SuiteReport suite_anchors(const SuiteContext& c) {
    SuiteReport out = begin(c);
    Recorder rec(c.cfg.id, c.strict);
    const double tol = c.cfg.tol;
    const int L = c.cfg.depths.empty() ? 1 : c.cfg.depths.front();
    Mesh m(c.cfg.d, std::max(L, 1));
    for (double p : {1.0, 1.5, 2.0, kInf}) {
        for (double v : {1.0, 3.7}) {
            auto r = muckenhoupt_weight_constant(GridFunction(m, v), p);
            std::string inst = "w=" + std::to_string(v).substr(0, 3) + ",p=" + exponent_json(p).dump();
            rec.eq("weight_constant_flat", inst, r.value, r.cert, 1.0, Cert::Exact, tol);
            rec.row(inst, r);
        }
    }
    Mesh m1(1, 1);
    auto r = muckenhoupt_weight_constant(GridFunction(m1, std::vector<double>{1.0, 2.0}), 2.0);
    rec.eq("weight_constant_two_cells", "w=(1,2),p=2", r.value, r.cert, 1.25, Cert::Exact, tol);
    rec.row("w=(1,2),p=2", r);

    Mesh m3(1, 3);
    SpaceSpec l1 = lebesgue(m3, 1.0);
    auto a = muckenhoupt_space_constant(l1);
    rec.eq("lebesgue1_A", "L1@L3", a.value, a.cert, 1.0, Cert::Exact, tol);
    auto mn = op_norm(dyadic_maximal(), lebesgue(m3, kInf), Target::Strong);
    rec.eq("maximal_Linf", "Linf@L3", mn.value, mn.cert, 1.0, Cert::Exact, tol);
    GridFunction atom = indicator(m3, DyadicCube{3, {0}});
    double ratio = norm(l1, apply(dyadic_maximal(), atom)) / norm(l1, atom);
    rec.eq("maximal_L1_atom", "L1@L3", ratio, Cert::Exact, 2.5, Cert::Exact, tol);
    out.append(std::move(rec.out()));
    return out;
}

SuiteReport suite_averaging(const SuiteContext& c) {
    SuiteReport out = begin(c);
    const auto& cfg = c.cfg;
    for_instances(cfg.instances, cfg.id, c.strict, out, [&](int i, Recorder& rec) {
        std::uint64_t seed = mix_seed(cfg.seed, std::uint64_t(i));
        Rng rng(seed);
        int L = cfg.depths[std::size_t(i) % cfg.depths.size()];
        Mesh m(cfg.d, L);
        SpaceSpec x = instance_space(cfg, std::size_t(i) % cfg.spaces.size(), m, seed);
        auto cubes = all_cubes(m);
        DyadicCube q = cubes[rng.below(cubes.size())];
        EstimateOptions o = options(c, seed);
        auto [target, tc] = cube_constant(x, q, o.budget);
        auto t = op_norm(averaging(q), x, Target::Strong, o, {averaging_witness(x, q, o.budget)});
        std::string inst = describe(x) + "@L" + std::to_string(L) + ",Q=" + to_string(q);
        rec.eq("averaging_norm", inst, t.value, t.cert, target, tc, cfg.tol);
        rec.row(inst, t);
        rec.row(inst, "cube_constant", target, tc);
    });
    return out;
}

SuiteReport suite_chain(const SuiteContext& c) {
    SuiteReport out = begin(c);
    const auto& cfg = c.cfg;
    for_instances(cfg.instances, cfg.id, c.strict, out, [&](int i, Recorder& rec) {
        std::uint64_t seed = mix_seed(cfg.seed, std::uint64_t(i));
        Rng rng(mix_seed(seed, 7));
        int L = cfg.depths[std::size_t(i / int(cfg.spaces.size())) % cfg.depths.size()];
        Mesh m(cfg.d, L);
        SpaceSpec x = instance_space(cfg, std::size_t(i) % cfg.spaces.size(), m, seed);
        EstimateOptions o = options(c, seed);
        const std::string inst = label(describe(x), L, i);
        const double tol = cfg.tol;

        auto A = muckenhoupt_space_constant(x, o);
        auto seeds = cube_witnesses(x, o.budget);
        auto weak = op_norm(dyadic_maximal(), x, Target::Weak, o, seeds);
        auto As = a_strong_constant(x, o);
        std::vector<GridFunction> strong_seeds = seeds;
        if (As.witness.contains("f")) strong_seeds.push_back(function_from_json(m, As.witness.at("f")));
        auto strong = op_norm(dyadic_maximal(), x, Target::Strong, o, strong_seeds);
        for (const auto* r : {&A, &weak, &As, &strong}) rec.row(inst, *r);

        // the weak search starts from every cube's averaging witness, the
        // strong search from the A_strong witness
        rec.le("A_le_weak", inst, A.value, A.cert, weak.value, weak.cert, tol, true);
        rec.le("weak_le_A_strong", inst, weak.value, weak.cert, As.value, As.cert, tol);
        rec.le("A_strong_le_strong", inst, As.value, As.cert, strong.value, strong.cert, tol, true);

        // level sets of M f: v ||1_E|| <= [X]_A_strong ||f 1_E||, E = {M f >= v}
        std::vector<GridFunction> fs;
        if (As.witness.contains("f")) fs.push_back(function_from_json(m, As.witness.at("f")));
        for (int k = 0; k < 4; ++k) fs.push_back(k % 2 ? spiky(m, rng) : random_nonneg(m, rng, 0.3));
        double worst = 0.0;
        for (const auto& f : fs) {
            GridFunction mf = apply(dyadic_maximal(), f);
            std::set<double> levels(mf.values().begin(), mf.values().end());
            for (double v : levels) {
                if (!(v > 0.0)) continue;
                GridFunction e(m, 0.0), fe(m, 0.0);
                for (std::size_t j = 0; j < m.cells(); ++j)
                    if (mf[j] >= v) {
                        e[j] = 1.0;
                        fe[j] = std::fabs(f[j]);
                    }
                Estimate ne = norm_estimate(x, e, o.budget), nf = norm_estimate(x, fe, o.budget);
                double lhs = v * ne.value, rhs = As.value * nf.value;
                worst = std::max(worst, lhs / rhs);
                rec.le("level_set_refinement", inst, lhs, ne.cert, rhs, weakest(As.cert, nf.cert), tol);
            }
        }
        rec.row(inst, "level_set_ratio_max", worst, Cert::LowerBound);

        const SpaceSpec cx = canonical(x);
        const auto* wl = std::get_if<WeightedLebesgue>(&cx.node);
        bool flat = wl && std::all_of(wl->w.values().begin(), wl->w.values().end(), [](double t) { return t == 1.0; });
        if (flat && wl->p == 1.0) {
            // finest atom: ||M 1_I||_1 / |I| = 1 + L/2
            rec.le("L1_strict_gap", inst, 1.0 + 0.5 * L, Cert::Exact, strong.value, strong.cert, tol);
            rec.eq("L1_A_strong", inst, As.value, As.cert, 1.0, Cert::Exact, tol);
        }
        if (flat && std::isinf(wl->p)) {
            for (const auto* r : {&A, &weak, &As, &strong}) rec.eq("Linf_all_one." + r->name, inst, r->value, r->cert, 1.0, Cert::Exact, tol);
        }
    });
    return out;
}

SuiteReport suite_duality(const SuiteContext& c) {
    SuiteReport out = begin(c);
    const auto& cfg = c.cfg;
    const std::size_t ns = cfg.spaces.size();
    // A and A_strong of X and X' per (space, depth)
    const int pairs = int(ns * cfg.depths.size());
    for_instances(pairs, cfg.id, c.strict, out, [&](int i, Recorder& rec) {
        std::uint64_t seed = mix_seed(cfg.seed, std::uint64_t(i));
        int L = cfg.depths[std::size_t(i) / ns];
        Mesh m(cfg.d, L);
        SpaceSpec x = instance_space(cfg, std::size_t(i) % ns, m, seed);
        SpaceSpec xd = kothe_dual(x);
        EstimateOptions o = options(c, seed);
        const std::string inst = label(describe(x), L);
        auto a = muckenhoupt_space_constant(x, o), ad = muckenhoupt_space_constant(xd, o);
        rec.eq("dual_A", inst, ad.value, ad.cert, a.value, a.cert, cfg.tol);
        auto s = a_strong_constant(x, o), sd = a_strong_constant(xd, o);
        rec.eq("dual_A_strong", inst, sd.value, sd.cert, s.value, s.cert, cfg.tol);
        for (const auto* r : {&a, &s}) rec.row(inst, *r);
        rec.row(inst, "dual." + ad.name, ad.value, ad.cert);
        rec.row(inst, "dual." + sd.name, sd.value, sd.cert);
    });

    const int Lb = *std::max_element(cfg.depths.begin(), cfg.depths.end());
    for_instances(cfg.instances, cfg.id, c.strict, out, [&](int i, Recorder& rec) {
        std::uint64_t seed = mix_seed(cfg.seed, 1000 + std::uint64_t(i));
        Rng rng(seed);
        Mesh m(cfg.d, Lb);
        SpaceSpec x = instance_space(cfg, std::size_t(i) % ns, m, seed);
        GridFunction f = i % 3 == 0 ? random_signed(m, rng) : random_nonneg(m, rng, 0.25);
        Budget b = cfg.budget;
        b.seed = seed;
        Estimate n = norm_estimate(x, f, b);
        DualResult bd = kothe_dual_norm(kothe_dual(x), f, b);
        const std::string inst = label(describe(x), Lb, i);
        rec.eq("bidual_norm", inst, bd.value, bd.cert, n.value, n.cert, cfg.tol);
        // independent of the formula: pair |f| with the returned X' witness
        if (bd.witness.size() == m.cells()) {
            Estimate nw = norm_estimate(kothe_dual(x), bd.witness, b);
            double pairing = 0.0;
            for (std::size_t j = 0; j < m.cells(); ++j) pairing += std::fabs(f[j]) * bd.witness[j] * m.cell_measure();
            rec.eq("bidual_pairing", inst, pairing / nw.value, nw.cert, n.value, n.cert, cfg.tol);
        }
    });

    // Fefferman-Stein: R = int (M f)^p g / int f^p M g, maximized per depth
    const double p = param(cfg, "fs_p");
    const double growth = param(cfg, "fs_growth");
    const int nfs = cfg.params.at("fs_instances").get<int>();
    std::vector<int> depths = cfg.params.at("fs_depths").get<std::vector<int>>();
    Recorder rec(cfg.id, c.strict);
    std::vector<double> rmax;
    for (int L : depths) {
        Mesh m(cfg.d, L);
        std::vector<double> ratios(std::size_t(std::max(nfs, 0)), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < nfs; ++i) {
            Rng rng(mix_seed(cfg.seed, 5000 + std::uint64_t(L) * 1000 + std::uint64_t(i)));
            GridFunction f = spiky(m, rng), g = random_nonneg(m, rng, 0.5);
            GridFunction mf = apply(dyadic_maximal(), f, Exec::Serial), mg = apply(dyadic_maximal(), g, Exec::Serial);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t j = 0; j < m.cells(); ++j) {
                lhs += std::pow(mf[j], p) * g[j];
                rhs += std::pow(f[j], p) * mg[j];
            }
            ratios[std::size_t(i)] = lhs / rhs;
        }
        double r = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
        rmax.push_back(r);
        rec.row("fefferman_stein@L" + std::to_string(L), "R_max", r, Cert::LowerBound);
    }
    for (std::size_t k = 0; k + 1 < rmax.size(); ++k) {
        std::string inst = "L" + std::to_string(depths[k]) + "->L" + std::to_string(depths[k + 1]);
        rec.check("fefferman_stein_stability", inst, std::isfinite(rmax[k + 1]) && rmax[k + 1] <= growth * rmax[k],
                  "R_max " + std::to_string(rmax[k]) + " -> " + std::to_string(rmax[k + 1]));
    }
    out.append(std::move(rec.out()));
    return out;
}

SuiteReport suite_rdf(const SuiteContext& c) {
    SuiteReport out = begin(c);
    const auto& cfg = c.cfg;
    const double series_tol = param(cfg, "series_tol"), a1_tol = param(cfg, "a1_tol");
    const int L = cfg.depths.front();
    Mesh m(cfg.d, L);
    for (std::size_t k = 0; k < cfg.spaces.size(); ++k) {
        SpaceSpec x = instance_space(cfg, k, m, mix_seed(cfg.seed, 100 + k));
        MaximalBound B = maximal_bound(x, cfg.budget);
        out.meta["B." + describe(x)] = json{{"B", B.B}, {"certified", B.certified}, {"source", B.source}};
        const Cert bc = B.certified ? Cert::Exact : Cert::LowerBound;
        for_instances(cfg.instances, cfg.id, c.strict, out, [&](int i, Recorder& rec) {
            Rng rng(mix_seed(cfg.seed, 1000 * (k + 1) + std::uint64_t(i)));
            GridFunction f = i % 2 ? random_signed(m, rng) : spiky(m, rng);
            f = scaled(f, 1.0 / norm(x, f));
            RdfResult r = rdf_majorant(x, f, B.B, series_tol);
            const std::string inst = label(describe(x), L, i);
            bool dom = true;
            for (std::size_t j = 0; j < m.cells(); ++j) dom = dom && r.w[j] >= std::fabs(f[j]);
            rec.check("majorant_dominates", inst, dom);
            rec.le("majorant_norm", inst, r.norm_w, Cert::Exact, 2.0 * r.norm_f, Cert::Exact, 1e-9);
            rec.le("majorant_a1", inst, r.a1, Cert::Exact, r.ratio_bound, bc, a1_tol);
            rec.check("series_tail", inst, r.tail < series_tol, "tail " + std::to_string(r.tail));
            rec.row(inst, "a1", r.a1);
            rec.row(inst, "terms", r.terms);
            rec.row(inst, "norm_ratio", r.norm_w / r.norm_f);
        });
    }
    return out;
}

SuiteReport suite_luxemburg(const SuiteContext& c) {
    SuiteReport out = begin(c);
    const auto& cfg = c.cfg;
    const int L = cfg.depths.front();
    Mesh m(cfg.d, L);
    std::vector<double> ps = cfg.params.at("exponents").get<std::vector<double>>();
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const double p = ps[k];
        SpaceSpec vl = variable_lebesgue(GridFunction(m, p), GridFunction(m, 1.0));
        SpaceSpec lp = lebesgue(m, p);
        for_instances(cfg.instances, cfg.id, c.strict, out, [&](int i, Recorder& rec) {
            Rng rng(mix_seed(cfg.seed, 100 * (k + 1) + std::uint64_t(i)));
            GridFunction f = i % 2 ? random_signed(m, rng) : random_nonneg(m, rng, 0.3);
            double lhs = norm(vl, f), rhs = std::pow(p, -1.0 / p) * norm(lp, f);
            rec.eq("constant_exponent_reduction", "p=" + exponent_json(p).dump() + "#" + std::to_string(i), lhs,
                   Cert::Exact, rhs, Cert::Exact, cfg.tol);
        });
    }
    for (std::size_t k = 0; k < cfg.spaces.size(); ++k) {
        SpaceSpec x = instance_space(cfg, k, m, mix_seed(cfg.seed, 9000 + k));
        for_instances(cfg.instances, cfg.id, c.strict, out, [&](int i, Recorder& rec) {
            Rng rng(mix_seed(cfg.seed, 20000 + 100 * k + std::uint64_t(i)));
            GridFunction f = random_nonneg(m, rng, 0.2), g = i % 2 ? spiky(m, rng) : random_nonneg(m, rng, 0.2);
            double pairing = 0.0;
            for (std::size_t j = 0; j < m.cells(); ++j) pairing += std::fabs(f[j] * g[j]) * m.cell_measure();
            Estimate nf = norm_estimate(x, f, cfg.budget);
            DualResult ng = kothe_dual_norm(x, g, cfg.budget);
            rec.le("amemiya_hoelder", label(describe(x), L, i), pairing, Cert::Exact, nf.value * ng.value,
                   weakest(nf.cert, ng.cert), 1e-9);
        });
    }
    return out;
}

}  // namespace dyadlab
