#include "dyadlab/verify.hpp"

#include <omp.h>

#include <cmath>
#include <exception>

namespace dyadlab {

namespace {

double slack(double tol, double rhs) { return tol * std::max(1.0, std::fabs(rhs)); }

json lebesgue_doc(double p, double sigma = 0.0) {
    json j{{"type", "lebesgue"}, {"p", exponent_json(p)}};
    if (sigma > 0.0) j["weight"] = json{{"generator", "lognormal"}, {"sigma", sigma}};
    return j;
}

json two_level_vl() {
    return json{{"type", "variable"}, {"p", {{"generator", "two_level"}, {"a", 1.5}, {"b", 3.0}, {"split", 0.5}}}};
}

json orlicz_doc() {
    return json{{"type", "orlicz"}, {"phi", {{"kind", "variable"}, {"p", {{"generator", "two_level"}, {"a", 2.0}, {"b", 4.0}, {"split", 0.25}}}}}};
}

SuiteConfig make(const std::string& id, std::vector<int> depths, int instances, std::vector<json> spaces,
                 json params = json::object(), double tol = 1e-9) {
    SuiteConfig s;
    s.id = id;
    s.depths = std::move(depths);
    s.instances = instances;
    s.spaces = std::move(spaces);
    s.params = std::move(params);
    s.tol = tol;
    return s;
}

std::vector<SuiteInfo> build_registry() {
    std::vector<SuiteInfo> r;
    auto add = [&](std::string id, bool banach, bool probe, SuiteFn fn, SuiteConfig def) {
        def.id = id;
        r.push_back(SuiteInfo{std::move(id), banach, probe, std::move(fn), std::move(def)});
    };
    add("anchors", false, false, suite_anchors, make("anchors", {1}, 0, {}, json::object(), 1e-12));
    add("averaging", true, false, suite_averaging,
        make("averaging", {1, 2, 3}, 20, {lebesgue_doc(1, 1.0), lebesgue_doc(INFINITY, 1.0), lebesgue_doc(2, 1.0)}));
    add("chain", true, false, suite_chain,
        make("chain", {3}, 50,
             {lebesgue_doc(1), lebesgue_doc(INFINITY), lebesgue_doc(1.5, 0.5), lebesgue_doc(2, 1.0),
              lebesgue_doc(3, 0.75)}));
    add("duality", true, false, suite_duality,
        make("duality", {1, 2, 3}, 100,
             {lebesgue_doc(1, 0.5), lebesgue_doc(2, 1.0), lebesgue_doc(3, 0.5), lebesgue_doc(INFINITY, 0.5),
              two_level_vl(), orlicz_doc()},
             json{{"fs_p", 2.0}, {"fs_depths", {2, 3, 4, 5}}, {"fs_instances", 40}, {"fs_growth", 2.0}}, 1e-8));
    add("rdf", true, false, suite_rdf,
        make("rdf", {4}, 50, {lebesgue_doc(2)}, json{{"series_tol", 1e-10}, {"a1_tol", 1e-6}}));
    add("luxemburg", false, false, suite_luxemburg,
        make("luxemburg", {3}, 30, {two_level_vl(), orlicz_doc()}, json{{"exponents", {1.0, 2.0, 3.7}}}, 1e-10));
    add("appendix", false, false, suite_appendix,
        make("appendix", {2, 3, 4}, 30, {lebesgue_doc(2)},
             json{{"nu_min", 0.2}, {"nu_max", 0.8}, {"stability_depths", {2, 3, 4, 5}}, {"r", 2.0}, {"growth", 2.0}},
             1e-12));
    add("theorem_c", true, false, suite_theorem_c,
        make("theorem_c", {2, 3}, 20,
             {lebesgue_doc(2, 1.0), lebesgue_doc(1.5, 0.5), lebesgue_doc(3, 0.75), lebesgue_doc(2), two_level_vl()},
             json{{"bracket_tol", 1e-6}, {"generic_depth", 2}}));
    add("self_improvement", false, false, suite_self_improvement,
        make("self_improvement", {2, 3, 4, 5}, 2, {lebesgue_doc(2, 0.5), lebesgue_doc(3, 0.5)},
             json{{"C", 4.0}, {"eta", 0.5}, {"bound", 8.0}}));
    add("examples", false, false, suite_examples,
        make("examples", {3, 4, 5, 6}, 0, {},
             json{{"p", 1.5}, {"q", 3.0}, {"bounded_growth", 1.2}, {"divergent_growth", 1.2}}));
    add("probe", false, true, suite_probe,
        make("probe", {2, 3, 4}, 8,
             {lebesgue_doc(2), two_level_vl(),
              json{{"type", "morrey"}, {"p", 1.5}, {"q", 3.0}}}));
    for (auto& s : r) {
        s.defaults.budget.starts = 4;
        s.defaults.budget.rounds = 25;
        s.defaults.budget.samples = 64;
    }
    return r;
}

}  // namespace

void Recorder::guard(const std::string& id, Cert lc, Cert rc) const {
    if (strict_ && (lc == Cert::LowerBound || rc == Cert::LowerBound))
        fail(ErrorKind::Certification, suite_ + "." + id + ": LOWER_BOUND quantity in an asserted position");
}

void Recorder::le(const std::string& id, const std::string& inst, double lhs, Cert lc, double rhs, Cert rc,
                  double tol, bool witness_dominated, const std::string& note) {
    Assertion a{id, inst, "<=", lhs, rhs, lc, rc, tol, rc == Cert::Exact || witness_dominated, true, note};
    if (a.asserted) guard(id, lc, rc);
    a.passed = lhs <= rhs + slack(tol, rhs);
    rep_.assertions.push_back(std::move(a));
}

void Recorder::eq(const std::string& id, const std::string& inst, double lhs, Cert lc, double rhs, Cert rc,
                  double tol, const std::string& note) {
    Assertion a{id, inst, "==", lhs, rhs, lc, rc, tol, lc == Cert::Exact && rc == Cert::Exact, true, note};
    if (strict_) guard(id, lc, rc);
    a.passed = (std::isinf(lhs) && lhs == rhs) || std::fabs(lhs - rhs) <= slack(tol, rhs);
    rep_.assertions.push_back(std::move(a));
}

void Recorder::check(const std::string& id, const std::string& inst, bool ok, const std::string& note, Cert basis) {
    guard(id, basis, Cert::Exact);
    rep_.assertions.push_back(Assertion{id, inst, "check", ok ? 1.0 : 0.0, 1.0, basis, Cert::Exact, 0.0, true, ok, note});
}

void Recorder::report(const std::string& id, const std::string& inst, double lhs, Cert lc, double rhs, Cert rc,
                      const std::string& note) {
    rep_.assertions.push_back(Assertion{id, inst, "<=", lhs, rhs, lc, rc, 0.0, false, lhs <= rhs, note});
}

void Recorder::row(const std::string& inst, const std::string& quantity, double value, Cert c) {
    rep_.rows.push_back(Row{inst, quantity, value, c});
}

void Recorder::row(const std::string& inst, const ConstantReport& r) {
    row(inst, r.name, r.value, r.cert);
    if (r.cert == Cert::LowerBound && std::isfinite(r.upper)) row(inst, r.name + ".upper", r.upper, Cert::Exact);
}

const std::vector<SuiteInfo>& suite_registry() {
    static const std::vector<SuiteInfo> r = build_registry();
    return r;
}

const SuiteInfo& suite_info(const std::string& id) {
    for (const auto& s : suite_registry())
        if (s.id == id) return s;
    fail(ErrorKind::Config, "unknown suite '" + id + "'");
}

SuiteReport run_suite(const SuiteConfig& cfg, bool strict) {
    const SuiteInfo& info = suite_info(cfg.id);
    SuiteReport rep;
    try {
        rep = info.run(SuiteContext{cfg, strict});
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Diagnostic) throw;
        rep.assertions.push_back(Assertion{cfg.id + ".error", "", "check", 0, 1, Cert::Exact, Cert::Exact, 0, true, false, e.what()});
    }
    rep.id = cfg.id;
    rep.seed = cfg.seed;
    rep.meta["depths"] = cfg.depths;
    rep.meta["d"] = cfg.d;
    rep.meta["instances"] = cfg.instances;
    rep.meta["tolerance"] = cfg.tol;
    rep.meta["params"] = cfg.params;
    return rep;
}

void for_instances(int n, const std::string& suite, bool strict, SuiteReport& into,
                   const std::function<void(int, Recorder&)>& body) {
    std::vector<Recorder> recs;
    recs.reserve(std::size_t(std::max(n, 0)));
    for (int i = 0; i < n; ++i) recs.emplace_back(suite, strict);
    std::vector<std::exception_ptr> errs(std::size_t(std::max(n, 0)));
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
        try {
            body(i, recs[std::size_t(i)]);
        } catch (...) {
            errs[std::size_t(i)] = std::current_exception();
        }
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    for (auto& r : recs) into.append(std::move(r.out()));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t suite_seed(std::uint64_t master, const std::string& id) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : id) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return mix_seed(master, h);
}

MaximalBound maximal_bound(const SpaceSpec& x, const Budget& b, double safety) {
    SpaceSpec c = canonical(x);
    if (const auto* wl = std::get_if<WeightedLebesgue>(&c.node)) {
        const auto& v = wl->w.values();
        bool flat = std::all_of(v.begin(), v.end(), [&](double t) { return t == v.front(); });
        if (flat && wl->p > 1.0 && std::isfinite(wl->p)) return {conjugate_exponent(wl->p), true, "doob"};
    }
    EstimateOptions o;
    o.budget = b;
    ConstantReport r = op_norm(dyadic_maximal(), c, Target::Strong, o);
    if (r.cert == Cert::Exact) return {r.value, true, "exact"};
    if (std::isfinite(r.upper)) return {r.upper, true, "upper"};
    return {r.value * safety, false, "lower_bound_times_safety"};
}

}  // namespace dyadlab
