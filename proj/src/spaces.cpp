#include "dyadlab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <sstream>

#include "dyadlab/format.hpp"
#include "dyadlab/search.hpp"

namespace dyadlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

SpacePtr share(SpaceSpec x) { return std::make_shared<const SpaceSpec>(std::move(x)); }

void check_weight(const GridFunction& w) {
    require(w.size() > 0 && w.all_finite() && w.all_positive(), ErrorKind::Domain,
            "weight must be positive and finite");
}

double lebesgue_value(double p, const GridFunction& w, const GridFunction& f) {
    const double mu = f.mesh().cell_measure();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::fabs(f[i]) * w[i]);
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::fabs(f[i]) * w[i], p) * mu;
    return std::pow(s, 1.0 / p);
}

GridFunction normalized(GridFunction f, double n) {
    if (n > 0.0 && std::isfinite(n))
        for (auto& v : f.values()) v /= n;
    return f;
}

// Koethe dual of L^p_w with the Hoelder extremal as witness.
DualResult lebesgue_dual(double p, const GridFunction& w, const GridFunction& g) {
    const Mesh& m = g.mesh();
    const double mu = m.cell_measure();
    DualResult r;
    r.witness = GridFunction(m, 0.0);
    auto atom = [&](const GridFunction& score) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < score.size(); ++i)
            if (score[i] > score[best]) best = i;
        return best;
    };
    if (p < 1.0) {
        GridFunction score(m, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) score[i] = std::fabs(g[i]) / w[i] * std::pow(mu, 1.0 - 1.0 / p);
        std::size_t x = atom(score);
        r.value = score[x];
        if (r.value > 0.0) r.witness[x] = std::pow(mu, -1.0 / p) / w[x];
    } else if (p == 1.0) {
        GridFunction score(m, 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) score[i] = std::fabs(g[i]) / w[i];
        std::size_t x = atom(score);
        r.value = score[x];
        if (r.value > 0.0) r.witness[x] = 1.0 / (w[x] * mu);
    } else if (std::isinf(p)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.value += std::fabs(g[i]) / w[i] * mu;
            if (g[i] != 0.0) r.witness[i] = 1.0 / w[i];
        }
    } else {
        const double pc = p / (p - 1.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double h = std::fabs(g[i]) / w[i];
            r.value += std::pow(h, pc) * mu;
            r.witness[i] = std::pow(h, pc - 1.0) / w[i];
        }
        r.value = std::pow(r.value, 1.0 / pc);
        r.witness = normalized(r.witness, lebesgue_value(p, w, r.witness));
    }
    r.upper = r.value;
    return r;
}

DualResult generic_dual(const SpaceSpec& x, const GridFunction& g, const Budget& b) {
    const Mesh& m = g.mesh();
    const double mu = m.cell_measure();
    std::vector<char> support(g.size());
    std::vector<double> ag(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        ag[i] = std::fabs(g[i]);
        support[i] = ag[i] > 0.0;
    }
    auto obj = [&](const std::vector<double>& f) {
        GridFunction fx(m, f);
        double n = norm_estimate(x, fx, b).value;
        if (!(n > 0.0)) return -kInf;
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * ag[i] * mu;
        return s / n;
    };
    std::vector<std::vector<double>> seeds;
    seeds.push_back(ag);
    std::vector<double> ones(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) ones[i] = support[i] ? 1.0 : 0.0;
    seeds.push_back(ones);
    for (std::size_t s = 0; s < std::min(m.cube_count(), m.level_offset(std::min(m.L, 3) + 1)); ++s) {
        auto [lo, hi] = cell_range(m, s);
        std::vector<double> v(g.size(), 0.0);
        bool any = false;
        for (std::size_t c = lo; c < hi; ++c)
            if (support[c]) v[c] = 1.0, any = true;
        if (any && hi - lo < g.size()) seeds.push_back(std::move(v));
    }
    AscentResult a = ascend(obj, seeds, support, b);
    DualResult r;
    r.value = std::max(0.0, a.value);
    r.cert = Cert::LowerBound;
    GridFunction wx(m, a.x);
    r.witness = normalized(wx, norm_estimate(x, wx, b).value);
    return r;
}

}  // namespace

const char* to_string(Cert c) { return c == Cert::Exact ? "EXACT" : "LOWER_BOUND"; }

const Mesh& SpaceSpec::mesh() const {
    return std::visit(overloaded{[](const WeightedLebesgue& s) -> const Mesh& { return s.w.mesh(); },
                                 [](const VariableLebesgue& s) -> const Mesh& { return s.p.mesh(); },
                                 [](const MusielakOrlicz& s) -> const Mesh& { return s.phi.mesh(); },
                                 [](const OrliczAmemiya& s) -> const Mesh& { return s.phi.mesh(); },
                                 [](const Morrey& s) -> const Mesh& { return s.w.mesh(); },
                                 [](const Concavification& s) -> const Mesh& { return s.inner->mesh(); },
                                 [](const KotheDual& s) -> const Mesh& { return s.inner->mesh(); },
                                 [](const WeakType& s) -> const Mesh& { return s.inner->mesh(); }},
                      node);
}

double conjugate_exponent(double p) {
    require(p >= 1.0, ErrorKind::Domain, "conjugate exponent needs p >= 1");
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

SpaceSpec lebesgue(const Mesh& m, double p) { return weighted_lebesgue(p, GridFunction(m, 1.0)); }

SpaceSpec weighted_lebesgue(double p, const GridFunction& w) {
    require(p > 0.0 && !std::isnan(p), ErrorKind::Domain, "Lebesgue exponent must lie in (0, inf]");
    check_weight(w);
    return SpaceSpec{WeightedLebesgue{p, w}};
}

SpaceSpec variable_lebesgue(const GridFunction& p, const GridFunction& w) {
    check_same_mesh(p.mesh(), w.mesh(), "variable_lebesgue");
    check_weight(w);
    for (double v : p.values()) require(v >= 1.0, ErrorKind::Domain, "variable exponent must lie in [1, inf]");
    return SpaceSpec{VariableLebesgue{p, w, PhiFunction::variable_exponent(p, w)}};
}

SpaceSpec musielak_orlicz(const PhiFunction& phi) { return SpaceSpec{MusielakOrlicz{phi}}; }
SpaceSpec orlicz_amemiya(const PhiFunction& phi) { return SpaceSpec{OrliczAmemiya{phi}}; }

SpaceSpec morrey(double p, double q, const GridFunction& w) {
    require(p >= 1.0 && q >= p, ErrorKind::Domain, "Morrey exponents need 1 <= p <= q <= inf");
    check_weight(w);
    return SpaceSpec{Morrey{p, q, w}};
}

SpaceSpec block(double p, double q, const GridFunction& w) { return kothe_dual(morrey(p, q, reciprocal(w))); }

SpaceSpec concavification(const SpaceSpec& x, double r) {
    require(r > 0.0 && std::isfinite(r), ErrorKind::Domain, "concavification exponent must be positive");
    return SpaceSpec{Concavification{share(x), r}};
}

SpaceSpec kothe_dual(const SpaceSpec& x) { return SpaceSpec{KotheDual{share(x)}}; }
SpaceSpec weak_type(const SpaceSpec& x) { return SpaceSpec{WeakType{share(x)}}; }

namespace {

bool banach_canonical(const SpaceSpec& x) {
    return std::visit(overloaded{[](const WeightedLebesgue& s) { return s.p >= 1.0; },
                                 [](const Concavification& s) { return s.r <= 1.0 && banach_canonical(*s.inner); },
                                 [](const WeakType&) { return false; },
                                 [](const auto&) { return true; }},
                      x.node);
}

double k_canonical(const SpaceSpec& x) {
    return std::visit(overloaded{[](const WeightedLebesgue& s) { return s.p >= 1.0 ? 1.0 : std::pow(2.0, 1.0 / s.p - 1.0); },
                                 [](const Concavification& s) {
                                     double k = k_canonical(*s.inner);
                                     if (s.r >= 1.0) return std::pow(k, s.r) * std::pow(2.0, s.r - 1.0);
                                     if (k == 1.0 && banach_canonical(*s.inner)) return 1.0;
                                     return std::pow(2.0, 1.0 - s.r) * std::pow(k, s.r);
                                 },
                                 [](const WeakType& s) { return 2.0 * k_canonical(*s.inner); },
                                 [](const auto&) { return 1.0; }},
                      x.node);
}

std::optional<SpaceSpec> closed_dual(const SpaceSpec& z) {
    if (const auto* s = std::get_if<WeightedLebesgue>(&z.node)) {
        if (s->p >= 1.0) return weighted_lebesgue(conjugate_exponent(s->p), reciprocal(s->w));
        const double mu = s->w.mesh().cell_measure();
        GridFunction v = reciprocal(s->w);
        for (auto& x : v.values()) x *= std::pow(mu, 1.0 - 1.0 / s->p);
        return weighted_lebesgue(kInf, v);
    }
    if (const auto* s = std::get_if<VariableLebesgue>(&z.node)) return orlicz_amemiya(s->phi.conjugate());
    if (const auto* s = std::get_if<MusielakOrlicz>(&z.node)) return orlicz_amemiya(s->phi.conjugate());
    if (const auto* s = std::get_if<OrliczAmemiya>(&z.node)) return musielak_orlicz(s->phi.conjugate());
    if (const auto* s = std::get_if<KotheDual>(&z.node))
        if (banach_canonical(*s->inner)) return *s->inner;
    return std::nullopt;
}

}  // namespace

SpaceSpec canonical(const SpaceSpec& x) {
    return std::visit(
        overloaded{[&](const Morrey& s) -> SpaceSpec {
                       if (s.p == s.q) return weighted_lebesgue(s.p, s.w);
                       if (std::isinf(s.q)) return weighted_lebesgue(kInf, s.w);
                       return x;
                   },
                   [&](const Concavification& s) -> SpaceSpec {
                       SpaceSpec z = canonical(*s.inner);
                       if (s.r == 1.0) return z;
                       if (const auto* l = std::get_if<WeightedLebesgue>(&z.node))
                           return weighted_lebesgue(std::isinf(l->p) ? kInf : l->p / s.r, power(l->w, s.r));
                       if (const auto* c = std::get_if<Concavification>(&z.node))
                           return canonical(concavification(*c->inner, c->r * s.r));
                       return concavification(z, s.r);
                   },
                   [&](const KotheDual& s) -> SpaceSpec {
                       SpaceSpec z = canonical(*s.inner);
                       if (auto d = closed_dual(z)) return canonical(*d);
                       return kothe_dual(z);
                   },
                   [&](const WeakType& s) -> SpaceSpec { return weak_type(canonical(*s.inner)); },
                   [&](const auto&) -> SpaceSpec { return x; }},
        x.node);
}

bool is_banach(const SpaceSpec& x) { return banach_canonical(canonical(x)); }
double quasi_triangle_constant(const SpaceSpec& x) { return k_canonical(canonical(x)); }

Estimate norm_estimate(const SpaceSpec& x, const GridFunction& f, const Budget& b) {
    check_same_mesh(x.mesh(), f.mesh(), "norm");
    require(f.all_finite(), ErrorKind::Domain, "norm: non-finite values");
    Estimate e;
    std::visit(overloaded{[&](const WeightedLebesgue& s) { e.value = lebesgue_value(s.p, s.w, f); },
                          [&](const VariableLebesgue& s) { e.value = luxemburg_norm(s.phi, f); },
                          [&](const MusielakOrlicz& s) { e.value = luxemburg_norm(s.phi, f); },
                          [&](const OrliczAmemiya& s) { e.value = amemiya_norm(s.phi, f).value; },
                          [&](const Morrey& s) { e.value = morrey_norm(s, f); },
                          [&](const Concavification& s) {
                              Estimate in = norm_estimate(*s.inner, power(abs(f), 1.0 / s.r), b);
                              e.value = std::pow(in.value, s.r);
                              e.upper = std::pow(in.upper, s.r);
                              e.cert = in.cert;
                          },
                          [&](const KotheDual& s) {
                              DualResult d = kothe_dual_norm(*s.inner, f, b);
                              e.value = d.value;
                              e.upper = d.upper;
                              e.cert = d.cert;
                          },
                          [&](const WeakType& s) { e = weak_norm_estimate(*s.inner, f, b); }},
               x.node);
    if (e.cert == Cert::Exact) e.upper = e.value;
    return e;
}

double norm(const SpaceSpec& x, const GridFunction& f) { return norm_estimate(x, f).value; }

DualResult kothe_dual_norm(const SpaceSpec& x, const GridFunction& g, const Budget& b) {
    check_same_mesh(x.mesh(), g.mesh(), "kothe_dual_norm");
    require(g.all_finite(), ErrorKind::Domain, "kothe_dual_norm: non-finite values");
    bool zero = std::all_of(g.values().begin(), g.values().end(), [](double v) { return v == 0.0; });
    if (zero) {
        DualResult r;
        r.witness = GridFunction(g.mesh(), 0.0);
        return r;
    }
    SpaceSpec y = canonical(x);
    DualResult r;
    if (const auto* s = std::get_if<WeightedLebesgue>(&y.node)) {
        r = lebesgue_dual(s->p, s->w, g);
    } else if (const auto* s = std::get_if<VariableLebesgue>(&y.node)) {
        r.value = amemiya_norm(s->phi.conjugate(), g).value;
        r.witness = luxemburg_dual_witness(s->phi, g);
    } else if (const auto* s = std::get_if<MusielakOrlicz>(&y.node)) {
        r.value = amemiya_norm(s->phi.conjugate(), g).value;
        r.witness = luxemburg_dual_witness(s->phi, g);
    } else if (const auto* s = std::get_if<OrliczAmemiya>(&y.node)) {
        PhiFunction star = s->phi.conjugate();
        r.value = luxemburg_norm(star, g);
        r.witness = amemiya_dual_witness(star, g);
    } else if (const auto* s = std::get_if<Morrey>(&y.node)) {
        r = morrey_dual(*s, g, b);
    } else if (const auto* s = std::get_if<KotheDual>(&y.node); s && banach_canonical(*s->inner)) {
        // X'' = X
        if (const auto* mo = std::get_if<Morrey>(&s->inner->node)) {
            r = morrey_norming(*mo, g);
        } else {
            Estimate e = norm_estimate(*s->inner, g, b);
            r.value = e.value;
            r.upper = e.upper;
            r.cert = e.cert;
        }
    } else {
        r = generic_dual(y, g, b);
    }
    if (r.cert == Cert::Exact) r.upper = r.value;
    return r;
}

Estimate weak_norm_estimate(const SpaceSpec& x, const GridFunction& f, const Budget& b) {
    check_same_mesh(x.mesh(), f.mesh(), "weak_norm");
    require(f.all_finite(), ErrorKind::Domain, "weak_norm: non-finite values");
    std::vector<double> levels;
    for (double v : f.values())
        if (v != 0.0) levels.push_back(std::fabs(v));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    Estimate e;
    e.upper = 0.0;
    for (double v : levels) {
        GridFunction ind(f.mesh(), 0.0);
        for (std::size_t i = 0; i < f.size(); ++i) ind[i] = std::fabs(f[i]) >= v ? 1.0 : 0.0;
        Estimate n = norm_estimate(x, ind, b);
        e.value = std::max(e.value, v * n.value);
        e.upper = std::max(e.upper, v * n.upper);
        e.cert = weakest(e.cert, n.cert);
    }
    return e;
}

double weak_norm(const SpaceSpec& x, const GridFunction& f) { return weak_norm_estimate(x, f).value; }

GridFunction mixed_envelope(const MixedFamily& F, double r) {
    require(r >= 1.0, ErrorKind::Domain, "mixed norm needs r >= 1");
    require(F.cubes.size() == F.members.size(), ErrorKind::Structural, "mixed family: cube/member mismatch");
    GridFunction env(F.mesh, 0.0);
    for (const auto& g : F.members) {
        check_same_mesh(F.mesh, g.mesh(), "mixed family");
        for (std::size_t i = 0; i < env.size(); ++i) {
            double a = std::fabs(g[i]);
            if (std::isinf(r))
                env[i] = std::max(env[i], a);
            else
                env[i] += std::pow(a, r);
        }
    }
    if (!std::isinf(r))
        for (auto& v : env.values()) v = std::pow(v, 1.0 / r);
    return env;
}

double mixed_norm(const SpaceSpec& x, double r, const MixedFamily& F) { return norm(x, mixed_envelope(F, r)); }

json exponent_json(double p) {
    if (std::isinf(p)) return "inf";
    return p;
}

namespace {

json cell_json(const CellPhi& c) {
    if (const auto* pw = std::get_if<PowerPhi>(&c)) return json{{"kind", "power"}, {"p", pw->p}, {"w", pw->w}};
    const auto& tb = std::get<TablePhi>(c);
    return json{{"kind", "table"}, {"t", tb.t}, {"v", tb.v}, {"tail", tb.tail}, {"capped", tb.capped}};
}

std::string weight_tag(const GridFunction& w) {
    const auto& v = w.values();
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) return "const " + num(v[0]);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the raw bytes
    for (double x : v) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &x, sizeof x);
        for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "#%08llx", static_cast<unsigned long long>(h & 0xffffffffull));
    return buf;
}

}  // namespace

json to_json(const PhiFunction& phi) {
    const auto& cells = phi.cells();
    bool uniform = std::all_of(cells.begin(), cells.end(), [&](const CellPhi& c) { return c == cells[0]; });
    if (uniform && !cells.empty()) return json{{"uniform", cell_json(cells[0])}};
    json arr = json::array();
    for (const auto& c : cells) arr.push_back(cell_json(c));
    return json{{"cells", arr}};
}

json to_json(const SpaceSpec& x) {
    return std::visit(
        overloaded{[](const WeightedLebesgue& s) {
                       return json{{"space", "weighted_lebesgue"}, {"p", exponent_json(s.p)}, {"w", s.w.values()}};
                   },
                   [](const VariableLebesgue& s) {
                       json p = json::array();
                       for (double v : s.p.values()) p.push_back(exponent_json(v));
                       return json{{"space", "variable_lebesgue"}, {"p", p}, {"w", s.w.values()}};
                   },
                   [](const MusielakOrlicz& s) { return json{{"space", "musielak_orlicz"}, {"phi", to_json(s.phi)}}; },
                   [](const OrliczAmemiya& s) { return json{{"space", "orlicz_amemiya"}, {"phi", to_json(s.phi)}}; },
                   [](const Morrey& s) {
                       return json{{"space", "morrey"},
                                   {"p", exponent_json(s.p)},
                                   {"q", exponent_json(s.q)},
                                   {"w", s.w.values()}};
                   },
                   [](const Concavification& s) {
                       return json{{"space", "concavification"}, {"r", s.r}, {"inner", to_json(*s.inner)}};
                   },
                   [](const KotheDual& s) { return json{{"space", "kothe_dual"}, {"inner", to_json(*s.inner)}}; },
                   [](const WeakType& s) { return json{{"space", "weak_type"}, {"inner", to_json(*s.inner)}}; }},
        x.node);
}

std::string describe(const SpaceSpec& x) {
    return std::visit(
        overloaded{[](const WeightedLebesgue& s) { return "L^" + num(s.p) + "_w(w=" + weight_tag(s.w) + ")"; },
                   [](const VariableLebesgue& s) {
                       auto [lo, hi] = std::minmax_element(s.p.values().begin(), s.p.values().end());
                       return "L^p(.)_w(p in [" + num(*lo) + "," + num(*hi) + "], w=" + weight_tag(s.w) + ")";
                   },
                   [](const MusielakOrlicz& s) {
                       return "L^phi(" + describe(s.phi.cell(0)) + (s.phi.cells().size() > 1 ? ",..." : "") + ")";
                   },
                   [](const OrliczAmemiya& s) {
                       return "L^phi_am(" + describe(s.phi.cell(0)) + (s.phi.cells().size() > 1 ? ",..." : "") + ")";
                   },
                   [](const Morrey& s) {
                       return "M^{" + num(s.p) + "," + num(s.q) + "}_w(w=" + weight_tag(s.w) + ")";
                   },
                   [](const Concavification& s) { return "(" + describe(*s.inner) + ")^" + num(s.r); },
                   [](const KotheDual& s) { return "(" + describe(*s.inner) + ")'"; },
                   [](const WeakType& s) { return "(" + describe(*s.inner) + ")_weak"; }},
        x.node);
}

}  // namespace dyadlab
