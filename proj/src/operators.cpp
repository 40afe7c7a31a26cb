#include "dyadlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dyadlab/dyadic.hpp"

namespace dyadlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<unsigned char> mask_of(const Mesh& m, const std::vector<DyadicCube>& family) {
    std::vector<unsigned char> mask(m.cube_count(), 0);
    for (const auto& q : family) {
        check_cube(m, q);
        mask[slot_of(m, q)] = 1;
    }
    return mask;
}

GridFunction masked_max(const GridFunction& f, const std::vector<unsigned char>* mask, Exec ex) {
    const Mesh& m = f.mesh();
    auto avg = cube_averages(f, ex);
    GridFunction out(m, 0.0);
    prefix_max(m, avg.data(), mask ? mask->data() : nullptr, out.values().data(), 0.0, ex);
    return out;
}

GridFunction masked_sum(const GridFunction& f, const std::vector<unsigned char>& mask, Exec ex) {
    const Mesh& m = f.mesh();
    auto avg = cube_averages(f, ex);
    GridFunction out(m, 0.0);
    prefix_sum(m, avg.data(), mask.data(), out.values().data(), ex);
    return out;
}

void add_shifted(const GridFunction& f, GridFunction& out) {
    const Mesh& m = f.mesh();
    for (const auto& s : shifted_cubes(m)) {
        double sum = 0.0;
        for (std::size_t c : s.cells) sum += std::fabs(f[c]);
        double avg = sum / double(s.cells.size());
        for (std::size_t c : s.cells) out[c] = std::max(out[c], avg);
    }
}

GridFunction sharp(const GridFunction& f, Exec ex) {
    const Mesh& m = f.mesh();
    // signed averages per slot
    std::vector<double> signed_int = cube_integrals(m, f.values(), ex);
    std::vector<double> osc(m.cube_count(), 0.0);
    for (int k = 0; k <= m.L; ++k) {
        const double inv = std::ldexp(1.0, k * m.d);
        const std::size_t off = m.level_offset(k), n = m.cubes_at(k);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
        for (std::size_t q = 0; q < n; ++q) {
            auto [b, e] = cell_range(m, off + q);
            const double c = signed_int[off + q] * inv;
            double s = 0.0;
            for (std::size_t x = b; x < e; ++x) s += std::fabs(f[x] - c);
            osc[off + q] = s / double(e - b);
        }
    }
    GridFunction out(m, 0.0);
    prefix_max(m, osc.data(), nullptr, out.values().data(), 0.0, ex);
    return out;
}

std::string cube_list(const std::vector<DyadicCube>& family) {
    std::vector<DyadicCube> sorted = family;
    std::sort(sorted.begin(), sorted.end());
    std::string s = "[";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i) s += ";";
        s += to_string(sorted[i]);
    }
    return s + "]";
}

}  // namespace

OperatorSpec dyadic_maximal(bool shifted) { return OperatorSpec{DyadicMaximal{shifted}}; }
OperatorSpec restricted_maximal(std::vector<DyadicCube> family) {
    return OperatorSpec{RestrictedMaximal{std::move(family)}};
}
OperatorSpec averaging(const DyadicCube& q) { return OperatorSpec{Averaging{q}}; }
OperatorSpec disjoint_averaging(std::vector<DyadicCube> family) {
    require(is_antichain(family), ErrorKind::Structural, "disjoint averaging needs pairwise disjoint cubes");
    return OperatorSpec{DisjointAveraging{std::move(family)}};
}
OperatorSpec sparse_operator(std::vector<DyadicCube> family) { return OperatorSpec{SparseOperator{std::move(family)}}; }
OperatorSpec sharp_maximal() { return OperatorSpec{SharpMaximal{}}; }
OperatorSpec r_average(double r) {
    require(r > 0.0 && std::isfinite(r), ErrorKind::Domain, "r must be positive and finite");
    return OperatorSpec{RAverage{r}};
}

bool is_antichain(const std::vector<DyadicCube>& family) {
    for (std::size_t i = 0; i < family.size(); ++i)
        for (std::size_t j = i + 1; j < family.size(); ++j)
            if (!disjoint(family[i], family[j])) return false;
    return true;
}

GridFunction apply(const OperatorSpec& t, const GridFunction& f, Exec ex) {
    require(f.all_finite(), ErrorKind::Domain, "apply: non-finite values");
    const Mesh& m = f.mesh();
    return std::visit(
        overloaded{[&](const DyadicMaximal& s) {
                       GridFunction out = masked_max(f, nullptr, ex);
                       if (s.shifted) add_shifted(f, out);
                       return out;
                   },
                   [&](const RestrictedMaximal& s) {
                       auto mask = mask_of(m, s.family);
                       return masked_max(f, &mask, ex);
                   },
                   [&](const Averaging& s) {
                       check_cube(m, s.cube);
                       GridFunction out(m, 0.0);
                       double a = average(f, s.cube);
                       auto [b, e] = cell_range(m, s.cube);
                       for (std::size_t x = b; x < e; ++x) out[x] = a;
                       return out;
                   },
                   [&](const DisjointAveraging& s) {
                       require(is_antichain(s.family), ErrorKind::Structural,
                               "disjoint averaging needs pairwise disjoint cubes");
                       return masked_sum(f, mask_of(m, s.family), ex);
                   },
                   [&](const SparseOperator& s) { return masked_sum(f, mask_of(m, s.family), ex); },
                   [&](const SharpMaximal&) { return sharp(f, ex); },
                   [&](const RAverage& s) {
                       GridFunction out = masked_max(power(abs(f), s.r), nullptr, ex);
                       return power(out, 1.0 / s.r);
                   }},
        t.node);
}

std::string describe(const OperatorSpec& t) {
    return std::visit(overloaded{[](const DyadicMaximal& s) { return std::string(s.shifted ? "M^D+shift" : "M^D"); },
                                 [](const RestrictedMaximal& s) { return "M^P" + cube_list(s.family); },
                                 [](const Averaging& s) { return "T_Q[" + to_string(s.cube) + "]"; },
                                 [](const DisjointAveraging& s) { return "A_P" + cube_list(s.family); },
                                 [](const SparseOperator& s) { return "A_S" + cube_list(s.family); },
                                 [](const SharpMaximal&) { return std::string("M#"); },
                                 [](const RAverage& s) {
                                     std::ostringstream os;
                                     os.precision(17);
                                     os << "M_r[" << s.r << "]";
                                     return os.str();
                                 }},
                      t.node);
}

MixedFamily linearized_maximal(const MixedFamily& F) {
    require(F.cubes.size() == F.members.size(), ErrorKind::Structural, "mixed family: cubes and members differ");
    MixedFamily out{F.mesh, F.cubes, {}};
    for (std::size_t i = 0; i < F.cubes.size(); ++i) {
        check_same_mesh(F.mesh, F.members[i].mesh(), "linearized_maximal");
        out.members.push_back(apply(averaging(F.cubes[i]), F.members[i]));
    }
    return out;
}

double square_function_ratio(const SpaceSpec& x, const MixedFamily& F) {
    double den = mixed_norm(x, 2.0, F);
    require(den > 0.0, ErrorKind::Domain, "square_function_ratio: zero denominator");
    return mixed_norm(x, 2.0, linearized_maximal(F)) / den;
}

double a1_constant(const GridFunction& w) {
    const Mesh& m = w.mesh();
    require(w.all_finite(), ErrorKind::Domain, "a1_constant: non-finite weight");
    auto avg = cube_averages(w);
    // minimum over each cube, bottom-up
    std::vector<double> mn(m.cube_count());
    const std::size_t leaf = m.level_offset(m.L);
    for (std::size_t c = 0; c < m.cells(); ++c) mn[leaf + c] = std::fabs(w[c]);
    for (int k = m.L - 1; k >= 0; --k)
        for (std::size_t q = 0; q < m.cubes_at(k); ++q) {
            double v = mn[m.level_offset(k + 1) + q * m.fanout()];
            for (std::size_t c = 1; c < m.fanout(); ++c)
                v = std::min(v, mn[m.level_offset(k + 1) + q * m.fanout() + c]);
            mn[m.level_offset(k) + q] = v;
        }
    double best = 0.0;
    for (std::size_t s = 0; s < m.cube_count(); ++s) {
        if (avg[s] == 0.0) continue;
        if (mn[s] == 0.0) return INFINITY;
        best = std::max(best, avg[s] / mn[s]);
    }
    return best;
}

RdfResult rdf_majorant(const SpaceSpec& x, const GridFunction& f, double B, double tol, int max_terms) {
    require(B > 0.0 && std::isfinite(B), ErrorKind::Domain, "rdf_majorant: B must be positive and finite");
    check_same_mesh(x.mesh(), f.mesh(), "rdf_majorant");
    const double K = quasi_triangle_constant(x);
    RdfResult r;
    r.ratio_bound = 2.0 * K * B;
    r.norm_f = norm(x, f);
    r.w = abs(f);
    if (r.norm_f == 0.0) {
        r.terms = 1;
        r.a1 = a1_constant(r.w);
        return r;
    }
    const OperatorSpec M = dyadic_maximal();
    GridFunction term = abs(f);  // M^n f
    double scale = 1.0;          // (2 K B)^{-n}
    double prev = r.norm_f;
    r.terms = 1;
    // the omitted part sum_{n > N} is at most term_N when every ratio is <= 1/2
    r.tail = prev;
    while (r.tail > tol * r.norm_f) {
        require(r.terms < max_terms, ErrorKind::Diagnostic, "rdf_majorant: series did not settle");
        term = apply(M, term);
        scale /= r.ratio_bound;
        double cur = norm(x, term) * scale;
        if (cur > 0.5 * prev * (1.0 + 1e-9))
            fail(ErrorKind::Diagnostic, "rdf_majorant: term ratio above 1/2, B is below the operator norm");
        for (std::size_t i = 0; i < term.size(); ++i) r.w[i] += term[i] * scale;
        ++r.terms;
        prev = cur;
        r.tail = cur;
    }
    r.norm_w = norm(x, r.w);
    r.a1 = a1_constant(r.w);
    return r;
}

}  // namespace dyadlab
