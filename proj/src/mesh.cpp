#include "dyadlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dyadlab {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::Structural: return "structural error";
        case ErrorKind::Precondition: return "precondition error";
        case ErrorKind::Certification: return "certification error";
        case ErrorKind::Diagnostic: return "diagnostic error";
        case ErrorKind::Config: return "config error";
    }
    return "error";
}

Mesh::Mesh(int dim, int depth) : d(dim), L(depth) {
    require(d >= 1 && L >= 0, ErrorKind::Domain, "mesh needs d >= 1 and L >= 0");
    require(L * d <= 24, ErrorKind::Domain, "mesh too large (L*d > 24)");
}

double Mesh::cell_measure() const { return std::ldexp(1.0, -L * d); }

std::size_t Mesh::level_offset(int k) const {
    // (2^{kd} - 1) / (2^d - 1)
    std::size_t total = 0;
    for (int j = 0; j < k; ++j) total += cubes_at(j);
    return total;
}

std::uint64_t morton_encode(const std::vector<int>& index, int d) {
    std::uint64_t code = 0;
    int bits = 0;
    for (int v : index) bits = std::max(bits, 64 - __builtin_clzll(std::uint64_t(v) | 1));
    for (int b = 0; b < bits; ++b)
        for (int j = 0; j < d; ++j)
            if ((index[j] >> b) & 1) code |= std::uint64_t(1) << (b * d + (d - 1 - j));
    return code;
}

std::vector<int> morton_decode(std::uint64_t code, int k, int d) {
    std::vector<int> idx(d, 0);
    for (int b = 0; b < k; ++b)
        for (int j = 0; j < d; ++j)
            if ((code >> (b * d + (d - 1 - j))) & 1) idx[j] |= 1 << b;
    return idx;
}

double cube_measure(const DyadicCube& q, int d) { return std::ldexp(1.0, -q.level * d); }

bool valid_cube(const Mesh& m, const DyadicCube& q) {
    if (q.level < 0 || q.level > m.L || int(q.index.size()) != m.d) return false;
    for (int v : q.index)
        if (v < 0 || v >= (1 << q.level)) return false;
    return true;
}

void check_cube(const Mesh& m, const DyadicCube& q) {
    if (!valid_cube(m, q)) fail(ErrorKind::Structural, "cube " + to_string(q) + " is not on this mesh");
}

std::size_t slot_of(const Mesh& m, const DyadicCube& q) {
    check_cube(m, q);
    return m.level_offset(q.level) + morton_encode(q.index, m.d);
}

int level_of_slot(const Mesh& m, std::size_t slot) {
    int k = 0;
    while (k <= m.L && slot >= m.level_offset(k + 1)) ++k;
    if (k > m.L) fail(ErrorKind::Structural, "slot out of range");
    return k;
}

DyadicCube cube_of(const Mesh& m, std::size_t slot) {
    int k = level_of_slot(m, slot);
    return DyadicCube{k, morton_decode(slot - m.level_offset(k), k, m.d)};
}

std::pair<std::size_t, std::size_t> cell_range(const Mesh& m, std::size_t slot) {
    int k = level_of_slot(m, slot);
    std::size_t code = slot - m.level_offset(k);
    int shift = (m.L - k) * m.d;
    return {code << shift, (code + 1) << shift};
}

std::pair<std::size_t, std::size_t> cell_range(const Mesh& m, const DyadicCube& q) {
    return cell_range(m, slot_of(m, q));
}

DyadicCube parent(const DyadicCube& q) {
    require(q.level > 0, ErrorKind::Structural, "root cube has no parent");
    DyadicCube p{q.level - 1, q.index};
    for (int& v : p.index) v >>= 1;
    return p;
}

std::vector<DyadicCube> children(const DyadicCube& q) {
    const int d = int(q.index.size());
    std::vector<DyadicCube> out;
    out.reserve(std::size_t(1) << d);
    for (int t = 0; t < (1 << d); ++t) {
        DyadicCube c{q.level + 1, q.index};
        for (int j = 0; j < d; ++j) c.index[j] = 2 * q.index[j] + ((t >> (d - 1 - j)) & 1);
        out.push_back(std::move(c));
    }
    return out;
}

bool contains(const DyadicCube& outer, const DyadicCube& inner) {
    if (inner.level < outer.level) return false;
    int s = inner.level - outer.level;
    for (std::size_t j = 0; j < outer.index.size(); ++j)
        if ((inner.index[j] >> s) != outer.index[j]) return false;
    return true;
}

bool strictly_contains(const DyadicCube& outer, const DyadicCube& inner) {
    return inner.level > outer.level && contains(outer, inner);
}

bool disjoint(const DyadicCube& a, const DyadicCube& b) { return !contains(a, b) && !contains(b, a); }

std::vector<DyadicCube> all_cubes(const Mesh& m) {
    std::vector<DyadicCube> out;
    out.reserve(m.cube_count());
    for (std::size_t s = 0; s < m.cube_count(); ++s) out.push_back(cube_of(m, s));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> public_slots(const Mesh& m) {
    std::vector<std::size_t> out;
    for (const auto& q : all_cubes(m)) out.push_back(slot_of(m, q));
    return out;
}

DyadicCube cell_cube(const Mesh& m, std::size_t cell) {
    return DyadicCube{m.L, morton_decode(cell, m.L, m.d)};
}

std::vector<double> cell_center(const Mesh& m, std::size_t cell) {
    auto idx = morton_decode(cell, m.L, m.d);
    std::vector<double> x(m.d);
    const double h = std::ldexp(1.0, -m.L);
    for (int j = 0; j < m.d; ++j) x[j] = (idx[j] + 0.5) * h;
    return x;
}

std::string to_string(const DyadicCube& q) {
    std::ostringstream os;
    os << q.level;
    for (int v : q.index) os << ' ' << v;
    return os.str();
}

DyadicCube parse_cube(const std::string& text, int d) {
    std::istringstream is(text);
    DyadicCube q;
    if (!(is >> q.level)) fail(ErrorKind::Config, "cannot parse cube '" + text + "'");
    q.index.resize(d);
    for (int j = 0; j < d; ++j)
        if (!(is >> q.index[j])) fail(ErrorKind::Config, "cannot parse cube '" + text + "'");
    std::string rest;
    if (is >> rest) fail(ErrorKind::Config, "trailing text in cube '" + text + "'");
    return q;
}

std::vector<ShiftedCube> shifted_cubes(const Mesh& m) {
    std::vector<ShiftedCube> out;
    const int n = 1 << m.L;
    for (int k = 1; k < m.L; ++k) {
        const int side = 1 << (m.L - k);
        for (int s = 1; s < (1 << m.d); ++s) {
            std::vector<int> shift(m.d);
            for (int j = 0; j < m.d; ++j) shift[j] = (s >> (m.d - 1 - j)) & 1;
            const std::size_t count = m.cubes_at(k);
            std::vector<ShiftedCube> level(count);
            for (std::size_t c = 0; c < count; ++c) {
                level[c].level = k;
                level[c].shift = shift;
                level[c].index = morton_decode(c, k, m.d);
            }
            for (std::size_t cell = 0; cell < m.cells(); ++cell) {
                auto idx = morton_decode(cell, m.L, m.d);
                std::vector<int> q(m.d);
                for (int j = 0; j < m.d; ++j) q[j] = ((idx[j] - shift[j] * side / 2 + n) % n) / side;
                level[morton_encode(q, m.d)].cells.push_back(cell);
            }
            std::sort(level.begin(), level.end(),
                      [](const ShiftedCube& a, const ShiftedCube& b) { return a.index < b.index; });
            for (auto& c : level) out.push_back(std::move(c));
        }
    }
    return out;
}

GridFunction::GridFunction(const Mesh& m, double value) : mesh_(m), v_(m.cells(), value) {}

GridFunction::GridFunction(const Mesh& m, std::vector<double> values) : mesh_(m), v_(std::move(values)) {
    if (v_.size() != m.cells())
        fail(ErrorKind::Structural, "grid function has " + std::to_string(v_.size()) + " values, mesh has " +
                                        std::to_string(m.cells()) + " cells");
}

bool GridFunction::all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

bool GridFunction::all_positive() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return x > 0.0; });
}

void check_same_mesh(const Mesh& a, const Mesh& b, const char* what) {
    if (!(a == b)) fail(ErrorKind::Structural, std::string(what) + ": mesh mismatch");
}

void check_finite(const GridFunction& f, const char* what) {
    if (!f.all_finite()) fail(ErrorKind::Domain, std::string(what) + ": non-finite values");
}

GridFunction abs(const GridFunction& f) {
    GridFunction g = f;
    for (auto& x : g.values()) x = std::fabs(x);
    return g;
}

GridFunction indicator(const Mesh& m, const DyadicCube& q) {
    GridFunction g(m, 0.0);
    auto [b, e] = cell_range(m, q);
    for (std::size_t i = b; i < e; ++i) g[i] = 1.0;
    return g;
}

GridFunction reciprocal(const GridFunction& w) {
    GridFunction g = w;
    for (auto& x : g.values()) x = 1.0 / x;
    return g;
}

GridFunction power(const GridFunction& f, double r) {
    GridFunction g = f;
    for (auto& x : g.values()) x = std::pow(std::fabs(x), r);
    return g;
}

}  // namespace dyadlab
