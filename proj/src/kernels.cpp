#include "dyadlab/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dyadlab {

namespace {

// Loops below this size stay serial; thread startup costs more than the work.
constexpr std::int64_t kParallelGrain = 4096;

template <class Combine>
void prefix_propagate(const Mesh& m, const double* slot_vals, const unsigned char* mask, double* cells_out,
                      double empty, Combine combine, Exec ex) {
    std::vector<double> acc(m.cube_count());
    const int d = m.d;
    acc[0] = (!mask || mask[0]) ? combine(empty, slot_vals[0]) : empty;
    for (int k = 1; k <= m.L; ++k) {
        const std::int64_t n = std::int64_t(m.cubes_at(k));
        const std::size_t off = m.level_offset(k);
        const std::size_t poff = m.level_offset(k - 1);
        const bool par = ex == Exec::Parallel && n >= kParallelGrain;
#pragma omp parallel for schedule(static) if (par)
        for (std::int64_t c = 0; c < n; ++c) {
            const std::size_t s = off + std::size_t(c);
            const double up = acc[poff + (std::size_t(c) >> d)];
            acc[s] = (!mask || mask[s]) ? combine(up, slot_vals[s]) : up;
        }
    }
    const std::size_t off = m.level_offset(m.L);
    const std::int64_t n = std::int64_t(m.cells());
    const bool par = ex == Exec::Parallel && n >= kParallelGrain;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t c = 0; c < n; ++c) cells_out[c] = acc[off + std::size_t(c)];
}

}  // namespace

void cube_integrals(const Mesh& m, const double* vals, double* out, Exec ex) {
    const double mu = m.cell_measure();
    const std::size_t leaf = m.level_offset(m.L);
    const std::int64_t ncell = std::int64_t(m.cells());
    const bool par_leaf = ex == Exec::Parallel && ncell >= kParallelGrain;
#pragma omp parallel for schedule(static) if (par_leaf)
    for (std::int64_t c = 0; c < ncell; ++c) out[leaf + std::size_t(c)] = vals[c] * mu;
    const std::size_t fan = m.fanout();
    for (int k = m.L - 1; k >= 0; --k) {
        const std::int64_t n = std::int64_t(m.cubes_at(k));
        const std::size_t off = m.level_offset(k);
        const std::size_t coff = m.level_offset(k + 1);
        const bool par = ex == Exec::Parallel && n >= kParallelGrain;
#pragma omp parallel for schedule(static) if (par)
        for (std::int64_t c = 0; c < n; ++c) {
            const std::size_t first = coff + std::size_t(c) * fan;
            double s = 0.0;
            for (std::size_t t = 0; t < fan; ++t) s += out[first + t];
            out[off + std::size_t(c)] = s;
        }
    }
}

std::vector<double> cube_integrals(const Mesh& m, const std::vector<double>& vals, Exec ex) {
    std::vector<double> out(m.cube_count());
    cube_integrals(m, vals.data(), out.data(), ex);
    return out;
}

double cube_integral(const Mesh& m, const double* vals, std::size_t slot) {
    auto [b, e] = cell_range(m, slot);
    const std::size_t fan = m.fanout();
    std::vector<double> buf(vals + b, vals + e);
    const double mu = m.cell_measure();
    for (auto& x : buf) x *= mu;
    std::size_t n = buf.size();
    while (n > 1) {
        const std::size_t groups = n / fan;
        for (std::size_t g = 0; g < groups; ++g) {
            double s = 0.0;
            for (std::size_t t = 0; t < fan; ++t) s += buf[g * fan + t];
            buf[g] = s;
        }
        n = groups;
    }
    return buf[0];
}

void prefix_max(const Mesh& m, const double* slot_vals, const unsigned char* mask, double* cells_out, double empty,
                Exec ex) {
    prefix_propagate(
        m, slot_vals, mask, cells_out, empty, [](double a, double b) { return a < b ? b : a; }, ex);
}

void prefix_sum(const Mesh& m, const double* slot_vals, const unsigned char* mask, double* cells_out, Exec ex) {
    prefix_propagate(
        m, slot_vals, mask, cells_out, 0.0, [](double a, double b) { return a + b; }, ex);
}

int kernel_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace dyadlab
