#pragma once

#include <vector>

#include "dyadlab/mesh.hpp"

namespace dyadlab {

// Serial is the reference; Parallel splits each level over independent
// outputs only, so both give bitwise identical results.
enum class Exec { Serial, Parallel };

// out[slot] = sum over cells of the cube of vals[cell] * cell_measure.
// Children are added in Morton order at every level.
void cube_integrals(const Mesh& m, const double* vals, double* out, Exec ex = Exec::Parallel);
std::vector<double> cube_integrals(const Mesh& m, const std::vector<double>& vals, Exec ex = Exec::Parallel);

// Integral over one cube, summed with the same tree as cube_integrals.
double cube_integral(const Mesh& m, const double* vals, std::size_t slot);

// cells_out[c] = max over included cubes Q containing c of slot_vals[Q];
// `empty` where no included cube covers the cell. mask may be null (all).
void prefix_max(const Mesh& m, const double* slot_vals, const unsigned char* mask, double* cells_out,
                double empty = 0.0, Exec ex = Exec::Parallel);

// cells_out[c] = sum over included cubes Q containing c of slot_vals[Q],
// accumulated root to leaf.
void prefix_sum(const Mesh& m, const double* slot_vals, const unsigned char* mask, double* cells_out,
                Exec ex = Exec::Parallel);

int kernel_threads();

}  // namespace dyadlab
