#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dyadlab/error.hpp"

namespace dyadlab {

// Periodic unit cube [0,1)^d cut into 2^{Ld} finest cells. Cells are stored
// in Morton (Z) order so every dyadic cube owns a contiguous cell range.
struct Mesh {
    int d = 1;
    int L = 0;

    Mesh() = default;
    Mesh(int dim, int depth);

    std::size_t cells() const { return std::size_t(1) << (L * d); }
    double cell_measure() const;
    std::size_t cubes_at(int k) const { return std::size_t(1) << (k * d); }
    std::size_t level_offset(int k) const;
    std::size_t cube_count() const { return level_offset(L + 1); }
    std::size_t fanout() const { return std::size_t(1) << d; }

    bool operator==(const Mesh&) const = default;
};

struct DyadicCube {
    int level = 0;
    std::vector<int> index;

    // level-major, then lexicographic index: the public enumeration order
    auto operator<=>(const DyadicCube&) const = default;
    bool operator==(const DyadicCube&) const = default;
};

std::uint64_t morton_encode(const std::vector<int>& index, int d);
std::vector<int> morton_decode(std::uint64_t code, int k, int d);

double cube_measure(const DyadicCube& q, int d);
bool valid_cube(const Mesh& m, const DyadicCube& q);
void check_cube(const Mesh& m, const DyadicCube& q);

// Flat storage position: level_offset(k) + morton code.
std::size_t slot_of(const Mesh& m, const DyadicCube& q);
DyadicCube cube_of(const Mesh& m, std::size_t slot);
int level_of_slot(const Mesh& m, std::size_t slot);

// Half-open range of finest cells covered by the cube.
std::pair<std::size_t, std::size_t> cell_range(const Mesh& m, std::size_t slot);
std::pair<std::size_t, std::size_t> cell_range(const Mesh& m, const DyadicCube& q);

DyadicCube parent(const DyadicCube& q);
std::vector<DyadicCube> children(const DyadicCube& q);
bool contains(const DyadicCube& outer, const DyadicCube& inner);
bool strictly_contains(const DyadicCube& outer, const DyadicCube& inner);
bool disjoint(const DyadicCube& a, const DyadicCube& b);

// All cubes in public order, and the same list as storage slots.
std::vector<DyadicCube> all_cubes(const Mesh& m);
std::vector<std::size_t> public_slots(const Mesh& m);

DyadicCube cell_cube(const Mesh& m, std::size_t cell);
std::vector<double> cell_center(const Mesh& m, std::size_t cell);

std::string to_string(const DyadicCube& q);
DyadicCube parse_cube(const std::string& text, int d);

// Cubes of the grids shifted by half a side in each nonempty subset of the
// coordinate directions, levels 1..L-1. Each entry lists its cells.
struct ShiftedCube {
    int level = 0;
    std::vector<int> shift;
    std::vector<int> index;
    std::vector<std::size_t> cells;
};
std::vector<ShiftedCube> shifted_cubes(const Mesh& m);

class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const Mesh& m, double value = 0.0);
    GridFunction(const Mesh& m, std::vector<double> values);

    const Mesh& mesh() const { return mesh_; }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }
    const double* data() const { return v_.data(); }

    bool all_finite() const;
    bool all_positive() const;

private:
    Mesh mesh_;
    std::vector<double> v_;
};

void check_same_mesh(const Mesh& a, const Mesh& b, const char* what);
void check_finite(const GridFunction& f, const char* what);

GridFunction abs(const GridFunction& f);
GridFunction indicator(const Mesh& m, const DyadicCube& q);
GridFunction reciprocal(const GridFunction& w);
GridFunction power(const GridFunction& f, double r);

}  // namespace dyadlab
