#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyadlab/kernels.hpp"
#include "dyadlab/mesh.hpp"

namespace dyadlab {

// (|Q|^{-1} sum_{cells in Q} |f|^r mu)^{1/r}
double average(const GridFunction& f, const DyadicCube& q, double r = 1.0);

// <|f|>_Q for every cube, indexed by storage slot.
std::vector<double> cube_averages(const GridFunction& f, Exec ex = Exec::Parallel);

// Maximal dyadic cubes with <|f|>_P > lambda, in public order.
std::vector<DyadicCube> cz_stopping_cubes(const GridFunction& f, double lambda);

// Share of a finest cell assigned to a witness set E_Q.
struct CellShare {
    std::size_t cell = 0;
    double fraction = 1.0;
    bool operator==(const CellShare&) const = default;
};
using SparseWitness = std::vector<std::vector<CellShare>>;  // aligned with the cube list

struct SparseCollection {
    Mesh mesh;
    std::vector<DyadicCube> cubes;
    double eta = 1.0;
    std::optional<SparseWitness> witness;
};

enum class SparseMethod { Fast, Exact, Auto };

struct SparseDecision {
    bool sparse = false;
    std::vector<DyadicCube> cubes;  // deduplicated, public order
    std::optional<SparseWitness> witness;
    std::string method;
    std::optional<DyadicCube> violator;  // first cube failing the packing check
};

// Sparsity with divisible cells: E_Q may take fractions of finest cells.
SparseDecision is_sparse(const Mesh& m, const std::vector<DyadicCube>& cubes, double eta,
                         SparseMethod method = SparseMethod::Auto);

// Checks E_Q subset of Q, pairwise disjointness (cell shares sum to <= 1)
// and |E_Q| >= eta |Q| up to a relative 1e-12.
bool check_witness(const Mesh& m, const std::vector<DyadicCube>& cubes, const SparseWitness& w, double eta,
                   std::string* why = nullptr);

// Line format: "k i_1 ... i_d" per cube; with witness, "k i_1 ... i_d : c,c@frac,...".
std::string collection_to_text(const SparseCollection& s);
SparseCollection collection_from_text(const std::string& text, const Mesh& m, double eta);

// Maximal cubes of S strictly inside q.
std::vector<DyadicCube> children_in(const std::vector<DyadicCube>& family, const DyadicCube& q);

// Cells where the family's sparse sum is evaluated: A_S f.
std::vector<double> sparse_sum(const Mesh& m, const std::vector<DyadicCube>& family, const GridFunction& f,
                               Exec ex = Exec::Parallel);

struct RenormalizeResult {
    std::vector<DyadicCube> cubes;  // the collection E, public order
    SparseWitness witness;          // E_Q = Q minus the union of its E-children
    double weak_bound = 0.0;        // localized weak (1,1) bound measured on this f
    double K = 0.0;
    double C = 0.0;                 // A_S f <= C A_E f pointwise
};

RenormalizeResult sparse_renormalize(const Mesh& m, const std::vector<DyadicCube>& s, double nu,
                                     const GridFunction& f);

// max over cubes Q of the child packing ratio sum_{ch(Q)} |Q'| / |Q|.
double packing_ratio(const Mesh& m, const std::vector<DyadicCube>& family, DyadicCube* worst = nullptr);

struct WeakLayer {
    int m = 0;
    std::vector<DyadicCube> cubes;                // S_m, public order
    std::vector<int> generation;                  // n with Q in S_{m,n}
    std::vector<std::vector<DyadicCube>> F;       // F_m(Q) as a disjoint cube list
};

struct WeakDecomposition {
    std::vector<WeakLayer> layers;  // increasing m, only nonempty layers
    std::size_t unassigned = 0;     // cubes with average > 1/4 or equal to 0
};

WeakDecomposition weak_decomposition(const Mesh& m, const std::vector<DyadicCube>& s, double nu,
                                     const GridFunction& f);

struct WeakCheck {
    double lhs = 0.0;        // integral of |g| over {A_S f > 2} minus {M f > 1/4}
    double rhs = 0.0;        // sum_m 4^{-m} sum_Q integral of |g| over F_m(Q)
    double worst_layer = 0;  // max |F_m(Q)| / ((1-nu)^{2^m} |Q|)
};

WeakCheck check_weak_decomposition(const Mesh& m, const std::vector<DyadicCube>& s, double nu,
                                   const GridFunction& f, const GridFunction& g, const WeakDecomposition& wd);

}  // namespace dyadlab
