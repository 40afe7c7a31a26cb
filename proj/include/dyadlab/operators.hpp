#pragma once

#include <string>
#include <variant>
#include <vector>

#include "dyadlab/kernels.hpp"
#include "dyadlab/spaces.hpp"

namespace dyadlab {

// All averages use |f|.
struct DyadicMaximal {
    bool shifted = false;  // also take the sup over the half-shifted grids
};
struct RestrictedMaximal {
    std::vector<DyadicCube> family;
};
struct Averaging {
    DyadicCube cube;
};
struct DisjointAveraging {
    std::vector<DyadicCube> family;  // must be an antichain
};
struct SparseOperator {
    std::vector<DyadicCube> family;
};
// sup over cubes containing x of <|f - <f>_Q|>_Q with the signed inner average
struct SharpMaximal {};
// M^D(|f|^r)^{1/r}
struct RAverage {
    double r = 1.0;
};

struct OperatorSpec {
    using Node = std::variant<DyadicMaximal, RestrictedMaximal, Averaging, DisjointAveraging, SparseOperator,
                              SharpMaximal, RAverage>;
    Node node;
};

OperatorSpec dyadic_maximal(bool shifted = false);
OperatorSpec restricted_maximal(std::vector<DyadicCube> family);
OperatorSpec averaging(const DyadicCube& q);
OperatorSpec disjoint_averaging(std::vector<DyadicCube> family);
OperatorSpec sparse_operator(std::vector<DyadicCube> family);
OperatorSpec sharp_maximal();
OperatorSpec r_average(double r);

bool is_antichain(const std::vector<DyadicCube>& family);

GridFunction apply(const OperatorSpec& t, const GridFunction& f, Exec ex = Exec::Parallel);

// Tag plus cube list, e.g. "A_P[1 0;2 3]".
std::string describe(const OperatorSpec& t);

// (<|f_Q|>_Q 1_Q) for every member
MixedFamily linearized_maximal(const MixedFamily& F);

// mixed_norm(X, 2, linearized F) / mixed_norm(X, 2, F)
double square_function_ratio(const SpaceSpec& x, const MixedFamily& F);

// [w]_1 = max_Q <w>_Q / min_Q w
double a1_constant(const GridFunction& w);

struct RdfResult {
    GridFunction w;
    int terms = 0;           // M^0 f .. M^{terms-1} f were summed
    double tail = 0.0;       // bound on the omitted part of the series, in X norm
    double norm_f = 0.0;
    double norm_w = 0.0;
    double a1 = 0.0;         // measured [w]_1
    double ratio_bound = 0;  // 2 K_X B
};

// w = sum_n M^n f / (2 K_X B)^n with B >= ||M^D||_{X->X}. Summation stops once
// the geometric tail bound drops below tol ||f||_X. Raises a diagnostic error
// when the term ratio exceeds 1/2, which means B was too small.
RdfResult rdf_majorant(const SpaceSpec& x, const GridFunction& f, double B, double tol = 1e-10,
                       int max_terms = 4000);

}  // namespace dyadlab
