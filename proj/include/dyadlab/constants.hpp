#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dyadlab/operators.hpp"
#include "dyadlab/spaces.hpp"

namespace dyadlab {

enum class SearchMode { Auto, Exhaustive, Random };
const char* to_string(SearchMode m);
SearchMode parse_search_mode(const std::string& s);

struct EstimateOptions {
    Budget budget;
    SearchMode mode = SearchMode::Auto;
    bool strict = false;  // LOWER_BOUND results raise a certification error
    bool closed_forms = true;  // off: search even where a closed form exists
};

struct ConstantReport {
    std::string name;   // A, A_strong, A_sparse, G, C2, C2_tilde, muckenhoupt_p, fujii_wilson, op_norm, ...
    std::string space;  // describe() of the space, or of the weight
    double value = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    Cert cert = Cert::Exact;
    json witness = json::object();
    json search = json::object();  // enumeration counts
    Budget budget;
};

json to_json(const ConstantReport& r);

// Weighted-average form with the essential-sup conventions at p = 1 and
// p = inf. `shifted` also maximizes over the half-shifted grids.
ConstantReport muckenhoupt_weight_constant(const GridFunction& w, double p, bool shifted = false);

// max_Q v(Q)^{-1} int_Q M^D(v 1_Q)
ConstantReport fujii_wilson_constant(const GridFunction& v);

// max_Q |Q|^{-1} ||1_Q||_X ||1_Q||_{X'}
ConstantReport muckenhoupt_space_constant(const SpaceSpec& x, const EstimateOptions& o = {});

// Number of partitions of the unit cube into dyadic cubes of the mesh
// (the maximal antichains), saturating at `cap`.
std::size_t partition_count(const Mesh& m, std::size_t cap = SIZE_MAX);
std::vector<std::vector<DyadicCube>> all_partitions(const Mesh& m);

// sup over antichains P and f of ||A_P f|| / ||f||. Exhaustive over the
// maximal antichains when there are at most 5000 of them.
ConstantReport a_strong_constant(const SpaceSpec& x, const EstimateOptions& o = {});

// sup over eta-sparse S and f of ||A_S f|| / ||f||. Exhaustive over subsets
// when the mesh has at most 15 cubes, random greedy maximal families else.
ConstantReport a_sparse_constant(const SpaceSpec& x, double eta, const EstimateOptions& o = {});

struct GReport {
    ConstantReport G, C2, C2_tilde;
};
// Property G together with the two constants of the local-norm equivalence,
// estimated over one enumeration of antichains.
GReport g_constant(const SpaceSpec& x, const EstimateOptions& o = {});

enum class Target { Strong, Weak };

// sup ||T f||_target / ||f||_X. EXACT on L^1_w (atoms; weak target for M^D
// through [w]_1), on L^inf_w (top element, monotone T) and for linear T on
// L^p_w when the Schur bound closes the gap. Extra seeds join the ascent.
ConstantReport op_norm(const OperatorSpec& t, const SpaceSpec& x, Target target, const EstimateOptions& o = {},
                       const std::vector<GridFunction>& extra_seeds = {});

// Convexity M^(r)(X) and concavity M_(s)(X) constants.
struct ConvexityReport {
    ConstantReport convexity, concavity;
};
ConvexityReport convexity_constants(const SpaceSpec& x, double r, double s, const EstimateOptions& o = {});

// Recomputes the ratio named by the report from its serialized witness.
double reevaluate(const ConstantReport& r, const SpaceSpec& x, const std::optional<OperatorSpec>& t = std::nullopt);

// f >= 0 with ||f||_X = 1 nearly attaining ||T_Q||, built from the dual
// witness of 1_Q.
GridFunction averaging_witness(const SpaceSpec& x, const DyadicCube& q, const Budget& b = {});

// Raises a certification error when strict and the report is not EXACT.
void enforce(const ConstantReport& r, const EstimateOptions& o);

json function_json(const GridFunction& f);
GridFunction function_from_json(const Mesh& m, const json& j);
json family_json(const std::vector<DyadicCube>& family);
std::vector<DyadicCube> family_from_json(const json& j, int d);

}  // namespace dyadlab
