#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dyadlab/mesh.hpp"
#include "dyadlab/phi.hpp"

namespace dyadlab {

using json = nlohmann::json;

enum class Cert { Exact, LowerBound };
const char* to_string(Cert c);
inline Cert weakest(Cert a, Cert b) { return a == Cert::Exact ? b : a; }

// Search settings shared by every estimator that is not closed form. The
// seed fixes the whole candidate stream, so a larger budget only appends
// candidates and can never lower a maximum.
struct Budget {
    std::uint64_t seed = 1;
    int starts = 8;          // random restarts per ascent
    int rounds = 40;         // coordinate sweeps per start
    int samples = 256;       // random families when enumeration is too large
    int max_iter = 20000;    // Morrey surrogate iterations
    double gap = 1e-10;      // relative gap accepted as converged
};

struct SpaceSpec;
using SpacePtr = std::shared_ptr<const SpaceSpec>;

struct WeightedLebesgue {
    double p = 2.0;  // (0, inf]
    GridFunction w;
};
struct VariableLebesgue {
    GridFunction p;  // values in [1, inf]
    GridFunction w;
    PhiFunction phi;
};
struct MusielakOrlicz {
    PhiFunction phi;  // Luxemburg norm
};
struct OrliczAmemiya {
    PhiFunction phi;  // inf_k (1 + rho_phi(k f)) / k
};
struct Morrey {
    double p = 1.0, q = 2.0;  // 1 <= p <= q <= inf
    GridFunction w;
};
struct Concavification {
    SpacePtr inner;
    double r = 1.0;
};
struct KotheDual {
    SpacePtr inner;
};
struct WeakType {
    SpacePtr inner;
};

struct SpaceSpec {
    using Node = std::variant<WeightedLebesgue, VariableLebesgue, MusielakOrlicz, OrliczAmemiya, Morrey,
                              Concavification, KotheDual, WeakType>;
    Node node;
    const Mesh& mesh() const;
};

// Factories validate their parameters (domain errors).
SpaceSpec lebesgue(const Mesh& m, double p);
SpaceSpec weighted_lebesgue(double p, const GridFunction& w);
SpaceSpec variable_lebesgue(const GridFunction& p, const GridFunction& w);
SpaceSpec musielak_orlicz(const PhiFunction& phi);
SpaceSpec orlicz_amemiya(const PhiFunction& phi);
SpaceSpec morrey(double p, double q, const GridFunction& w);
// Block space as the Koethe dual of Morrey(p, q, 1/w).
SpaceSpec block(double p, double q, const GridFunction& w);
SpaceSpec concavification(const SpaceSpec& x, double r);
SpaceSpec kothe_dual(const SpaceSpec& x);
SpaceSpec weak_type(const SpaceSpec& x);

double conjugate_exponent(double p);

// Closed-form rewrites: Concavification of weighted Lebesgue, Morrey with
// p = q or q = inf, duals with known formulas, and X'' = X for Banach X.
SpaceSpec canonical(const SpaceSpec& x);

bool is_banach(const SpaceSpec& x);
double quasi_triangle_constant(const SpaceSpec& x);  // K_X

struct Estimate {
    double value = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    Cert cert = Cert::Exact;
};

struct DualResult {
    double value = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    Cert cert = Cert::Exact;
    GridFunction witness;  // f >= 0, norm(X, f) = 1, pairing close to value
};

Estimate norm_estimate(const SpaceSpec& x, const GridFunction& f, const Budget& b = {});
double norm(const SpaceSpec& x, const GridFunction& f);

DualResult kothe_dual_norm(const SpaceSpec& x, const GridFunction& g, const Budget& b = {});

// max over the distinct values v of |f| of v ||1_{|f| >= v}||_X
Estimate weak_norm_estimate(const SpaceSpec& x, const GridFunction& f, const Budget& b = {});
double weak_norm(const SpaceSpec& x, const GridFunction& f);

struct MixedFamily {
    Mesh mesh;
    std::vector<DyadicCube> cubes;
    std::vector<GridFunction> members;  // aligned with cubes
};

GridFunction mixed_envelope(const MixedFamily& F, double r);  // (sum |f_Q|^r)^{1/r}, max for r = inf
double mixed_norm(const SpaceSpec& x, double r, const MixedFamily& F);

double morrey_norm(const Morrey& m, const GridFunction& f);
// p = 1: greedy primal on the laminar capacity polytope plus a tree DP for
// the dual LP, EXACT when they agree. 1 < p < q < inf: weighted L^p
// surrogates give an upper bound and their extremals a lower bound, reported
// as LOWER_BOUND with the upper bound attached.
DualResult morrey_dual(const Morrey& m, const GridFunction& g, const Budget& b);
// Dual norm of the Morrey dual at g: the Morrey norm itself, with the
// Hoelder extremal on the worst cube as witness.
DualResult morrey_norming(const Morrey& m, const GridFunction& g);

json to_json(const SpaceSpec& x);
json to_json(const PhiFunction& phi);
json exponent_json(double p);
std::string describe(const SpaceSpec& x);

}  // namespace dyadlab
