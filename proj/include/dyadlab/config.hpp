#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dyadlab/constants.hpp"

namespace dyadlab {

// A parsed document plus the source line of every node, keyed by JSON
// pointer. Lines are 1-based; 0 means unknown.
struct Document {
    json root;
    std::map<std::string, int> lines;
    std::string name;

    int line(const std::string& pointer) const;
    [[noreturn]] void fail_at(const std::string& pointer, const std::string& what) const;
};

// YAML or JSON text. Syntax errors raise a config error with the line.
Document parse_document(const std::string& text, const std::string& name);

// Weight, exponent and space documents are templates: generators are
// evaluated on a concrete mesh with a seed.
//   [1, 2, ...]                               explicit cell values
//   3.0                                       constant
//   {generator: constant, value: c}
//   {generator: lognormal, sigma: s}          exp(s N(0,1)), seeded
//   {generator: power, alpha: a}              dist(x, 0)^{a d}, 0-cell at half a cell
//   {generator: two_level, a: a, b: b, split: t}  a where x_1 < t, else b
GridFunction function_from_doc(const json& doc, const Mesh& m, std::uint64_t seed);

//   {type: lebesgue, p, weight}      {type: variable, p, weight}
//   {type: orlicz, phi}              {type: amemiya, phi}
//   {type: morrey, p, q, weight}     {type: block, p, q, weight}
//   {type: concavification, r, inner}  {type: dual, inner}  {type: weak, inner}
// phi: {kind: power, p, weight} | {kind: variable, p, weight}
//      | {kind: table, t: [...], v: [...], tail, capped}
SpaceSpec space_from_doc(const json& doc, const Mesh& m, std::uint64_t seed);

//   {type: maximal, shifted} | {type: sharp} | {type: averaging, cube: "k i"}
//   | {type: disjoint_averaging, family} | {type: sparse, family} | {type: restricted, family}
//   | {type: r_average, r}
// family is a list of cube strings or "full_tree".
OperatorSpec operator_from_doc(const json& doc, const Mesh& m);

struct ConstantTask {
    std::string name;  // A, A_strong, A_sparse, G, C2, C2_tilde, muckenhoupt_p, fujii_wilson,
                       // op_norm, weak_op_norm, convexity, concavity
    int d = 1;
    int L = 3;
    json space;     // space document (all but the weight constants)
    json weight;    // weight document (muckenhoupt_p, fujii_wilson)
    json op;        // operator document (op_norm, weak_op_norm)
    double p = 2.0;
    double eta = 0.5;
    double r = 1.0, s = 1.0;
    bool shifted = false;
    SearchMode mode = SearchMode::Auto;
    Budget budget;
    std::uint64_t seed = 1;
};

struct SuiteConfig {
    std::string id;
    std::uint64_t seed = 1;
    int d = 1;
    std::vector<int> depths;
    int instances = 0;
    Budget budget;
    double tol = 1e-9;
    std::vector<json> spaces;
    json params = json::object();
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string out = "reports";
    bool strict = false;
    int jobs = 0;
    Budget budget;
    std::vector<ConstantTask> constants;
    std::vector<SuiteConfig> suites;
    std::vector<SuiteConfig> probes;
};

// Validates everything it can without running estimators: unknown keys,
// types, suite ids, space documents (instantiated on a small mesh) and the
// Banach-only rule of the suites that need it.
ExperimentConfig parse_config(const Document& doc);
ExperimentConfig load_config(const std::string& path);

// Canonical form: every default filled in, keys sorted on output.
json render_config(const ExperimentConfig& c);

// Applies a new master seed: suites and tasks without their own seed follow it.
void reseed(ExperimentConfig& c, std::uint64_t seed);

}  // namespace dyadlab
