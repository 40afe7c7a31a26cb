#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dyadlab/config.hpp"
#include "dyadlab/report.hpp"

namespace dyadlab {

// Collects assertions for one suite run under the asymmetric policy: an
// inequality lhs <= rhs is asserted when rhs is EXACT, or when the search
// behind rhs was seeded with the witness of lhs (witness dominated). Anything
// else is reported only. In strict mode a LOWER_BOUND side raises a
// certification error instead.
class Recorder {
public:
    Recorder(std::string suite, bool strict) : suite_(std::move(suite)), strict_(strict) {}

    void le(const std::string& id, const std::string& inst, double lhs, Cert lc, double rhs, Cert rc, double tol,
            bool witness_dominated = false, const std::string& note = "");
    void eq(const std::string& id, const std::string& inst, double lhs, Cert lc, double rhs, Cert rc, double tol,
            const std::string& note = "");
    // Trend and postcondition checks. `basis` is the weakest certification of
    // the inputs; strict mode rejects a LOWER_BOUND basis.
    void check(const std::string& id, const std::string& inst, bool ok, const std::string& note = "",
               Cert basis = Cert::Exact);
    void report(const std::string& id, const std::string& inst, double lhs, Cert lc, double rhs, Cert rc,
                const std::string& note = "");
    void row(const std::string& inst, const std::string& quantity, double value, Cert c = Cert::Exact);
    void row(const std::string& inst, const ConstantReport& r);

    SuiteReport& out() { return rep_; }

private:
    void guard(const std::string& id, Cert lc, Cert rc) const;
    std::string suite_;
    bool strict_;
    SuiteReport rep_;
};

struct SuiteContext {
    const SuiteConfig& cfg;
    bool strict = false;
};

using SuiteFn = std::function<SuiteReport(const SuiteContext&)>;

struct SuiteInfo {
    std::string id;
    bool banach_only = false;  // every configured space must be normable
    bool probe = false;        // never asserts; run by the probe command
    SuiteFn run;
    SuiteConfig defaults;
};

const std::vector<SuiteInfo>& suite_registry();
const SuiteInfo& suite_info(const std::string& id);  // config error for unknown ids

// Runs one suite. Diagnostic errors become a failed assertion named
// "<suite>.error"; certification and config errors propagate.
SuiteReport run_suite(const SuiteConfig& cfg, bool strict);

// Instances i = 0..n-1 run on the OpenMP pool with their own recorders and
// are merged in index order.
void for_instances(int n, const std::string& suite, bool strict, SuiteReport& into,
                   const std::function<void(int, Recorder&)>& body);

// per-instance seed from a suite seed
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
// suite seed from the master seed and the suite id
std::uint64_t suite_seed(std::uint64_t master, const std::string& id);

// Certified bound B >= ||M^D||_{X->X}: Doob's p' on unweighted L^p, the exact
// norm on L^1_w and L^inf_w. Elsewhere the ascent lower bound times `safety`
// with `certified` false.
struct MaximalBound {
    double B = 0.0;
    bool certified = false;
    std::string source;
};
MaximalBound maximal_bound(const SpaceSpec& x, const Budget& b, double safety = 2.0);

// suites, defined in suites_core.cpp and suites_extra.cpp
SuiteReport suite_anchors(const SuiteContext& c);
SuiteReport suite_averaging(const SuiteContext& c);
SuiteReport suite_chain(const SuiteContext& c);
SuiteReport suite_duality(const SuiteContext& c);
SuiteReport suite_rdf(const SuiteContext& c);
SuiteReport suite_luxemburg(const SuiteContext& c);
SuiteReport suite_appendix(const SuiteContext& c);
SuiteReport suite_theorem_c(const SuiteContext& c);
SuiteReport suite_self_improvement(const SuiteContext& c);
SuiteReport suite_examples(const SuiteContext& c);
SuiteReport suite_probe(const SuiteContext& c);

}  // namespace dyadlab
