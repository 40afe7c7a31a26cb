#pragma once

#include <string>
#include <vector>

#include "dyadlab/constants.hpp"

namespace dyadlab {

// One inequality or identity checked by a suite. `asserted` is false for
// reported-only comparisons; those never fail a run.
struct Assertion {
    std::string id;
    std::string instance;
    std::string relation;  // "<=", "==", "check"
    double lhs = 0.0;
    double rhs = 0.0;
    Cert lhs_cert = Cert::Exact;
    Cert rhs_cert = Cert::Exact;
    double tol = 0.0;
    bool asserted = true;
    bool passed = true;
    std::string note;
};

struct Row {
    std::string instance;
    std::string quantity;
    double value = 0.0;
    Cert cert = Cert::Exact;
};

struct SuiteReport {
    std::string id;
    std::uint64_t seed = 0;
    std::vector<Assertion> assertions;
    std::vector<Row> rows;
    json meta = json::object();

    bool ok() const;
    std::vector<std::string> failing() const;
    void append(SuiteReport&& other);  // assertions and rows, in order
};

json to_json(const Assertion& a);
json to_json(const SuiteReport& r);

// instance,quantity,value,certification with 17 significant digits
std::string rows_csv(const std::vector<Row>& rows);
std::string constants_csv(const std::vector<ConstantReport>& reports);

// Sorted keys, two-space indent, trailing newline. Non-finite numbers are
// written as the strings "inf", "-inf", "nan".
std::string render(const json& j);

void write_file(const std::string& path, const std::string& text);

// 64-bit FNV-1a, hex
std::string fingerprint(const std::string& bytes);

}  // namespace dyadlab
