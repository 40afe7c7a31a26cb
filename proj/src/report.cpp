#include "dyadlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dyadlab {

namespace {

std::string num17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(num17(v)); }

// nlohmann refuses non-finite doubles; swap them for strings first
json sanitize(const json& j) {
    if (j.is_number_float()) return number(j.get<double>());
    if (j.is_array()) {
        json out = json::array();
        for (const auto& e : j) out.push_back(sanitize(e));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = sanitize(it.value());
        return out;
    }
    return j;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

bool SuiteReport::ok() const {
    for (const auto& a : assertions)
        if (a.asserted && !a.passed) return false;
    return true;
}

std::vector<std::string> SuiteReport::failing() const {
    std::vector<std::string> out;
    for (const auto& a : assertions)
        if (a.asserted && !a.passed) out.push_back(a.id + "@" + a.instance);
    return out;
}

void SuiteReport::append(SuiteReport&& other) {
    for (auto& a : other.assertions) assertions.push_back(std::move(a));
    for (auto& r : other.rows) rows.push_back(std::move(r));
}

json to_json(const Assertion& a) {
    json j{{"id", a.id},
           {"instance", a.instance},
           {"relation", a.relation},
           {"lhs", number(a.lhs)},
           {"rhs", number(a.rhs)},
           {"lhs_certification", to_string(a.lhs_cert)},
           {"rhs_certification", to_string(a.rhs_cert)},
           {"tolerance", a.tol},
           {"asserted", a.asserted},
           {"passed", a.passed}};
    if (!a.note.empty()) j["note"] = a.note;
    return j;
}

json to_json(const SuiteReport& r) {
    json as = json::array(), rows = json::array();
    for (const auto& a : r.assertions) as.push_back(to_json(a));
    for (const auto& w : r.rows)
        rows.push_back(json{{"instance", w.instance},
                            {"quantity", w.quantity},
                            {"value", number(w.value)},
                            {"certification", to_string(w.cert)}});
    std::size_t asserted = 0, failed = 0;
    for (const auto& a : r.assertions) {
        asserted += a.asserted;
        failed += a.asserted && !a.passed;
    }
    return json{{"suite", r.id},
                {"seed", r.seed},
                {"meta", sanitize(r.meta)},
                {"assertions", as},
                {"rows", rows},
                {"summary", {{"asserted", asserted}, {"failed", failed}, {"reported", r.assertions.size() - asserted}}},
                {"passed", r.ok()}};
}

std::string rows_csv(const std::vector<Row>& rows) {
    std::string out = "instance,quantity,value,certification\n";
    for (const auto& r : rows)
        out += csv_field(r.instance) + "," + csv_field(r.quantity) + "," + num17(r.value) + "," + to_string(r.cert) + "\n";
    return out;
}

std::string constants_csv(const std::vector<ConstantReport>& reports) {
    std::string out = "name,space,value,upper,certification,seed\n";
    for (const auto& r : reports)
        out += csv_field(r.name) + "," + csv_field(r.space) + "," + num17(r.value) + "," + num17(r.upper) + "," +
               to_string(r.cert) + "," + std::to_string(r.budget.seed) + "\n";
    return out;
}

std::string render(const json& j) { return sanitize(j).dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    require(bool(os), ErrorKind::Config, "cannot write " + path);
    os << text;
    require(bool(os), ErrorKind::Config, "write failed for " + path);
}

std::string fingerprint(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dyadlab
