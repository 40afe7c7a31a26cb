#include "dyadlab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dyadlab/verify.hpp"
#include "suite_util.hpp"

namespace dyadlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json scalar(const YAML::Node& n) {
    const std::string& s = n.Scalar();
    if (n.Tag() == "!") return s;  // quoted
    if (s == "true" || s == "True") return true;
    if (s == "false" || s == "False") return false;
    if (s == "null" || s == "~" || s.empty()) return nullptr;
    if (s == ".inf" || s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos == s.size()) return v;
    } catch (...) {
    }
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (...) {
    }
    return s;
}

json convert(const YAML::Node& n, const std::string& ptr, std::map<std::string, int>& lines) {
    lines[ptr] = n.Mark().line + 1;
    switch (n.Type()) {
        case YAML::NodeType::Sequence: {
            json a = json::array();
            for (std::size_t i = 0; i < n.size(); ++i) a.push_back(convert(n[i], ptr + "/" + std::to_string(i), lines));
            return a;
        }
        case YAML::NodeType::Map: {
            json o = json::object();
            for (auto it = n.begin(); it != n.end(); ++it) {
                std::string key = it->first.as<std::string>();
                o[key] = convert(it->second, ptr + "/" + key, lines);
            }
            return o;
        }
        case YAML::NodeType::Scalar: return scalar(n);
        default: return nullptr;
    }
}

// Reads typed fields from an object and rejects unknown keys.
class Reader {
public:
    Reader(const Document& doc, std::string ptr) : doc_(doc), ptr_(std::move(ptr)) {
        node_ = &doc.root;
        if (!ptr_.empty()) node_ = &doc.root.at(json::json_pointer(ptr_));
        if (!node_->is_object()) doc.fail_at(ptr_, "expected a mapping");
    }

    bool has(const std::string& k) const { return node_->contains(k); }
    std::string at(const std::string& k) const { return ptr_ + "/" + k; }
    const json& raw(const std::string& k) {
        seen_.insert(k);
        return node_->at(k);
    }

    double number(const std::string& k, double def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (v.is_number()) return v.get<double>();
        if (v.is_string() && (v == "inf" || v == "Infinity")) return kInf;
        doc_.fail_at(at(k), "'" + k + "' must be a number");
    }
    long long integer(const std::string& k, long long def, long long lo, long long hi) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_number_integer()) doc_.fail_at(at(k), "'" + k + "' must be an integer");
        long long x = v.get<long long>();
        if (x < lo || x > hi)
            doc_.fail_at(at(k), "'" + k + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }
    bool boolean(const std::string& k, bool def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_boolean()) doc_.fail_at(at(k), "'" + k + "' must be true or false");
        return v.get<bool>();
    }
    std::string text(const std::string& k, const std::string& def) {
        if (!has(k)) return def;
        const json& v = raw(k);
        if (!v.is_string()) doc_.fail_at(at(k), "'" + k + "' must be a string");
        return v.get<std::string>();
    }
    json any(const std::string& k, const json& def = nullptr) { return has(k) ? raw(k) : def; }

    void done() const {
        for (auto it = node_->begin(); it != node_->end(); ++it)
            if (!seen_.count(it.key())) doc_.fail_at(at(it.key()), "unknown key '" + it.key() + "'");
    }

private:
    const Document& doc_;
    std::string ptr_;
    const json* node_;
    std::set<std::string> seen_;
};

double exponent_of(const json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && (j == "inf" || j == "Infinity")) return kInf;
    fail(ErrorKind::Config, std::string("'") + what + "' must be a number");
}

std::vector<DyadicCube> family_of(const json& doc, const Mesh& m) {
    if (doc.is_string() && doc == "full_tree") return all_cubes(m);
    require(doc.is_array(), ErrorKind::Config, "family must be a list of cubes or \"full_tree\"");
    std::vector<DyadicCube> out;
    for (const auto& s : doc) {
        require(s.is_string(), ErrorKind::Config, "cube entries are strings like \"2 1\"");
        DyadicCube q = parse_cube(s.get<std::string>(), m.d);
        require(valid_cube(m, q), ErrorKind::Config, "cube " + s.get<std::string>() + " is not on the mesh");
        out.push_back(q);
    }
    return out;
}

PhiFunction phi_from_doc(const json& doc, const Mesh& m, std::uint64_t seed) {
    require(doc.is_object(), ErrorKind::Config, "phi must be a mapping");
    std::string kind = doc.value("kind", "");
    if (kind == "power" || kind == "variable") {
        GridFunction p = kind == "power" ? GridFunction(m, exponent_of(doc.at("p"), "p"))
                                          : function_from_doc(doc.at("p"), m, mix_seed(seed, 11));
        GridFunction w = doc.contains("weight") ? function_from_doc(doc.at("weight"), m, mix_seed(seed, 12))
                                                : GridFunction(m, 1.0);
        return PhiFunction::variable_exponent(p, w);
    }
    if (kind == "table") {
        auto t = doc.at("t").get<std::vector<double>>();
        auto v = doc.at("v").get<std::vector<double>>();
        return PhiFunction::uniform(m, make_table(t, v, doc.value("tail", 0.0), doc.value("capped", false)));
    }
    fail(ErrorKind::Config, "phi kind must be power, variable or table");
}

const std::set<std::string> kConstantNames = {"A",       "A_strong",     "A_sparse", "G",           "C2",
                                              "C2_tilde", "muckenhoupt_p", "fujii_wilson", "op_norm", "weak_op_norm",
                                              "convexity", "concavity"};

Budget budget_at(const Document& doc, const std::string& ptr, const Budget& base) {
    Budget b = base;
    Reader r(doc, ptr);
    b.starts = int(r.integer("starts", b.starts, 0, 1 << 20));
    b.rounds = int(r.integer("rounds", b.rounds, 0, 1 << 20));
    b.samples = int(r.integer("samples", b.samples, 0, 1 << 24));
    b.max_iter = int(r.integer("max_iter", b.max_iter, 1, 1 << 28));
    b.gap = r.number("gap", b.gap);
    if (!(b.gap > 0.0 && b.gap < 1.0)) doc.fail_at(ptr + "/gap", "gap must lie in (0, 1)");
    r.done();
    return b;
}

json budget_json(const Budget& b) {
    return json{{"starts", b.starts}, {"rounds", b.rounds}, {"samples", b.samples}, {"max_iter", b.max_iter}, {"gap", b.gap}};
}

// instantiates a space document on a small mesh to surface errors early
void probe_space(const Document& doc, const std::string& ptr, const json& space, int d, bool banach_only) {
    try {
        SpaceSpec x = space_from_doc(space, Mesh(d, 1), 1);
        if (banach_only && !is_banach(x))
            doc.fail_at(ptr, "space " + describe(x) + " is not normable; this suite needs a Banach space");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config && std::string(e.what()).find(':') != std::string::npos &&
            std::string(e.what()).find(doc.name) != std::string::npos)
            throw;
        doc.fail_at(ptr, e.what());
    }
}

SuiteConfig read_suite(const Document& doc, const std::string& ptr, const ExperimentConfig& c, bool probe) {
    Reader r(doc, ptr);
    std::string id = r.text("id", "");
    if (id.empty()) doc.fail_at(ptr, "suite needs an 'id'");
    const SuiteInfo* info = nullptr;
    for (const auto& s : suite_registry())
        if (s.id == id) info = &s;
    if (!info) doc.fail_at(r.at("id"), "unknown suite '" + id + "'");
    if (info->probe != probe)
        doc.fail_at(r.at("id"), probe ? "'" + id + "' is a verify suite, not a probe" : "'" + id + "' is a probe suite");
    SuiteConfig s = info->defaults;
    s.id = id;
    s.seed = suite_seed(c.seed, id);
    s.d = int(r.integer("d", s.d, 1, 3));
    if (r.has("depths")) {
        const json& dj = r.raw("depths");
        if (!dj.is_array() || dj.empty()) doc.fail_at(r.at("depths"), "'depths' must be a non-empty list");
        s.depths.clear();
        for (std::size_t i = 0; i < dj.size(); ++i) {
            if (!dj[i].is_number_integer() || dj[i].get<int>() < 0 || dj[i].get<int>() * s.d > 14)
                doc.fail_at(r.at("depths") + "/" + std::to_string(i), "depth must be an integer with L*d <= 14");
            s.depths.push_back(dj[i].get<int>());
        }
    }
    s.instances = int(r.integer("instances", s.instances, 0, 100000));
    if (r.has("budget")) {
        (void)r.raw("budget");
        s.budget = budget_at(doc, r.at("budget"), s.budget);
    }
    s.tol = r.number("tolerance", s.tol);
    if (!(s.tol >= 0.0)) doc.fail_at(r.at("tolerance"), "tolerance must be nonnegative");
    if (r.has("spaces")) {
        const json& sj = r.raw("spaces");
        if (!sj.is_array()) doc.fail_at(r.at("spaces"), "'spaces' must be a list");
        s.spaces.clear();
        for (std::size_t i = 0; i < sj.size(); ++i) {
            probe_space(doc, r.at("spaces") + "/" + std::to_string(i), sj[i], s.d, info->banach_only);
            s.spaces.push_back(sj[i]);
        }
    } else {
        for (const auto& sp : s.spaces) probe_space(doc, ptr, sp, s.d, info->banach_only);
    }
    if (r.has("params")) {
        const json& pj = r.raw("params");
        if (!pj.is_object()) doc.fail_at(r.at("params"), "'params' must be a mapping");
        for (auto it = pj.begin(); it != pj.end(); ++it) {
            if (!s.params.contains(it.key()))
                doc.fail_at(r.at("params") + "/" + it.key(), "unknown parameter '" + it.key() + "' for suite " + id);
            s.params[it.key()] = it.value();
        }
    }
    r.done();
    return s;
}

ConstantTask read_task(const Document& doc, const std::string& ptr, const ExperimentConfig& c, std::size_t index) {
    Reader r(doc, ptr);
    ConstantTask t;
    t.name = r.text("name", "");
    if (!kConstantNames.count(t.name)) doc.fail_at(r.at("name"), "unknown constant '" + t.name + "'");
    t.seed = mix_seed(c.seed, 1000 + index);
    t.budget = c.budget;
    if (r.has("mesh")) {
        (void)r.raw("mesh");
        Reader mr(doc, r.at("mesh"));
        t.d = int(mr.integer("d", 1, 1, 3));
        t.L = int(mr.integer("L", 3, 0, 14));
        if (t.L * t.d > 14) doc.fail_at(r.at("mesh"), "mesh too large: L*d must be at most 14");
        mr.done();
    }
    t.p = r.number("p", t.p);
    t.eta = r.number("eta", t.eta);
    t.r = r.number("r", t.r);
    t.s = r.number("s", t.s);
    t.shifted = r.boolean("shifted", false);
    try {
        t.mode = parse_search_mode(r.text("mode", "auto"));
    } catch (const Error& e) {
        doc.fail_at(r.at("mode"), e.what());
    }
    if (r.has("budget")) {
        (void)r.raw("budget");
        t.budget = budget_at(doc, r.at("budget"), t.budget);
    }
    t.space = r.any("space");
    t.weight = r.any("weight");
    t.op = r.any("operator");
    r.done();

    Mesh m(t.d, t.L);
    const bool weight_only = t.name == "muckenhoupt_p" || t.name == "fujii_wilson";
    if (weight_only) {
        if (t.weight.is_null()) doc.fail_at(ptr, t.name + " needs a 'weight'");
        try {
            GridFunction w = function_from_doc(t.weight, m, t.seed);
            if (!w.all_positive()) doc.fail_at(r.at("weight"), "weights must be positive");
        } catch (const Error& e) {
            doc.fail_at(r.at("weight"), e.what());
        }
        if (t.name == "muckenhoupt_p" && !(t.p >= 1.0)) doc.fail_at(r.at("p"), "p must be at least 1");
    } else {
        if (t.space.is_null()) doc.fail_at(ptr, t.name + " needs a 'space'");
        try {
            (void)space_from_doc(t.space, m, t.seed);
        } catch (const Error& e) {
            doc.fail_at(r.at("space"), e.what());
        }
    }
    if (t.name == "op_norm" || t.name == "weak_op_norm") {
        if (t.op.is_null()) t.op = json{{"type", "maximal"}};
        try {
            (void)operator_from_doc(t.op, m);
        } catch (const Error& e) {
            doc.fail_at(r.at("operator"), e.what());
        }
    }
    if (t.name == "A_sparse" && !(t.eta > 0.0 && t.eta <= 1.0)) doc.fail_at(r.at("eta"), "eta must lie in (0, 1]");
    if ((t.name == "convexity" || t.name == "concavity") && !(t.r >= 1.0 && t.r <= t.s))
        doc.fail_at(ptr, "convexity constants need 1 <= r <= s");
    return t;
}

json suite_json(const SuiteConfig& s) {
    return json{{"id", s.id},       {"d", s.d},           {"depths", s.depths}, {"instances", s.instances},
                {"budget", budget_json(s.budget)}, {"tolerance", s.tol}, {"spaces", s.spaces},
                {"params", s.params}};
}

}  // namespace

int Document::line(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
        auto it = lines.find(p);
        if (it != lines.end()) return it->second;
        if (p.empty()) return 0;
        p = p.substr(0, p.rfind('/'));
    }
}

void Document::fail_at(const std::string& pointer, const std::string& what) const {
    fail(ErrorKind::Config, name + ":" + std::to_string(line(pointer)) + ": " + what);
}

Document parse_document(const std::string& text, const std::string& name) {
    Document d;
    d.name = name;
    try {
        YAML::Node n = YAML::Load(text);
        d.root = convert(n, "", d.lines);
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::Config, name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (d.root.is_null()) d.root = json::object();
    return d;
}

GridFunction function_from_doc(const json& doc, const Mesh& m, std::uint64_t seed) {
    if (doc.is_number() || doc.is_string()) return GridFunction(m, exponent_of(doc, "value"));
    if (doc.is_array()) {
        require(doc.size() == m.cells(), ErrorKind::Config,
                "explicit function has " + std::to_string(doc.size()) + " values, mesh has " +
                    std::to_string(m.cells()) + " cells");
        std::vector<double> v;
        for (const auto& e : doc) v.push_back(exponent_of(e, "value"));
        return GridFunction(m, v);
    }
    require(doc.is_object(), ErrorKind::Config, "function must be a number, a list or a generator");
    std::string g = doc.value("generator", "");
    GridFunction out(m, 0.0);
    if (g == "constant") {
        out = GridFunction(m, exponent_of(doc.at("value"), "value"));
    } else if (g == "lognormal") {
        double sigma = doc.at("sigma").get<double>();
        require(sigma >= 0.0, ErrorKind::Config, "sigma must be nonnegative");
        suites::Rng rng(seed);
        for (auto& v : out.values()) v = std::exp(sigma * rng.normal());
    } else if (g == "power") {
        double alpha = doc.at("alpha").get<double>();
        const double h = std::ldexp(1.0, -m.L);
        for (std::size_t c = 0; c < m.cells(); ++c) {
            auto x = cell_center(m, c);
            double r = 0.0;
            for (double t : x) r += t * t;
            r = std::max(std::sqrt(r), 0.5 * h);
            out[c] = std::pow(r, alpha * m.d);
        }
    } else if (g == "two_level") {
        double a = exponent_of(doc.at("a"), "a"), b = exponent_of(doc.at("b"), "b");
        double split = doc.value("split", 0.5);
        for (std::size_t c = 0; c < m.cells(); ++c) out[c] = cell_center(m, c)[0] < split ? a : b;
    } else {
        fail(ErrorKind::Config, "unknown generator '" + g + "'");
    }
    return out;
}

SpaceSpec space_from_doc(const json& doc, const Mesh& m, std::uint64_t seed) {
    require(doc.is_object(), ErrorKind::Config, "space must be a mapping with a 'type'");
    const std::string type = doc.value("type", "");
    auto weight = [&] {
        return doc.contains("weight") ? function_from_doc(doc.at("weight"), m, mix_seed(seed, 1)) : GridFunction(m, 1.0);
    };
    auto inner = [&] {
        require(doc.contains("inner"), ErrorKind::Config, type + " needs an 'inner' space");
        return space_from_doc(doc.at("inner"), m, mix_seed(seed, 2));
    };
    try {
        if (type == "lebesgue") return weighted_lebesgue(exponent_of(doc.at("p"), "p"), weight());
        if (type == "variable")
            return variable_lebesgue(function_from_doc(doc.at("p"), m, mix_seed(seed, 3)), weight());
        if (type == "orlicz") return musielak_orlicz(phi_from_doc(doc.at("phi"), m, seed));
        if (type == "amemiya") return orlicz_amemiya(phi_from_doc(doc.at("phi"), m, seed));
        if (type == "morrey")
            return morrey(exponent_of(doc.at("p"), "p"), exponent_of(doc.at("q"), "q"), weight());
        if (type == "block") return block(exponent_of(doc.at("p"), "p"), exponent_of(doc.at("q"), "q"), weight());
        if (type == "concavification") return concavification(inner(), exponent_of(doc.at("r"), "r"));
        if (type == "dual") return kothe_dual(inner());
        if (type == "weak") return weak_type(inner());
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, type + ": missing or mistyped field (" + std::string(e.what()) + ")");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        fail(ErrorKind::Config, e.what());
    }
    fail(ErrorKind::Config, "unknown space type '" + type + "'");
}

OperatorSpec operator_from_doc(const json& doc, const Mesh& m) {
    require(doc.is_object(), ErrorKind::Config, "operator must be a mapping with a 'type'");
    const std::string type = doc.value("type", "");
    try {
        if (type == "maximal") return dyadic_maximal(doc.value("shifted", false));
        if (type == "sharp") return sharp_maximal();
        if (type == "averaging") {
            DyadicCube q = parse_cube(doc.at("cube").get<std::string>(), m.d);
            check_cube(m, q);
            return averaging(q);
        }
        if (type == "disjoint_averaging") return disjoint_averaging(family_of(doc.at("family"), m));
        if (type == "sparse") return sparse_operator(family_of(doc.at("family"), m));
        if (type == "restricted") return restricted_maximal(family_of(doc.at("family"), m));
        if (type == "r_average") return r_average(doc.at("r").get<double>());
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, type + ": missing or mistyped field (" + std::string(e.what()) + ")");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        fail(ErrorKind::Config, e.what());
    }
    fail(ErrorKind::Config, "unknown operator type '" + type + "'");
}

ExperimentConfig parse_config(const Document& doc) {
    ExperimentConfig c;
    if (!doc.root.is_object()) doc.fail_at("", "config must be a mapping");
    Reader r(doc, "");
    c.seed = std::uint64_t(r.integer("seed", 1, 0, std::numeric_limits<long long>::max()));
    c.out = r.text("out", c.out);
    c.strict = r.boolean("strict", false);
    c.jobs = int(r.integer("jobs", 0, 0, 4096));
    if (r.has("budget")) {
        (void)r.raw("budget");
        c.budget = budget_at(doc, "/budget", c.budget);
    }
    auto list = [&](const char* key) -> std::size_t {
        if (!r.has(key)) return 0;
        const json& v = r.raw(key);
        if (!v.is_array()) doc.fail_at(std::string("/") + key, std::string("'") + key + "' must be a list");
        return v.size();
    };
    const std::size_t nc = list("constants"), ns = list("suites"), np = list("probes");
    for (std::size_t i = 0; i < nc; ++i) c.constants.push_back(read_task(doc, "/constants/" + std::to_string(i), c, i));
    std::set<std::string> ids;
    for (std::size_t i = 0; i < ns; ++i) {
        std::string ptr = "/suites/" + std::to_string(i);
        if (doc.root.at(json::json_pointer(ptr)).is_string()) {
            // bare id: defaults
            std::string id = doc.root.at(json::json_pointer(ptr)).get<std::string>();
            Document tmp{json{{"id", id}}, {{"", doc.line(ptr)}}, doc.name};
            c.suites.push_back(read_suite(tmp, "", c, false));
        } else {
            c.suites.push_back(read_suite(doc, ptr, c, false));
        }
        if (!ids.insert(c.suites.back().id).second) doc.fail_at(ptr, "suite '" + c.suites.back().id + "' listed twice");
    }
    for (std::size_t i = 0; i < np; ++i) {
        std::string ptr = "/probes/" + std::to_string(i);
        if (doc.root.at(json::json_pointer(ptr)).is_string()) {
            std::string id = doc.root.at(json::json_pointer(ptr)).get<std::string>();
            Document tmp{json{{"id", id}}, {{"", doc.line(ptr)}}, doc.name};
            c.probes.push_back(read_suite(tmp, "", c, true));
        } else {
            c.probes.push_back(read_suite(doc, ptr, c, true));
        }
    }
    r.done();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), ErrorKind::Config, "cannot read config " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(parse_document(ss.str(), path));
}

json render_config(const ExperimentConfig& c) {
    json cons = json::array(), suites = json::array(), probes = json::array();
    for (const auto& t : c.constants) {
        json j{{"name", t.name},
               {"mesh", {{"d", t.d}, {"L", t.L}}},
               {"p", exponent_json(t.p)},
               {"eta", t.eta},
               {"r", exponent_json(t.r)},
               {"s", exponent_json(t.s)},
               {"shifted", t.shifted},
               {"mode", to_string(t.mode)},
               {"budget", budget_json(t.budget)}};
        if (!t.space.is_null()) j["space"] = t.space;
        if (!t.weight.is_null()) j["weight"] = t.weight;
        if (!t.op.is_null()) j["operator"] = t.op;
        cons.push_back(j);
    }
    for (const auto& s : c.suites) suites.push_back(suite_json(s));
    for (const auto& s : c.probes) probes.push_back(suite_json(s));
    return json{{"seed", c.seed},         {"out", c.out},           {"strict", c.strict}, {"jobs", c.jobs},
                {"budget", budget_json(c.budget)}, {"constants", cons}, {"suites", suites},  {"probes", probes}};
}

void reseed(ExperimentConfig& c, std::uint64_t seed) {
    c.seed = seed;
    for (auto& s : c.suites) s.seed = suite_seed(seed, s.id);
    for (auto& s : c.probes) s.seed = suite_seed(seed, s.id);
    for (std::size_t i = 0; i < c.constants.size(); ++i) c.constants[i].seed = mix_seed(seed, 1000 + i);
}

}  // namespace dyadlab
