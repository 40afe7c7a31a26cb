#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dyadlab/config.hpp"
#include "dyadlab/report.hpp"
#include "dyadlab/verify.hpp"

using namespace dyadlab;

namespace {

std::string config_error(const std::string& text) {
    try {
        parse_config(parse_document(text, "cfg.yaml"));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    FAIL("config was accepted");
    return "";
}

SuiteConfig quick(const std::string& id) {
    SuiteConfig s = suite_info(id).defaults;
    s.seed = 11;
    s.budget.starts = 2;
    s.budget.rounds = 8;
    s.budget.samples = 8;
    return s;
}

}  // namespace

TEST_CASE("yaml and json documents carry line numbers") {
    Document d = parse_document("seed: 3\nsuites:\n  - id: chain\n    instances: 4\n", "x.yaml");
    CHECK(d.root["seed"] == 3);
    CHECK(d.line("/suites/0/instances") == 4);
    CHECK(d.line("/suites/0/missing") == 3);
    Document j = parse_document("{\"seed\": 5,\n \"out\": \"r\"}", "x.json");
    CHECK(j.root["out"] == "r");
    CHECK(j.line("/out") == 2);
    Document inf = parse_document("p: .inf\nq: inf\ns: \"inf\"\n", "x.yaml");
    CHECK(std::isinf(inf.root["p"].get<double>()));
    CHECK(std::isinf(inf.root["q"].get<double>()));
    CHECK(inf.root["s"].is_string());
    CHECK_THROWS_AS(parse_document("a: [1, 2\n", "x.yaml"), Error);
}

TEST_CASE("rejected configs name the offending line") {
    CHECK(config_error("seed: 1\nsuites:\n  - id: chain\n    spaces:\n      - {type: lebesgue, p: 0.5}\n")
              .find("cfg.yaml:5:") != std::string::npos);
    CHECK(config_error("seed: 1\nsuites:\n  - id: chain\n    spaces:\n      - {type: lebesgue, p: 0.5}\n")
              .find("not normable") != std::string::npos);
    CHECK(config_error("seed: 1\nbogus: 2\n").find("cfg.yaml:2: unknown key 'bogus'") != std::string::npos);
    CHECK(config_error("suites:\n  - id: nope\n").find("unknown suite") != std::string::npos);
    CHECK(config_error("suites: [anchors, anchors]\n").find("twice") != std::string::npos);
    CHECK(config_error("probes: [chain]\n").find("verify suite") != std::string::npos);
    CHECK(config_error("constants:\n  - name: A\n    mesh: {d: 1, L: 2}\n    space: {type: lebesgue, p: -1}\n")
              .find("cfg.yaml:4:") != std::string::npos);
    CHECK(config_error("constants:\n  - name: muckenhoupt_p\n    weight: [1, 0]\n    mesh: {d: 1, L: 1}\n")
              .find("positive") != std::string::npos);
    CHECK(config_error("constants:\n  - name: A\n    mesh: {d: 1, L: 2}\n    space: {type: lebesgue, p: 2, weight: [1, 2]}\n")
              .find("4 cells") != std::string::npos);
    CHECK(config_error("suites:\n  - id: duality\n    params: {fs_q: 3}\n").find("unknown parameter") != std::string::npos);
    CHECK(config_error("budget: {gap: 2}\n").find("gap") != std::string::npos);
    // non-normable spaces are fine outside the Banach-only suites
    CHECK_NOTHROW(parse_config(parse_document(
        "probes:\n  - id: probe\n    spaces: [{type: lebesgue, p: 0.5}]\n", "p.yaml")));
}

TEST_CASE("config render round trip") {
    const char* text = R"(seed: 12
budget: {starts: 3}
constants:
  - name: A
    mesh: {d: 2, L: 2}
    space: {type: morrey, p: 1.5, q: 3, weight: {generator: power, alpha: -0.3}}
  - name: op_norm
    space: {type: lebesgue, p: .inf}
    operator: {type: sparse, family: full_tree}
suites:
  - anchors
  - id: chain
    depths: [2, 3]
    instances: 7
    spaces: [{type: lebesgue, p: 2, weight: {generator: lognormal, sigma: 0.3}}]
probes: [probe]
)";
    ExperimentConfig c = parse_config(parse_document(text, "t.yaml"));
    CHECK(c.constants.size() == 2);
    CHECK(c.constants[0].d == 2);
    CHECK(c.constants[0].budget.starts == 3);
    CHECK(c.suites[1].instances == 7);
    CHECK(c.suites[0].params == suite_info("anchors").defaults.params);
    std::string once = render(render_config(c));
    ExperimentConfig again = parse_config(parse_document(once, "r.json"));
    CHECK(render(render_config(again)) == once);
    CHECK(again.suites[1].seed == c.suites[1].seed);
    CHECK(again.constants[1].seed == c.constants[1].seed);

    ExperimentConfig other = c;
    reseed(other, 13);
    CHECK(other.suites[0].seed != c.suites[0].seed);
    CHECK(other.constants[0].seed != c.constants[0].seed);
    reseed(other, 12);
    CHECK(render(render_config(other)) == once);
}

TEST_CASE("generators") {
    Mesh m(1, 3);
    GridFunction a = function_from_doc(json{{"generator", "lognormal"}, {"sigma", 0.7}}, m, 5);
    GridFunction b = function_from_doc(json{{"generator", "lognormal"}, {"sigma", 0.7}}, m, 5);
    CHECK(a.values() == b.values());
    CHECK(a.all_positive());
    GridFunction t = function_from_doc(json{{"generator", "two_level"}, {"a", 1}, {"b", 4}, {"split", 0.25}}, m, 0);
    CHECK(t.values() == std::vector<double>{1, 1, 4, 4, 4, 4, 4, 4});
    // dist(center, 0)^(alpha d); the first cell is clamped to half a cell
    GridFunction p = function_from_doc(json{{"generator", "power"}, {"alpha", 1.0}}, m, 0);
    CHECK(p[0] == doctest::Approx(1.0 / 16));
    CHECK(p[1] == doctest::Approx(3.0 / 16));
    CHECK(function_from_doc(json(2.5), m, 0).values() == std::vector<double>(8, 2.5));
    CHECK_THROWS_AS(function_from_doc(json{{"generator", "nope"}}, m, 0), Error);
}

TEST_CASE("recorder follows the asymmetric policy") {
    Recorder r("s", false);
    r.le("exact_rhs", "i", 1.0, Cert::LowerBound, 2.0, Cert::Exact, 1e-9);
    r.le("lb_rhs", "i", 3.0, Cert::Exact, 2.0, Cert::LowerBound, 1e-9);
    r.le("dominated", "i", 1.0, Cert::Exact, 1.0 - 1e-12, Cert::LowerBound, 1e-9, true);
    r.eq("eq_lb", "i", 1.0, Cert::LowerBound, 1.0, Cert::Exact, 1e-9);
    r.eq("eq_exact", "i", 1.0, Cert::Exact, 1.1, Cert::Exact, 1e-9);
    r.report("reported", "i", 5.0, Cert::Exact, 1.0, Cert::Exact);
    const auto& a = r.out().assertions;
    CHECK(a[0].asserted);
    CHECK(a[0].passed);
    CHECK_FALSE(a[1].asserted);
    CHECK(a[2].asserted);
    CHECK(a[2].passed);
    CHECK_FALSE(a[3].asserted);
    CHECK(a[4].asserted);
    CHECK_FALSE(a[4].passed);
    CHECK_FALSE(a[5].asserted);
    CHECK(r.out().failing() == std::vector<std::string>{"eq_exact@i"});
    CHECK_FALSE(r.out().ok());

    Recorder strict("s", true);
    CHECK_NOTHROW(strict.le("ok", "i", 1.0, Cert::Exact, 2.0, Cert::Exact, 0));
    CHECK_NOTHROW(strict.report("fine", "i", 1.0, Cert::LowerBound, 2.0, Cert::LowerBound));
    try {
        strict.le("bad", "i", 1.0, Cert::LowerBound, 2.0, Cert::Exact, 0);
        FAIL("expected a certification error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Certification);
    }
    CHECK_THROWS_AS(strict.check("trend", "i", true, "", Cert::LowerBound), Error);
}

TEST_CASE("report serialization") {
    SuiteReport r;
    r.id = "x";
    r.seed = 4;
    r.assertions.push_back(Assertion{"a", "i", "<=", 1.0, INFINITY, Cert::Exact, Cert::Exact, 0, true, true, ""});
    r.rows.push_back(Row{"q,1", "v", 0.1, Cert::LowerBound});
    json j = to_json(r);
    CHECK(j["summary"]["asserted"] == 1);
    CHECK(j["passed"] == true);
    CHECK(j["assertions"][0]["rhs"] == "inf");
    CHECK(render(j).back() == '\n');
    CHECK(rows_csv(r.rows) == "instance,quantity,value,certification\n\"q,1\",v,0.10000000000000001,LOWER_BOUND\n");
    CHECK(fingerprint("") == "cbf29ce484222325");
    CHECK(fingerprint("a") != fingerprint("b"));
}

TEST_CASE("seeds") {
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(1, 3));
    CHECK(mix_seed(1, 2) != mix_seed(2, 2));
    CHECK(suite_seed(7, "chain") != suite_seed(7, "rdf"));
}

TEST_CASE("maximal operator bounds") {
    Mesh m(1, 3);
    auto d = maximal_bound(lebesgue(m, 3.0), Budget{});
    CHECK(d.certified);
    CHECK(d.B == doctest::Approx(1.5));
    auto one = maximal_bound(lebesgue(m, 1.0), Budget{});
    CHECK(one.certified);
    CHECK(one.B == doctest::Approx(2.5));
    GridFunction w(m, std::vector<double>{1, 2, 1, 3, 1, 1, 4, 1});
    auto lb = maximal_bound(weighted_lebesgue(2.0, w), Budget{}, 2.0);
    CHECK_FALSE(lb.certified);
    CHECK(lb.B >= 2.0);
}

TEST_CASE("suites are deterministic and order independent of threads") {
    for (const char* id : {"anchors", "averaging", "rdf", "appendix"}) {
        SuiteConfig s = quick(id);
        if (s.instances > 6) s.instances = 6;
        SuiteReport a = run_suite(s, false), b = run_suite(s, false);
        CHECK_MESSAGE(render(to_json(a)) == render(to_json(b)), id);
        CHECK_MESSAGE(a.ok(), id);
    }
}

TEST_CASE("strict mode rejects lower bounds in asserted positions") {
    SuiteConfig s = quick("examples");
    s.depths = {2, 3};
    s.budget.max_iter = 500;
    CHECK_THROWS_AS(run_suite(s, true), Error);
    SuiteConfig a = quick("anchors");
    CHECK(run_suite(a, true).ok());
}
