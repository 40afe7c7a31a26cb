#include <omp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "dyadlab/config.hpp"
#include "dyadlab/report.hpp"
#include "dyadlab/verify.hpp"

#ifndef DYADLAB_VERSION
#define DYADLAB_VERSION "0.0.0"
#endif

using namespace dyadlab;

namespace {

struct Args {
    std::string command;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool strict = false;
    int jobs = 0;
    std::vector<std::string> suites;
};

std::string read_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), ErrorKind::Config, "cannot read config " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
    void put(const std::string& name, const std::string& text) {
        write_file(dir_ + "/" + name, text);
        files_[name] = fingerprint(text);
    }
    const std::map<std::string, std::string>& files() const { return files_; }

private:
    std::string dir_;
    std::map<std::string, std::string> files_;
};

std::vector<ConstantReport> run_task(const ConstantTask& t, bool strict) {
    Mesh m(t.d, t.L);
    EstimateOptions o;
    o.budget = t.budget;
    o.budget.seed = t.seed;
    o.mode = t.mode;
    o.strict = strict;
    std::vector<ConstantReport> out;
    const std::string& n = t.name;
    if (n == "muckenhoupt_p") {
        out.push_back(muckenhoupt_weight_constant(function_from_doc(t.weight, m, t.seed), t.p, t.shifted));
    } else if (n == "fujii_wilson") {
        out.push_back(fujii_wilson_constant(function_from_doc(t.weight, m, t.seed)));
    }
    if (!out.empty()) {
        out.back().budget = o.budget;  // closed form, recorded for the report only
    } else {
        SpaceSpec x = space_from_doc(t.space, m, t.seed);
        if (n == "A") {
            out.push_back(muckenhoupt_space_constant(x, o));
        } else if (n == "A_strong") {
            out.push_back(a_strong_constant(x, o));
        } else if (n == "A_sparse") {
            out.push_back(a_sparse_constant(x, t.eta, o));
        } else if (n == "G" || n == "C2" || n == "C2_tilde") {
            GReport g = g_constant(x, o);
            out.push_back(n == "G" ? g.G : n == "C2" ? g.C2 : g.C2_tilde);
        } else if (n == "op_norm" || n == "weak_op_norm") {
            out.push_back(op_norm(operator_from_doc(t.op, m), x, n == "op_norm" ? Target::Strong : Target::Weak, o));
        } else {
            ConvexityReport c = convexity_constants(x, t.r, t.s, o);
            out.push_back(n == "convexity" ? c.convexity : c.concavity);
        }
    }
    for (const auto& r : out) enforce(r, o);
    return out;
}

int run(const Args& a) {
    const std::string bytes = read_bytes(a.config);
    ExperimentConfig cfg = parse_config(parse_document(bytes, a.config));
    if (a.seed) reseed(cfg, *a.seed);
    // the canonical config keeps the configured out; --out only moves the files
    const std::string out_dir = a.out.empty() ? cfg.out : a.out;
    const bool strict = a.strict || cfg.strict;
    const int jobs = a.jobs > 0 ? a.jobs : cfg.jobs;
    if (jobs > 0) omp_set_num_threads(jobs);

    auto keep = [&](const std::string& id) {
        return a.suites.empty() || std::find(a.suites.begin(), a.suites.end(), id) != a.suites.end();
    };
    for (const auto& id : a.suites) (void)suite_info(id);

    Outputs files(out_dir);
    const std::string canonical = render(render_config(cfg));
    json seeds = json::object();
    int code = 0;

    if (a.command == "constants") {
        std::vector<ConstantReport> reports;
        for (const auto& t : cfg.constants)
            for (auto& r : run_task(t, strict)) {
                std::printf("%-14s %-40s %.12g %s\n", r.name.c_str(), r.space.c_str(), r.value, to_string(r.cert));
                reports.push_back(std::move(r));
            }
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(to_json(r));
        files.put("constants.json", render(arr));
        files.put("constants.csv", constants_csv(reports));
        for (std::size_t i = 0; i < cfg.constants.size(); ++i)
            seeds["constants/" + std::to_string(i)] = cfg.constants[i].seed;
    } else {
        const bool probe = a.command == "probe";
        std::vector<std::string> failing;
        for (const auto& s : probe ? cfg.probes : cfg.suites) {
            if (!keep(s.id)) continue;
            SuiteReport r = run_suite(s, strict && !probe);
            files.put(s.id + ".json", render(to_json(r)));
            files.put(s.id + ".csv", rows_csv(r.rows));
            seeds[s.id] = s.seed;
            std::size_t asserted = 0;
            for (const auto& x : r.assertions) asserted += x.asserted;
            auto bad = r.failing();
            std::printf("%-18s %s  asserted %zu, failed %zu, rows %zu\n", s.id.c_str(),
                        bad.empty() ? "PASS" : "FAIL", asserted, bad.size(), r.rows.size());
            for (auto& b : bad) failing.push_back(s.id + ":" + b);
        }
        if (!probe && !failing.empty()) {
            code = 1;
            std::fprintf(stderr, "failing assertions:\n");
            for (const auto& f : failing) std::fprintf(stderr, "  %s\n", f.c_str());
        }
    }

    files.put("config.canonical.json", canonical);
    json manifest{{"tool", "dyadlab"},
                  {"version", DYADLAB_VERSION},
                  {"command", a.command},
                  {"config", a.config},
                  {"config_fingerprint", fingerprint(bytes)},
                  {"canonical_fingerprint", fingerprint(canonical)},
                  {"seed", cfg.seed},
                  {"seeds", seeds},
                  {"strict", strict},
                  {"outputs", files.files()}};
    write_file(out_dir + "/MANIFEST", render(manifest));
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadlab: dyadic Muckenhoupt constants and inequality suites"};
    app.require_subcommand(1);
    Args a;
    std::uint64_t seed = 0;
    for (const char* name : {"constants", "verify", "probe"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " section of a config");
        sub->add_option("--config", a.config, "config file (YAML or JSON)")->required();
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--out", a.out, "output directory");
        sub->add_flag("--strict", a.strict, "reject LOWER_BOUND quantities in asserted positions");
        sub->add_option("--jobs", a.jobs, "worker threads")->check(CLI::NonNegativeNumber);
        sub->add_option("--suite", a.suites, "only these suite ids");
        sub->callback([&a, sub, &seed, name] {
            a.command = name;
            if (sub->count("--seed")) a.seed = seed;
        });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return run(a);
    } catch (const Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        if (e.kind() == ErrorKind::Config) return 2;
        if (e.kind() == ErrorKind::Certification) return 3;
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
