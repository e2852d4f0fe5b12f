#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "kpm/constructions.hpp"
#include "kpm/io.hpp"

using kpm::io::json;

namespace {

namespace fs = std::filesystem;

// Every invocation funnels through here so stdout/stderr land in files we can
// parse back.  std::system gives the raw wait status on this platform.
struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "kpm_cli_tests";
    fs::create_directories(dir);
    return dir;
}

CliRun run_cli(const std::string& args, const std::string& tag) {
    fs::path dir = work_dir();
    fs::path out = dir / (tag + ".out");
    fs::path err = dir / (tag + ".err");
    std::string cmd = std::string(KPM_CLI_PATH) + " " + args + " > \"" + out.string() + "\" 2> \"" +
                      err.string() + "\"";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    CliRun res;
    res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = kpm::io::read_text(out.string());
    res.err = kpm::io::read_text(err.string());
    return res;
}

json parse_line(const CliRun& run) { return kpm::io::parse_json(run.out, "cli stdout"); }

}  // namespace

TEST_CASE("version flag names the format version", "[cli]") {
    auto run = run_cli("--version", "version");
    REQUIRE(run.exit_code == 0);
    REQUIRE(run.out.find("kpm 0.1.0") != std::string::npos);
    REQUIRE(run.out.find("format version 1") != std::string::npos);
}

TEST_CASE("gen writes an instance that round-trips with a stable id", "[cli]") {
    fs::path inst = work_dir() / "complete_3_2.json";
    auto run = run_cli("gen --construction complete --k 3 --n 2 --out \"" + inst.string() + "\"", "gen_c32");
    REQUIRE(run.exit_code == 0);
    json j = parse_line(run);
    REQUIRE(j.at("instance_id").get<std::string>() == "6f3d9b091c86d222");
    REQUIRE(j.at("edges").get<int>() == 8);

    auto h = kpm::io::load_instance(inst.string());
    REQUIRE(kpm::io::instance_id(h) == "6f3d9b091c86d222");
    REQUIRE(h.edge_count() == 8);

    json meta = kpm::io::parse_json(kpm::io::read_text(inst.string() + ".meta.json"), "meta");
    REQUIRE(meta.at("construction").get<std::string>() == "complete");
    REQUIRE(meta.at("A_sets").is_array());
}

TEST_CASE("gen rejects an unknown construction", "[cli]") {
    fs::path inst = work_dir() / "never_written.json";
    auto run = run_cli("gen --construction nonsense --k 3 --n 2 --out \"" + inst.string() + "\"", "gen_bad");
    REQUIRE(run.exit_code == 1);
    REQUIRE(run.err.find("error") != std::string::npos);
}

TEST_CASE("solve oracle pins the barrier matching number and its bound check", "[cli]") {
    fs::path inst = work_dir() / "div_3_4.json";
    REQUIRE(run_cli("gen --construction divisibility --k 3 --n 4 --out \"" + inst.string() + "\"",
                    "gen_d34")
                .exit_code == 0);

    auto solve = run_cli("solve --instance \"" + inst.string() + "\" --algorithm oracle", "solve_d34");
    REQUIRE(solve.exit_code == 0);
    json j = parse_line(solve);
    REQUIRE(j.at("size").get<int>() == 3);
    REQUIRE(j.at("exact").get<bool>());

    auto check = run_cli("solve --instance \"" + inst.string() +
                             "\" --algorithm oracle --check fact_1_5",
                         "check_d34");
    REQUIRE(check.exit_code == 0);
    json c = parse_line(check);
    REQUIRE(c.at("check").get<std::string>() == "fact_1_5");
    REQUIRE(c.at("status").get<std::string>() == "pass");
    REQUIRE(c.at("nu").get<int>() == 3);
}

TEST_CASE("solve fact15 and thm17 deliver their targets on a complete instance", "[cli]") {
    fs::path inst = work_dir() / "complete_3_4.json";
    REQUIRE(run_cli("gen --construction complete --k 3 --n 4 --out \"" + inst.string() + "\"",
                    "gen_c34")
                .exit_code == 0);

    auto fact = run_cli("solve --instance \"" + inst.string() +
                            "\" --algorithm fact15 --profile 1,1,0",
                        "fact_c34");
    REQUIRE(fact.exit_code == 0);
    json f = parse_line(fact);
    REQUIRE(f.at("target").get<int>() == 2);
    REQUIRE(f.at("size").get<int>() == 2);

    auto drv = run_cli("solve --instance \"" + inst.string() + "\" --algorithm thm17", "thm17_c34");
    REQUIRE(drv.exit_code == 0);
    json d = parse_line(drv);
    REQUIRE(d.at("status").get<std::string>() == "success");
    REQUIRE(d.at("size").get<int>() == 4);
    REQUIRE(d.at("branch").is_string());
}

TEST_CASE("rainbow subcommand covers oracle, refusal, and best effort", "[cli]") {
    fs::path inst = work_dir() / "complete_3_2_rb.json";
    REQUIRE(run_cli("gen --construction complete --k 3 --n 2 --out \"" + inst.string() + "\"",
                    "gen_rb")
                .exit_code == 0);

    auto oracle = run_cli("rainbow --instance \"" + inst.string() +
                              "\" --colours 2 --algorithm oracle",
                          "rb_oracle");
    REQUIRE(oracle.exit_code == 0);
    json o = parse_line(oracle);
    REQUIRE(o.at("size").get<int>() == 2);
    REQUIRE(o.at("exact").get<bool>());

    // Guaranteed mode wants n >= m+Q+k-1 = 3; with n = 2 that is a refusal.
    auto refused = run_cli("rainbow --instance \"" + inst.string() +
                               "\" --colours 3 --algorithm lemma21 --m 0 --profile 1,0,0 --mode guaranteed",
                           "rb_refused");
    REQUIRE(refused.exit_code == 2);
    REQUIRE(refused.err.find("hypothesis unmet") != std::string::npos);

    auto best = run_cli("rainbow --instance \"" + inst.string() +
                            "\" --colours 3 --algorithm lemma21 --m 0 --profile 1,0,0",
                        "rb_best");
    REQUIRE(best.exit_code == 0);
    json b = parse_line(best);
    REQUIRE(b.at("target").get<int>() == 1);
    REQUIRE(b.at("reached_target").get<bool>());
}

TEST_CASE("sweep output is byte-identical across reruns and worker counts", "[cli]") {
    fs::path dir = work_dir();
    fs::path spec = dir / "sweep_spec.json";
    json s;
    s["instances"] = json::array({json{{"exhaustive", json{{"k", 3}, {"n", 2}}}},
                                  json{{"construction", "random"},
                                       {"k", 3},
                                       {"n", 3},
                                       {"profile", json::array({1, 1, 0})},
                                       {"density", "1/2"},
                                       {"seed_base", 0},
                                       {"seed_count", 5}}});
    kpm::io::write_text(spec.string(), s.dump(2) + "\n");

    auto run_one = [&](const std::string& prefix, int workers) {
        auto run = run_cli("sweep --spec \"" + spec.string() + "\" --workers " +
                               std::to_string(workers) + " --out \"" + (dir / prefix).string() + "\"",
                           "sweep_" + prefix);
        REQUIRE(run.exit_code == 0);
        json j = parse_line(run);
        REQUIRE(j.at("rows").get<int>() == 256 + 5);
        REQUIRE_FALSE(j.at("hard_fail").get<bool>());
    };
    run_one("w1a", 1);
    run_one("w1b", 1);
    run_one("w3", 3);

    auto text = [&](const std::string& name) { return kpm::io::read_text((dir / name).string()); };
    REQUIRE(text("w1a.jsonl") == text("w1b.jsonl"));
    REQUIRE(text("w1a.jsonl") == text("w3.jsonl"));
    REQUIRE(text("w1a.csv") == text("w3.csv"));

    std::string csv = text("w1a.csv");
    REQUIRE(csv.rfind("instance_id,n,k,Q,nu,bound,status", 0) == 0);
}
