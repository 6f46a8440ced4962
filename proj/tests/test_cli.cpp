#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = GRAPHDIFF_CLI_PATH;
const std::string kConfigDir = GRAPHDIFF_CONFIG_DIR;

std::string cfg(const char* name) {
    return kConfigDir + "/" + std::string(name) + ".json";
}

// Fresh scratch directory per test case; paths stay under the system temp dir.
fs::path scratch(const char* name) {
    const fs::path root = fs::temp_directory_path() / "graphdiff_cli_tests" / name;
    fs::remove_all(root);
    fs::create_directories(root);
    return root;
}

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open ", p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

}  // namespace

TEST_CASE("simulate writes path, clocks and a complete manifest") {
    const fs::path dir = scratch("simulate");
    const int rc = run_cli("simulate --graph " + cfg("star3") +
                           " --horizon 0.25 --dt 0.001 --seed 7 --out " +
                           (dir / "run").string());
    CHECK(rc == 0);

    const std::string path_csv = slurp(dir / "run" / "path.csv");
    CHECK(first_line(path_csv) == "t,edge_id,coord");
    // star3's root is vertex 0 at coordinate 0 of its lowest-id edge.
    CHECK(path_csv.substr(path_csv.find('\n') + 1, 6) == "0,0,0\n");
    CHECK(std::count(path_csv.begin(), path_csv.end(), '\n') == 252);  // header + 251 rows

    const std::string clocks_csv = slurp(dir / "run" / "clocks.csv");
    CHECK(first_line(clocks_csv) == "t,T_1,T_2,T_3");

    const nlohmann::json m = read_json(dir / "run" / "manifest.json");
    CHECK(m["command"] == "simulate");
    CHECK(m["graph"] == cfg("star3"));
    CHECK(m["out"] == (dir / "run").string());
    // Every resolved flag value survives into the manifest.
    for (const char* key : {"horizon", "dt", "quantum", "kernel_eps", "delta",
                            "paths", "seed", "threads", "root"})
        CHECK_MESSAGE(m["params"].contains(key), "missing params key ", key);
    CHECK(m["params"]["seed"] == 7);
    CHECK(m["params"]["root"] == 0);
}

TEST_CASE("simulate reruns are byte-identical and seed-sensitive") {
    const fs::path dir = scratch("rerun");
    const std::string flags =
        "simulate --graph " + cfg("htree") + " --horizon 0.2 --dt 0.001 --seed 3 --out ";
    REQUIRE(run_cli(flags + (dir / "a").string()) == 0);
    REQUIRE(run_cli(flags + (dir / "b").string()) == 0);
    for (const char* f : {"path.csv", "clocks.csv"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    // Manifests differ only in the out directory.
    nlohmann::json ma = read_json(dir / "a" / "manifest.json");
    nlohmann::json mb = read_json(dir / "b" / "manifest.json");
    ma.erase("out"), mb.erase("out");
    ma["params"].erase("root"), mb["params"].erase("root");  // root is equal anyway
    CHECK(ma == mb);

    REQUIRE(run_cli("simulate --graph " + cfg("htree") +
                    " --horizon 0.2 --dt 0.001 --seed 4 --out " + (dir / "c").string()) == 0);
    CHECK(slurp(dir / "a" / "path.csv") != slurp(dir / "c" / "path.csv"));
}

TEST_CASE("simulate numbers the files of extra replicas") {
    const fs::path dir = scratch("replicas");
    REQUIRE(run_cli("simulate --graph " + cfg("star2_equal") +
                    " --horizon 0.1 --dt 0.001 --paths 3 --out " + dir.string()) == 0);
    for (const char* f : {"path.csv", "path_1.csv", "path_2.csv", "clocks.csv",
                          "clocks_1.csv", "clocks_2.csv", "manifest.json"})
        CHECK_MESSAGE(fs::exists(dir / f), "missing ", f);
    CHECK(slurp(dir / "path.csv") != slurp(dir / "path_1.csv"));
}

TEST_CASE("exit-prob matches the vertex weights and reports them") {
    const fs::path dir = scratch("exitprob");
    const int rc = run_cli("exit-prob --graph " + cfg("star2_skew") +
                           " --paths 400 --dt 1e-4 --delta 0.05 --horizon 1.0 --out " +
                           dir.string());
    CHECK(rc == 0);
    const nlohmann::json rep = read_json(dir / "report.json");
    CHECK(rep["experiment"] == "exit_direction");
    CHECK(rep["pass"] == true);
    CHECK(rep["statistics"]["edge_ids"] == nlohmann::json({0, 1}));
    CHECK(rep["statistics"]["weights"] == nlohmann::json({0.7, 0.3}));
    const double f0 = rep["statistics"]["frequencies"][0].get<double>();
    const double f1 = rep["statistics"]["frequencies"][1].get<double>();
    CHECK(f0 + f1 == doctest::Approx(1.0));
    CHECK(std::abs(f0 - 0.7) < 0.08);
    CHECK(read_json(dir / "manifest.json")["command"] == "exit-prob");
}

TEST_CASE("exit-prob fails loudly when the horizon starves the experiment") {
    const fs::path dir = scratch("starved");
    const int rc = run_cli("exit-prob --graph " + cfg("star2_skew") +
                           " --paths 200 --dt 1e-4 --delta 0.05 --horizon 0.002 --out " +
                           dir.string());
    CHECK(rc == 1);
    const nlohmann::json rep = read_json(dir / "report.json");
    CHECK(rep["pass"] == false);
    CHECK(rep["statistics"]["unfinished"].get<int>() > 2);  // > 1% of 200
}

TEST_CASE("verify runs every applicable check and skips the rest") {
    const fs::path dir = scratch("verify");
    {
        // Single edge: no junction, so only the invariant suite applies.
        const int rc = run_cli("verify --graph " + cfg("single_edge") +
                               " --paths 30 --dt 0.001 --horizon 0.5 --out " +
                               (dir / "single").string());
        CHECK(rc == 0);
        const nlohmann::json rep = read_json(dir / "single" / "report.json");
        CHECK(rep["pass"] == true);
        const auto& checks = rep["statistics"]["checks"];
        REQUIRE(checks.size() == 3);
        CHECK(checks[0]["experiment"] == "invariant_suite");
        CHECK(checks[0]["pass"] == true);
        CHECK(checks[1].contains("skipped"));
        CHECK(checks[2].contains("skipped"));
    }
    {
        // Two-edge junction: generator probe and skew-BM oracle both apply.
        const int rc = run_cli("verify --graph " + cfg("star2_equal") +
                               " --paths 40 --dt 1e-4 --horizon 0.5 --out " +
                               (dir / "star").string());
        CHECK(rc == 0);
        const nlohmann::json rep = read_json(dir / "star" / "report.json");
        CHECK(rep["pass"] == true);
        const auto& checks = rep["statistics"]["checks"];
        REQUIRE(checks.size() == 3);
        for (const auto& c : checks) CHECK(c["pass"] == true);
        CHECK(checks[1]["experiment"] == "generator_check");
        CHECK(checks[2]["experiment"] == "marginal_law");
        CHECK(checks[2]["statistics"]["ks"].get<double>() <
              checks[2]["ci"]["ks_threshold"].get<double>());
    }
}

TEST_CASE("verify reports are independent of the thread count") {
    const fs::path dir = scratch("threads");
    const std::string flags = "verify --graph " + cfg("star2_equal") +
                              " --paths 24 --dt 1e-4 --horizon 0.3 ";
    REQUIRE(run_cli(flags + "--threads 1 --out " + (dir / "t1").string()) == 0);
    REQUIRE(run_cli(flags + "--threads 2 --out " + (dir / "t2").string()) == 0);
    nlohmann::json r1 = read_json(dir / "t1" / "report.json");
    nlohmann::json r2 = read_json(dir / "t2" / "report.json");
    // Identical statistics; params differ exactly in the recorded thread count.
    CHECK(r1["params"]["threads"] == 1);
    CHECK(r2["params"]["threads"] == 2);
    r1["params"].erase("threads"), r2["params"].erase("threads");
    CHECK(r1 == r2);
}

TEST_CASE("bad invocations exit with the config-error code") {
    const fs::path dir = scratch("bad");
    const std::string out = " --out " + dir.string();
    CHECK(run_cli("") == 2);                                              // no subcommand
    CHECK(run_cli("simulate" + out) == 2);                                // missing --graph
    CHECK(run_cli("simulate --graph " + cfg("star3") + " --bogus 1" + out) == 2);
    CHECK(run_cli("simulate --graph /nonexistent.json" + out) == 2);
    CHECK(run_cli("simulate --graph " + cfg("invalid_weights") + out) == 2);
    CHECK(run_cli("verify --graph " + cfg("invalid_cycle") + out) == 2);
    CHECK(run_cli("exit-prob --graph " + cfg("star3") + " --delta 99" + out) == 2);
}
