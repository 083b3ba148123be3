#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "betamq/io.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(BETAMQ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("betamq_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("cli: simulate writes trace + manifest, byte-identical on replay") {
    const auto dir_a = fresh_dir("sim_a");
    const auto dir_b = fresh_dir("sim_b");
    const std::string base =
        "simulate --n 8 --beta 1 --T 2000 --seed 7 --out ";
    REQUIRE(run_cli(base + dir_a.string()) == 0);
    REQUIRE(run_cli(base + dir_b.string()) == 0);
    CHECK(fs::exists(dir_a / "trace.csv"));
    CHECK(fs::exists(dir_a / "run.json"));
    CHECK(fs::exists(dir_a / "manifest.json"));

    const auto trace_a = slurp(dir_a / "trace.csv");
    CHECK(trace_a == slurp(dir_b / "trace.csv"));

    // Emitted artifacts parse back.
    const auto records = betamq::io::parse_trace_csv(trace_a);
    CHECK(records.size() == 2000);
    const auto run = nlohmann::json::parse(slurp(dir_a / "run.json"));
    CHECK(run["valid"] == true);
    CHECK(run["config"]["n"] == 8);
    const auto manifest = nlohmann::json::parse(slurp(dir_a / "manifest.json"));
    CHECK(manifest["subcommand"] == "simulate");
    CHECK(manifest["seed"] == 7);
}

TEST_CASE("cli: unknown flags exit 2 without artifacts") {
    const auto dir = fresh_dir("bad");
    CHECK(run_cli("simulate --definitely-not-a-flag 3 --out " + dir.string()) ==
          2);
    CHECK(run_cli("no-such-subcommand") == 2);
    CHECK_FALSE(fs::exists(dir / "trace.csv"));
}

TEST_CASE("cli: equivalence emits a passing report") {
    const auto dir = fresh_dir("equiv");
    REQUIRE(run_cli("equivalence --n 2 --reps 120 --labels 400 --seed 3 --out " +
                    dir.string()) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "equivalence.json"));
    CHECK(report["aggregate_pass"] == true);
    CHECK(report["marginal_probes"].size() > 0);

    // The adversarial control must fail (exit 1) and say so in the report.
    const auto dir2 = fresh_dir("equiv_adv");
    CHECK(run_cli("equivalence --n 2 --reps 120 --labels 400 --adversarial "
                  "--seed 3 --out " +
                  dir2.string()) == 1);
    const auto failing = nlohmann::json::parse(slurp(dir2 / "equivalence.json"));
    CHECK(failing["aggregate_pass"] == false);
}

TEST_CASE("cli: potential trajectory artifact parses") {
    const auto dir = fresh_dir("pot");
    REQUIRE(run_cli("potential --n 8 --beta 1 --T 5000 --sample-every 100 "
                    "--seed 5 --out " +
                    dir.string()) == 0);
    const auto rows =
        betamq::io::parse_trajectory_csv(slurp(dir / "trajectory.csv"));
    CHECK(rows.size() >= 50);
    CHECK(rows.front().t == 0);
}

TEST_CASE("cli: stripes artifact parses") {
    const auto dir = fresh_dir("stripes");
    REQUIRE(run_cli("stripes --n 8 --beta 1 --T 4000 --seed 5 --out " +
                    dir.string()) == 0);
    const auto rows = betamq::io::parse_stripe_csv(slurp(dir / "stripes.csv"));
    CHECK(rows.size() == 4);
}

TEST_CASE("cli: scaling and diverge artifacts parse") {
    const auto dir = fresh_dir("scaling");
    REQUIRE(run_cli("scaling --n-list 8 16 --beta 1 --t-factor 20 --seeds 2 "
                    "--seed 5 --out " +
                    dir.string()) == 0);
    const auto table =
        betamq::io::parse_experiment_csv(slurp(dir / "experiment.csv"));
    CHECK(table.rows.size() == 8);

    const auto dir2 = fresh_dir("diverge");
    REQUIRE(run_cli("diverge --n 8 --t 200 --reps 5 --seed 5 --out " +
                    dir2.string()) == 0);
    const auto dtable =
        betamq::io::parse_experiment_csv(slurp(dir2 / "experiment.csv"));
    CHECK(dtable.rows.size() == 6);
}

TEST_CASE("cli: bench report is valid json") {
    const auto dir = fresh_dir("bench");
    REQUIRE(run_cli("bench --n 8 --threads 2 --duration 0.05 --prefill 2000 "
                    "--trials 1 --seed 5 --out " +
                    dir.string()) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "bench.json"));
    CHECK(report["valid"] == true);
    CHECK(report["threads"] == 2);
}

TEST_CASE("cli: sssp on a random graph reports an exact match") {
    const auto dir = fresh_dir("sssp");
    REQUIRE(run_cli("sssp --random-v 300 --random-e 1500 --threads 2 --beta "
                    "0.5 --seed 5 --out " +
                    dir.string()) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "sssp.json"));
    CHECK(report["exact_match"] == true);
    CHECK(report["relaxed"]["pops"].get<std::uint64_t>() > 0);
}
