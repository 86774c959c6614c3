#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "json.hpp"

#include "supersim/rng.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("supersim_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const fs::path& scratch) {
    fs::path out_file = scratch / "stdout.txt";
    fs::path err_file = scratch / "stderr.txt";
    std::string cmd = "\"" SUPERSIM_BIN "\" " + args + " >\"" + out_file.string() +
                      "\" 2>\"" + err_file.string() + "\"";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_file);
    r.err = read_file(err_file);
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

void write_config(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string quoted(const fs::path& path) { return "\"" + path.string() + "\""; }

} // namespace

TEST_CASE("kernel table run writes a full report") {
    fs::path dir = fresh_dir("kernel");
    fs::path out = dir / "run";
    CliResult r = run_cli("kernel-table --alpha 1.8 --t 0.5 --seed 7 --out " + quoted(out), dir);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "all checks passed"));

    std::string summary = read_file(out / "summary.txt");
    CHECK(contains(summary, "experiment: kernel-table"));
    CHECK(contains(summary, "[PASS] closed-form vs quadrature"));
    CHECK(contains(summary, "[PASS] semigroup property"));

    std::string table = read_file(out / "kernel_table.csv");
    CHECK(table.rfind("x,p1_value\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 402);

    Json manifest = Json::parse(read_file(out / "manifest.json"));
    for (const char* key : {"experiment", "version", "config", "master_seed", "generator",
                            "seed_scheme", "replicate_seeds"})
        CHECK(manifest.contains(key));
    CHECK(manifest["experiment"] == "kernel-table");
    CHECK(manifest["generator"] == "mt19937_64");
    CHECK(manifest["master_seed"] == 7);
    CHECK(manifest["config"]["alpha"] == 1.8);
    CHECK(manifest["config"]["t"] == 0.5);
}

TEST_CASE("reruns with one config are byte-identical") {
    fs::path dir = fresh_dir("rerun");
    fs::path out = dir / "run";
    std::string args = "kernel-table --alpha 1.8 --t 0.5 --seed 7 --out " + quoted(out);

    CliResult first = run_cli(args, dir);
    REQUIRE(first.exit_code == 0);
    std::string table = read_file(out / "kernel_table.csv");
    std::string manifest = read_file(out / "manifest.json");
    std::string summary = read_file(out / "summary.txt");
    REQUIRE(!table.empty());

    CliResult second = run_cli(args, dir);
    REQUIRE(second.exit_code == 0);
    CHECK(read_file(out / "kernel_table.csv") == table);
    CHECK(read_file(out / "manifest.json") == manifest);
    CHECK(read_file(out / "summary.txt") == summary);
}

TEST_CASE("worker count changes neither statistics nor paths") {
    fs::path dir = fresh_dir("workers");
    std::string common =
        "stable-check --beta 0.5 --t 0.5 --truncation 0.01 --mesh 0.01 "
        "--replicates 200 --seed 11";
    fs::path one = dir / "w1", four = dir / "w4";
    CliResult r1 = run_cli(common + " --workers 1 --out " + quoted(one), dir);
    CliResult r4 = run_cli(common + " --workers 4 --out " + quoted(four), dir);
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r4.exit_code == 0);
    CHECK(read_file(one / "statistics.json") == read_file(four / "statistics.json"));
    CHECK(read_file(one / "paths.csv") == read_file(four / "paths.csv"));

    Json records = Json::parse(read_file(one / "statistics.json"));
    REQUIRE(records.is_array());
    CHECK(records.size() == 18);
    for (const auto& rec : records) {
        CHECK(rec.contains("statistic"));
        CHECK(rec.contains("estimate"));
        CHECK(rec.contains("std_err"));
        CHECK(rec.contains("target"));
    }
    CHECK(read_file(one / "paths.csv").rfind("path,time,value\n", 0) == 0);

    Json manifest = Json::parse(read_file(one / "manifest.json"));
    REQUIRE(manifest["replicate_seeds"].size() == 200);
    std::uint64_t expected =
        supersim::derive_seed(11, supersim::StreamModule::stable_process, 0);
    CHECK(manifest["replicate_seeds"][0] == expected);
}

TEST_CASE("flags override config file values which override defaults") {
    fs::path dir = fresh_dir("config");
    fs::path cfg = dir / "run.cfg";
    write_config(cfg,
                 "# comment line\n"
                 "\n"
                 "alpha = 1.5\n"
                 "t=0.25\n"
                 "seed =99\n");
    fs::path out = dir / "run";
    CliResult r = run_cli(
        "kernel-table --config " + quoted(cfg) + " --alpha 1.8 --out " + quoted(out), dir);
    REQUIRE(r.exit_code == 0);

    Json config = Json::parse(read_file(out / "manifest.json"))["config"];
    CHECK(config["alpha"] == 1.8);
    CHECK(config["t"] == 0.25);
    CHECK(config["seed"] == 99);
    CHECK(config["beta"] == 0.5);
    CHECK(config["n_particles"] == 10000);
}

TEST_CASE("malformed config files are rejected") {
    fs::path dir = fresh_dir("badconfig");
    fs::path out = dir / "run";
    fs::path cfg = dir / "run.cfg";
    auto attempt = [&](const std::string& text) {
        write_config(cfg, text);
        return run_cli("kernel-table --config " + quoted(cfg) + " --out " + quoted(out), dir);
    };

    CliResult unknown = attempt("alpha=1.5\nbogus=3\n");
    CHECK(unknown.exit_code == 2);
    CHECK(contains(unknown.err, "unknown config key \"bogus\""));

    CliResult no_equals = attempt("# header\nalpha 1.5\n");
    CHECK(no_equals.exit_code == 2);
    CHECK(contains(no_equals.err, ":2: expected key=value"));

    CliResult duplicate = attempt("alpha=1.5\nalpha=1.8\n");
    CHECK(duplicate.exit_code == 2);
    CHECK(contains(duplicate.err, "duplicate key \"alpha\""));

    CliResult junk = attempt("alpha=1.5x\n");
    CHECK(junk.exit_code == 2);
    CHECK(contains(junk.err, "cannot parse \"1.5x\""));

    CliResult missing = run_cli(
        "kernel-table --config " + quoted(dir / "absent.cfg") + " --out " + quoted(out), dir);
    CHECK(missing.exit_code == 2);
    CHECK(contains(missing.err, "cannot open config file"));
}

TEST_CASE("invalid parameters exit with the usage code") {
    fs::path dir = fresh_dir("invalid");
    fs::path out = dir / "run";
    auto attempt = [&](const std::string& args) {
        return run_cli(args + " --out " + quoted(out), dir);
    };

    CliResult beta = attempt("kernel-table --beta 1.5");
    CHECK(beta.exit_code == 2);
    CHECK(contains(beta.err, "error: "));
    CHECK(contains(beta.err, "beta must lie in (0,1)"));

    CliResult continuity = attempt("jump-tail --alpha 1.4 --beta 0.5");
    CHECK(continuity.exit_code == 2);
    CHECK(contains(continuity.err, "requires alpha > 1 + beta"));

    CliResult optimality = attempt("exponents --alpha 1.9 --beta 0.4");
    CHECK(optimality.exit_code == 2);
    CHECK(contains(optimality.err, "requires beta > (alpha - 1) / 2"));

    CliResult replicates = attempt("exponents --alpha 1.8 --beta 0.5 --replicates 10");
    CHECK(replicates.exit_code == 2);
    CHECK(contains(replicates.err, "replicates must be at least 30"));

    CliResult particles = attempt("jump-tail --n-particles 500");
    CHECK(particles.exit_code == 2);
    CHECK(contains(particles.err, "n_particles must be at least 1000"));

    CliResult mesh = attempt("kernel-table --mesh 2");
    CHECK(mesh.exit_code == 2);
    CHECK(contains(mesh.err, "mesh must lie in (0, t]"));
}

TEST_CASE("usage errors and help") {
    fs::path dir = fresh_dir("usage");

    CliResult bare = run_cli("", dir);
    CHECK(bare.exit_code == 2);

    CliResult unknown_flag = run_cli("kernel-table --bogus 1", dir);
    CHECK(unknown_flag.exit_code == 2);

    CliResult help = run_cli("--help", dir);
    CHECK(help.exit_code == 0);
    for (const char* name : {"kernel-table", "stable-check", "laplace-duality", "compensator",
                             "jump-tail", "dichotomy", "exponents"})
        CHECK(contains(help.out, name));
}
