#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "wavecluster/core_data.hpp"
#include "wavecluster/manifest.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "wavecluster_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the CLI inside the work directory and returns its exit code.
int run(const std::string& args) {
    const std::string cmd = "cd '" + workdir().string() + "' && '" WC_CLI_PATH "' " + args + " > last.log 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json manifest(const std::string& dir) { return nlohmann::json::parse(slurp(workdir() / dir / "manifest.json")); }

// 365 days of half-hourly samples with daily and weekly cycles.
void write_series() {
    std::ofstream out(workdir() / "series.csv");
    out << "load\n";
    for (int i = 0; i < 17520; ++i) {
        const double t = static_cast<double>(i);
        out << wavecluster::format_double(std::sin(2 * std::numbers::pi * t / 48) +
                                          0.3 * std::sin(2 * std::numbers::pi * t / 336) +
                                          0.05 * static_cast<double>((i * 7919) % 13 - 6))
            << '\n';
    }
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run("--help") == 0);
    CHECK(run("features --bogus") == 1);
    CHECK(run("features --input missing.csv --output x") == 2);
    CHECK(run("simulate --voices 0 --output x") == 1);
    CHECK(run("nosuchcommand") == 1);
    {
        std::ofstream bad(workdir() / "bad.csv");
        bad << "1,2,x\n3,4,5\n";
    }
    CHECK(run("features --input bad.csv --output x") == 2);
}

TEST_CASE("simulate and benchmark describe the same data") {
    REQUIRE(run("simulate --seed 9 --output sim") == 0);
    REQUIRE(run("benchmark --seed 9 --replicates 1 --output bench") == 0);
    const auto s = manifest("sim");
    const auto b = manifest("bench");
    CHECK(s["data_digest"] == b["data_digest"]);
    CHECK(s["data_digest"] == wavecluster::sha256_file(workdir() / "sim" / "curves.csv"));
    const auto labels = slurp(workdir() / "sim" / "labels.csv");
    CHECK(std::count(labels.begin(), labels.end(), '\n') == 76);
    const auto summary = nlohmann::json::parse(slurp(workdir() / "bench" / "summary.json"));
    CHECK(summary.contains("replicates"));
}

TEST_CASE("slice, features and spectrum clustering of a year of load curves") {
    write_series();
    REQUIRE(run("slice --input series.csv --output sliced") == 0);
    std::ifstream curves(workdir() / "sliced" / "curves.csv");
    const auto d = wavecluster::read_dataset_csv(curves);
    CHECK(d.size() == 365);
    CHECK(d.length() == 48);

    REQUIRE(run("features --input sliced/curves.csv --levels 6 --output feat") == 0);
    std::ifstream fin(workdir() / "feat" / "features.csv");
    std::string header;
    std::getline(fin, header);
    CHECK(std::count(header.begin(), header.end(), ',') == 5);
    int rows = 0;
    for (std::string line; std::getline(fin, line);) rows += !line.empty();
    CHECK(rows == 365);

    REQUIRE(run("cluster --pipeline spectrum --measure wer --k 8 --levels 6 --threads 4 "
                "--input sliced/curves.csv --output wer") == 0);
    std::ifstream pin(workdir() / "wer" / "partition.csv");
    const auto labels = wavecluster::read_labels_csv(pin);
    CHECK(labels.size() == 365);
    CHECK(std::set<int>(labels.begin(), labels.end()).size() == 8);
}

TEST_CASE("manifest declares every output with its digest") {
    REQUIRE(run("simulate --seed 2 --output m_sim") == 0);
    REQUIRE(run("cluster --input m_sim/curves.csv --labels m_sim/labels.csv --k 3 --output m_cluster") == 0);
    const auto m = manifest("m_cluster");
    CHECK(m["command"] == "cluster");
    std::set<std::string> declared;
    for (const auto& o : m["outputs"]) {
        const auto name = o["path"].get<std::string>();
        declared.insert(name);
        CHECK(o["sha256"] == wavecluster::sha256_file(workdir() / "m_cluster" / name));
    }
    for (const auto& entry : fs::directory_iterator(workdir() / "m_cluster")) {
        const auto name = entry.path().filename().string();
        if (name != "manifest.json") CHECK(declared.count(name) == 1);
    }
    CHECK(declared.count("partition.csv") == 1);
    CHECK(declared.count("validation.json") == 1);
    CHECK(m["inputs"].size() == 2);
    CHECK_FALSE(m["config"].contains("threads"));
}

TEST_CASE("flags override the configuration file") {
    {
        std::ofstream cfg(workdir() / "cfg.json");
        cfg << R"({"k": 2, "seed": 5, "restarts": 3})";
    }
    REQUIRE(run("simulate --seed 4 --output c_sim") == 0);
    REQUIRE(run("cluster --config cfg.json --k 4 --input c_sim/curves.csv --output c_out") == 0);
    const auto m = manifest("c_out");
    CHECK(m["config"]["k"] == 4);
    CHECK(m["config"]["seed"] == 5);
    CHECK(m["config"]["restarts"] == 3);
    {
        std::ofstream cfg(workdir() / "bad_cfg.json");
        cfg << R"({"kk": 2})";
    }
    CHECK(run("cluster --config bad_cfg.json --input c_sim/curves.csv --output c_bad") == 1);
}
