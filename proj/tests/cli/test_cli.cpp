#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kdelab/cli.hpp"

using namespace kdelab::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("kdelab-cli-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "kdelab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_text) *err_text = err.str();
    return code;
}

}  // namespace

TEST_CASE("stable json is byte identical and round trips") {
    const json report{{"b", 0.1}, {"a", {1, 2.5, nullptr}}, {"z", "text"}, {"n", 3}, {"one", 1.0}};
    const auto a = to_stable_json(report);
    const auto b = to_stable_json(json::parse(a));
    CHECK(a == b);
    CHECK(json::parse(a) == report);
    CHECK(a.find("0.10000000000000001") != std::string::npos);
    CHECK(a.find("\"one\": 1.0") != std::string::npos);
    CHECK(a.find("\"a\"") < a.find("\"b\""));
    CHECK(to_stable_json(json(std::nan(""))) == "null\n");
}

TEST_CASE("csv cells and tables") {
    CHECK(csv_cell(json(0.25)) == "0.25");
    CHECK(csv_cell(json(7)) == "7");
    CHECK(csv_cell(json(nullptr)).empty());
    CHECK(csv_cell(json("a,b")) == "\"a,b\"");
    CsvTable t{"x", {"a", "b"}, {{1, 2.0}}};
    CHECK(t.render() == "a,b\n1,2\n");
    t.rows.push_back({1});
    CHECK_THROWS_AS((void)t.render(), std::logic_error);
}

TEST_CASE("overrides set dotted paths and fall back to strings") {
    json doc = json::object();
    apply_override(doc, "bandwidth.gamma=0.3");
    apply_override(doc, "kernel=gaussian");
    apply_override(doc, "n_grid=[32,64]");
    CHECK(doc["bandwidth"]["gamma"] == 0.3);
    CHECK(doc["kernel"] == "gaussian");
    CHECK(doc["n_grid"] == json({32, 64}));
    CHECK_THROWS_AS(apply_override(doc, "novalue"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(doc, "a..b=1"), std::invalid_argument);
}

TEST_CASE("subcommand sections patch the shared keys") {
    const json doc{{"replicates", 100},
                   {"bandwidth", {{"c2", 1.0}, {"gamma", 0.2}}},
                   {"clt-run", {{"replicates", 7}, {"bandwidth", {{"gamma", 0.3}}}}},
                   {"blocks", {{"gap", 3}}}};
    const auto eff = effective_config(doc, "clt-run");
    CHECK(eff["replicates"] == 7);
    CHECK(eff["bandwidth"]["c2"] == 1.0);
    CHECK(eff["bandwidth"]["gamma"] == 0.3);
    CHECK_FALSE(eff.contains("blocks"));
    CHECK_FALSE(eff.contains("clt-run"));
}

TEST_CASE("check-conditions reports the delta interval") {
    const auto dir = scratch("cc");
    CHECK(run({"check-conditions", "--set", R"(model={"family":"power-decay","d":2,"q":4})", "--set",
               "bandwidth.gamma=1.0", "--set", "condition_c_grid=[16,32,64,128]", "--out", dir.string()}) == 0);
    const auto rep = json::parse(slurp(dir / "check-conditions.json"));
    CHECK(rep["corollary1"]["delta_interval"]["lo_exact"] == "1/3");
    CHECK(rep["corollary1"]["delta_interval"]["hi_exact"] == "1/2");
    CHECK(rep["schema_version"] == kReportSchema);
}

TEST_CASE("a failing verdict exits with 2") {
    const auto dir = scratch("cc-fail");
    CHECK(run({"check-conditions", "--set", R"(model={"family":"power-decay","d":1,"q":1.3})", "--set",
               "bandwidth.gamma=0.3", "--out", dir.string()}) == 2);
    const auto man = json::parse(slurp(dir / "check-conditions.manifest.json"));
    CHECK(man["status"] == "verdict-fail");
    CHECK(man["verdicts"]["corollary1"] == "fail");
}

TEST_CASE("clt-run with one replicate is inconclusive and exits 0") {
    const auto dir = scratch("clt1");
    CHECK(run({"clt-run", "--set", "replicates=1", "--set", "n_grid=[128]", "--set", "m=1", "--format", "both",
               "--out", dir.string()}) == 0);
    const auto rep = json::parse(slurp(dir / "clt-run.json"));
    CHECK(rep["verdict"] == "inconclusive");
    const auto csv = slurp(dir / "clt-run.summary.csv");
    const auto& schema = csv_schemas().at("clt-run.summary");
    std::string header;
    for (std::size_t i = 0; i < schema.size(); ++i) header += (i ? "," : "") + schema[i];
    CHECK(csv.substr(0, csv.find('\n')) == header);
}

TEST_CASE("memory cap violation exits 1 with a size estimate") {
    const auto dir = scratch("cap");
    std::string err;
    CHECK(run({"gen-field", "--set", "n=2048", "--set", "m=2", "--set", R"(model={"family":"geometric","d":2,"r":0.5})",
               "--set", "truncation.policy=fixed", "--set", "truncation.radius=32", "--set", "memory_cap_mb=8",
               "--out", dir.string()},
              &err) == 1);
    CHECK(err.find("MiB") != std::string::npos);
    const auto man = json::parse(slurp(dir / "gen-field.manifest.json"));
    CHECK(man["status"] == "error");
    CHECK(man["error"].get<std::string>().find("MiB") != std::string::npos);
}

TEST_CASE("invalid config and unknown subcommand exit 1") {
    const auto dir = scratch("bad");
    std::string err;
    CHECK(run({"clt-run", "--set", "bandwidth.gamma=oops", "--out", dir.string()}, &err) == 1);
    CHECK(err.find("bandwidth") != std::string::npos);
    CHECK(run({"clt-run", "--set", "colour=blue", "--out", dir.string()}, &err) == 1);
    CHECK(err.find("colour") != std::string::npos);
    CHECK(run({"frobnicate"}, &err) == 1);
    CHECK(err.find("frobnicate") != std::string::npos);
}

TEST_CASE("thread count does not change report bytes") {
    std::vector<std::string> reports;
    for (const char* t : {"1", "4"}) {
        const auto dir = scratch(std::string("threads") + t);
        CHECK(run({"clt-run", "--set", "replicates=24", "--set", "n_grid=[64,128]", "--set", "m=2", "--set",
                   R"(model={"family":"geometric","d":1,"r":0.5})", "--seed", "99", "--threads", t, "--out",
                   dir.string()}) == 0);
        reports.push_back(slurp(dir / "clt-run.json"));
    }
    CHECK(reports[0] == reports[1]);
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    ::setenv("KDELAB_OUT_DIR", dir.string().c_str(), 1);
    CHECK(run({"check-conditions", "--set", R"(model={"family":"geometric","d":1,"r":0.5})", "--set",
               "bandwidth.gamma=0.3"}) == 0);
    ::unsetenv("KDELAB_OUT_DIR");
    CHECK(fs::exists(dir / "check-conditions.json"));
    CHECK(fs::exists(dir / "check-conditions.manifest.json"));
}

TEST_CASE("config file sections and overrides") {
    const auto dir = scratch("cfgfile");
    const json doc{{"model", {{"family", "geometric"}, {"d", 1}, {"r", 0.5}}},
                   {"replicates", 1000},
                   {"kde", {{"n", 256}, {"m", 3}, {"x", {0.0, 0.5}}}}};
    write_file(dir / "cfg.json", doc.dump());
    CHECK(run({"kde", "--config", (dir / "cfg.json").string(), "--set", "kde.n=128", "--format", "csv", "--out",
               dir.string()}) == 0);
    const auto man = json::parse(slurp(dir / "kde.manifest.json"));
    CHECK(man["config"]["n"] == 128);
    const auto csv = slurp(dir / "kde.estimates.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK_FALSE(fs::exists(dir / "kde.json"));
}

TEST_CASE("gen-field writes readable binary fields") {
    const auto dir = scratch("gen");
    CHECK(run({"gen-field", "--set", "n=32", "--set", "m=2", "--set", R"(model={"family":"geometric","d":1,"r":0.5})",
               "--format", "both", "--out", dir.string()}) == 0);
    CHECK(fs::exists(dir / "gen-field.full.kdlf"));
    CHECK(fs::exists(dir / "gen-field.truncated.csv"));
    const auto rep = json::parse(slurp(dir / "gen-field.json"));
    CHECK(rep["coupling_max_error"].get<double>() == 0.0);
}
