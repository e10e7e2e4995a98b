#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lineage/app.hpp"
#include "mock_hub.hpp"

namespace fs = std::filesystem;
using lineage::app::run;

namespace {

fs::path fixture(const char* name) {
    return fs::path{LINEAGE_FIXTURE_DIR} / name;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("lineage_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), {"lineage", "--quiet"});
    return run(args);
}

std::string slurp(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    return std::string{std::istreambuf_iterator<char>{in}, {}};
}

}  // namespace

TEST(Cli, ExitCodes) {
    const auto out = scratch("codes");
    EXPECT_EQ(cli({"--help"}), 0);
    EXPECT_EQ(cli({}), 1);
    EXPECT_EQ(cli({"frobnicate"}), 1);
    EXPECT_EQ(cli({"build", "--snapshot", "/nonexistent/file", "--out", out.string()}), 1);
    EXPECT_EQ(cli({"mdi", "--out", out.string()}), 1);
    EXPECT_EQ(cli({"mdi", "--snapshot", fixture("worked_example.jsonl").string(), "--windows", "0", "--out", out.string()}), 1);
    EXPECT_EQ(cli({"build", "--snapshot", fixture("lenient.jsonl").string(), "--out", out.string()}), 2);
    EXPECT_EQ(cli({"analyze", "--snapshot", fixture("worked_example.jsonl").string(), "--period-boundaries",
                   "2024-05-01,2024-01-01", "--out", out.string()}),
              1);
}

TEST(Cli, DumpPathIsNamedWhenMissing) {
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(cli({"ingest", "--source", "dump", "--out", scratch("dump").string()}), 1);
    EXPECT_NE(::testing::internal::GetCapturedStderr().find("--dump-path"), std::string::npos);
}

TEST(Cli, PipelineOutputs) {
    const auto dir = scratch("pipeline");
    ASSERT_EQ(cli({"ingest", "--source", "dump", "--dump-path", fixture("lenient.jsonl").string(), "--strictness",
                   "lenient", "--out", (dir / "ingest").string()}),
              0);
    const auto stats = nlohmann::json::parse(slurp(dir / "ingest" / "ingest_stats.json"));
    EXPECT_EQ(stats["records"], 2);
    EXPECT_EQ(stats["skipped"], 5);

    ASSERT_EQ(cli({"build", "--snapshot", fixture("worked_example.jsonl").string(), "--out", (dir / "graph").string()}), 0);
    for (const char* f : {"edges.tsv", "nodes.tsv", "cleaning_report.json", "census.json", "run_config.json"}) {
        EXPECT_TRUE(fs::exists(dir / "graph" / f)) << f;
    }
    ASSERT_EQ(cli({"mdi", "--graph", (dir / "graph").string(), "--windows", "30,90", "--out", (dir / "mdi").string()}),
              0);
    const auto csv = slurp(dir / "mdi" / "mdi.csv");
    EXPECT_NE(csv.find("lab/focal,90,3,1,2,0.166667,true,"), std::string::npos);

    ASSERT_EQ(cli({"report", "--graph", (dir / "graph").string(), "--out", (dir / "report").string()}), 0);
    const auto bundle = nlohmann::json::parse(slurp(dir / "report" / "bundle.json"));
    for (const char* key : {"config", "census", "structure", "mdi", "trend", "groups", "temporal"}) {
        EXPECT_TRUE(bundle.contains(key)) << key;
    }
    const auto config = nlohmann::json::parse(slurp(dir / "report" / "run_config.json"));
    EXPECT_EQ(config["subcommand"], "analyze");
    EXPECT_FALSE(config.contains("workers"));
}

TEST(Cli, AnalyzeIsByteStableAcrossRunsAndWorkers) {
    const auto dir = scratch("determinism");
    ASSERT_EQ(cli({"synth", "--nodes", "1500", "--seed", "5", "--out", (dir / "s").string()}), 0);
    const auto snap = (dir / "s" / "snapshot.jsonl").string();
    ASSERT_EQ(cli({"--workers", "1", "analyze", "--snapshot", snap, "--out", (dir / "a").string()}), 0);
    ASSERT_EQ(cli({"--workers", "3", "analyze", "--snapshot", snap, "--out", (dir / "b").string()}), 0);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator{dir / "a"}) {
        const auto name = entry.path().filename();
        if (name == "run_config.json" || name == "bundle.json") {
            continue;  // both echo the --out path
        }
        EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / name)) << name;
        ++compared;
    }
    EXPECT_GE(compared, 10u);
}

TEST(Cli, IngestMiniDump) {
    const auto dir = scratch("mini");
    ASSERT_EQ(cli({"ingest", "--source", "dump", "--dump-path", fixture("mini.jsonl").string(), "--out", dir.string()}),
              0);
    std::ifstream in{dir / "snapshot.jsonl"};
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) {
        ++lines;
    }
    EXPECT_EQ(lines, 10u);
    ASSERT_EQ(cli({"build", "--snapshot", (dir / "snapshot.jsonl").string(), "--out", (dir / "g").string()}), 0);
    const auto report = nlohmann::json::parse(slurp(dir / "g" / "cleaning_report.json"));
    EXPECT_EQ(report["stub_nodes"], 0);
    EXPECT_EQ(report["reconciles"], true);
}

TEST(Cli, IngestFromMockHub) {
    std::vector<nlohmann::json> records;
    for (int i = 0; i < 7; ++i) {
        records.push_back({{"id", "hub/m" + std::to_string(i)}, {"createdAt", "2024-06-01T00:00:00.000Z"}});
    }
    lineage::testing::MockHub hub{records};
    const auto dir = scratch("api");
    ASSERT_EQ(cli({"ingest", "--source", "api", "--endpoint", hub.endpoint(), "--page-size", "3", "--rate-limit", "0",
                   "--out", dir.string()}),
              0);
    const auto stats = nlohmann::json::parse(slurp(dir / "ingest_stats.json"));
    EXPECT_EQ(stats["records"], 7);
    EXPECT_EQ(stats["pages_fetched"], 3);
    EXPECT_EQ(stats["source"], "live_api");
}

TEST(Cli, BuildEmptySnapshotAndRebuild) {
    const auto dir = scratch("empty");
    fs::create_directories(dir);
    std::ofstream{dir / "empty.jsonl"};
    ASSERT_EQ(cli({"build", "--snapshot", (dir / "empty.jsonl").string(), "--out", (dir / "g").string()}), 0);
    EXPECT_EQ(fs::file_size(dir / "g" / "edges.tsv"), 0u);

    ASSERT_EQ(cli({"build", "--snapshot", fixture("five_models.jsonl").string(), "--out", (dir / "a").string()}), 0);
    const auto first = slurp(dir / "a" / "edges.tsv") + slurp(dir / "a" / "nodes.tsv") +
                       slurp(dir / "a" / "cleaning_report.json") + slurp(dir / "a" / "census.json");
    ASSERT_EQ(cli({"build", "--snapshot", fixture("five_models.jsonl").string(), "--out", (dir / "a").string()}), 0);
    EXPECT_EQ(first, slurp(dir / "a" / "edges.tsv") + slurp(dir / "a" / "nodes.tsv") +
                         slurp(dir / "a" / "cleaning_report.json") + slurp(dir / "a" / "census.json"));
    EXPECT_EQ(slurp(dir / "a" / "edges.tsv"), slurp(fixture("five_models_edges.tsv")));
}

TEST(Cli, SynthIsSeeded) {
    const auto dir = scratch("synth");
    ASSERT_EQ(cli({"synth", "--nodes", "1000", "--seed", "7", "--out", (dir / "a").string()}), 0);
    ASSERT_EQ(cli({"synth", "--nodes", "1000", "--seed", "7", "--out", (dir / "b").string()}), 0);
    EXPECT_EQ(slurp(dir / "a" / "snapshot.jsonl"), slurp(dir / "b" / "snapshot.jsonl"));
    ASSERT_EQ(cli({"synth", "--nodes", "0", "--out", (dir / "z").string()}), 0);
    EXPECT_EQ(fs::file_size(dir / "z" / "snapshot.jsonl"), 0u);
}

TEST(Cli, AnalyzeWorkedExample) {
    const auto dir = scratch("worked");
    ASSERT_EQ(cli({"analyze", "--snapshot", fixture("worked_example.jsonl").string(), "--windows", "90", "--out", dir.string()}),
              0);
    std::ifstream in{dir / "mdi.csv"};
    bool found = false;
    for (std::string line; std::getline(in, line);) {
        if (line.starts_with("lab/focal,90,")) {
            const auto mdi = std::stod(line.substr(line.find(",3,1,2,") + 7));
            EXPECT_NEAR(mdi, 0.167, 5e-4);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(Cli, WindowTableIsMonotone) {
    const auto dir = scratch("windows");
    ASSERT_EQ(cli({"synth", "--nodes", "2000", "--seed", "11", "--out", (dir / "s").string()}), 0);
    ASSERT_EQ(cli({"analyze", "--snapshot", (dir / "s" / "snapshot.jsonl").string(), "--windows",
                   "30,60,90,120,150,180", "--out", (dir / "a").string()}),
              0);
    const auto bundle = nlohmann::json::parse(slurp(dir / "a" / "bundle.json"));
    const auto& windows = bundle["temporal"]["windows"];
    ASSERT_EQ(windows.size(), 6u);
    for (std::size_t i = 1; i < windows.size(); ++i) {
        for (const char* key : {"x_total", "y_total", "z_total"}) {
            EXPECT_GE(windows[i][key].get<long>(), windows[i - 1][key].get<long>()) << key;
        }
    }
    const auto& overall = bundle["structure"]["power_law"]["overall"];
    EXPECT_GT(overall["alpha"].get<double>(), 1.0);
    EXPECT_LE(overall["ks_D"].get<double>(), 1.0);
}
