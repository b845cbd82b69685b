#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>

#include "airsense/cli.hpp"

using namespace airsense;

namespace {

struct TempDir {
    store::fs::path path;
    TempDir() {
        static int counter = 0;
        path = store::fs::temp_directory_path() /
               ("airsense-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        store::fs::remove_all(path);
        store::fs::create_directories(path);
    }
    ~TempDir() { store::fs::remove_all(path); }
};

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "airsense");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override { ::unsetenv("AIRSENSE_DATA_ROOT"); }
    void TearDown() override { ::unsetenv("AIRSENSE_DATA_ROOT"); }
};

std::map<std::string, std::string> file_hashes(const store::fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : store::fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == ".lock") continue;
        out[store::fs::relative(e.path(), dir).string()] = store::sha256_hex(store::read_file(e.path()));
    }
    return out;
}

// Rows of the recommend table: (poi_id, aqi).
std::vector<std::pair<std::string, double>> table_rows(const std::string& text) {
    std::vector<std::pair<std::string, double>> rows;
    std::istringstream in(text);
    std::string line;
    const std::regex row(R"(^\d+\s+(\S+)\s+\S+\s+\S+\s+\S+\s+(\S+)\s+\S+\s+.*$)");
    while (std::getline(in, line)) {
        std::smatch m;
        if (std::regex_match(line, m, row)) rows.emplace_back(m[1], std::stod(m[2]));
    }
    return rows;
}

}  // namespace

TEST_F(Cli, HelpListsEveryFlagWithTypeAndDefault) {
    const std::map<std::string, std::vector<std::string>> expected{
        {"gen-data", {"--data-root", "--seed", "--history-days"}},
        {"ingest", {"--data-root", "--file", "--on-error"}},
        {"train", {"--data-root", "--seed", "--dimension", "--epochs", "--lr", "--reg", "--out"}},
        {"fl-bench",
         {"--data-root", "--seed", "--rounds", "--local-epochs", "--dimension", "--lr", "--clients", "--source",
          "--out"}},
        {"recommend",
         {"--data-root", "--seed", "--user", "--lat", "--lon", "--alpha", "--radius-m", "--limit", "--a-ref",
          "--dimension"}},
        {"forecast",
         {"--data-root", "--sensor", "--pollutant", "--k-daily", "--k-weekly", "--changepoints", "--horizon-hours",
          "--out"}},
        {"anomalies",
         {"--data-root", "--sensor", "--pollutant", "--k-daily", "--k-weekly", "--changepoints", "--k-sigma",
          "--out"}},
        {"serve", {"--data-root", "--config"}},
        {"report", {"--data-root", "--out"}},
    };
    // "--flag TYPE" then a default in brackets, REQUIRED, or the env fallback.
    const std::regex documented(R"(^\s+(--[a-z-]+) [A-Z]+\S*.*(\[.*\]|REQUIRED|\(Env:[A-Z_]+\)).*$)");
    for (const auto& [sub, flags] : expected) {
        const auto r = run({sub, "--help"});
        ASSERT_EQ(r.code, 0) << sub;
        std::set<std::string> seen;
        std::istringstream in(r.out);
        std::string line;
        while (std::getline(in, line)) {
            std::smatch m;
            if (std::regex_match(line, m, documented)) seen.insert(m[1]);
        }
        for (const auto& flag : flags) EXPECT_TRUE(seen.contains(flag)) << sub << " " << flag << "\n" << r.out;
        EXPECT_EQ(seen.size(), flags.size()) << sub;
    }
    const auto top = run({"--help"});
    EXPECT_EQ(top.code, 0);
    for (const auto& [sub, _] : expected) EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
}

TEST_F(Cli, UsageErrorsExitTwo) {
    TempDir dir;
    const auto root = dir.path.string();
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"launch"}).code, 2);
    EXPECT_EQ(run({"gen-data", "--data-root", root, "--bogus"}).code, 2);
    EXPECT_EQ(run({"gen-data", "--seed", "-3", "--data-root", root}).code, 2);
    const auto missing = run({"train"});
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("AIRSENSE_DATA_ROOT"), std::string::npos);
    EXPECT_EQ(run({"recommend", "--data-root", root, "--user", "U1", "--alpha", "1.5"}).code, 2);
    EXPECT_EQ(run({"recommend", "--data-root", root, "--user", "U1", "--radius-m", "0"}).code, 2);
    EXPECT_EQ(run({"recommend", "--data-root", root}).code, 2);  // --user is required
    EXPECT_EQ(run({"fl-bench", "--data-root", root, "--rounds", "-1"}).code, 2);
    EXPECT_EQ(run({"fl-bench", "--source", "elsewhere", "--out", root}).code, 2);
    EXPECT_EQ(run({"fl-bench", "--source", "planted"}).code, 2);  // needs --out
    EXPECT_EQ(run({"fl-bench", "--source", "planted", "--out", root, "--clients", "top0"}).code, 2);
    EXPECT_EQ(run({"anomalies", "--data-root", root, "--sensor", "A", "--k-sigma", "0"}).code, 2);
    // Runtime failures are not usage errors.
    const auto empty = run({"train", "--data-root", root});
    EXPECT_EQ(empty.code, 1);
    EXPECT_NE(empty.err.find("manifest"), std::string::npos);
}

TEST_F(Cli, GenDataIsDeterministic) {
    TempDir a, b, c;
    ASSERT_EQ(run({"gen-data", "--data-root", a.path.string(), "--seed", "7"}).code, 0);
    ASSERT_EQ(run({"gen-data", "--data-root", b.path.string(), "--seed", "7"}).code, 0);
    ASSERT_EQ(run({"gen-data", "--data-root", c.path.string(), "--seed", "8"}).code, 0);
    const auto ha = file_hashes(a.path);
    EXPECT_EQ(ha.size(), 5u);
    EXPECT_EQ(ha, file_hashes(b.path));
    EXPECT_NE(ha, file_hashes(c.path));
    const auto d = store::load_all(store::DataRoot(a.path));
    EXPECT_EQ(d.ratings.size(), 11606u);
    EXPECT_EQ(d.pois.size(), 2594u);
}

TEST_F(Cli, EnvironmentFallbackForDataRoot) {
    TempDir dir;
    ::setenv("AIRSENSE_DATA_ROOT", dir.path.c_str(), 1);
    const auto r = run({"gen-data", "--history-days", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(store::fs::exists(dir.path / store::kManifestFile));
    TempDir other;
    ASSERT_EQ(run({"gen-data", "--history-days", "0", "--data-root", other.path.string()}).code, 0);
    EXPECT_TRUE(store::fs::exists(other.path / store::kManifestFile));  // the flag wins
}

TEST_F(Cli, TrainStoresVersionedSnapshots) {
    TempDir a, b;
    for (const auto* d : {&a, &b}) {
        ASSERT_EQ(run({"gen-data", "--data-root", d->path.string(), "--history-days", "0"}).code, 0);
    }
    const auto out = a.path / "model.json";
    const auto r = run({"train", "--data-root", a.path.string(), "--seed", "3", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("mf-v1"), std::string::npos);
    const store::DataRoot root(a.path);
    EXPECT_EQ(store::read_file(out), store::read_file(root.snapshot_path("mf-v1")));
    ASSERT_EQ(run({"train", "--data-root", b.path.string(), "--seed", "3"}).code, 0);
    EXPECT_EQ(store::read_file(root.snapshot_path("mf-v1")),
              store::read_file(store::DataRoot(b.path).snapshot_path("mf-v1")));
    ASSERT_EQ(run({"train", "--data-root", a.path.string(), "--seed", "4", "--epochs", "5"}).code, 0);
    EXPECT_EQ(store::latest_version(root, "mf"), 2);
}

TEST_F(Cli, RecommendAlphaZeroIsAqiAscending) {
    TempDir dir;
    const auto root = dir.path.string();
    ASSERT_EQ(run({"gen-data", "--data-root", root, "--history-days", "0"}).code, 0);
    ASSERT_EQ(run({"train", "--data-root", root}).code, 0);
    const auto r = run({"recommend", "--data-root", root, "--user", "U0001", "--alpha", "0", "--limit", "40"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = table_rows(r.out);
    ASSERT_EQ(rows.size(), 40u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_TRUE(rows[i - 1].second < rows[i].second ||
                    (rows[i - 1].second == rows[i].second && rows[i - 1].first < rows[i].first))
            << r.out;
    }
    const auto none = run({"recommend", "--data-root", root, "--user", "U0001", "--radius-m", "0.001",
                           "--lat", "41.0", "--lon", "16.0"});
    EXPECT_EQ(none.code, 0);
    EXPECT_TRUE(table_rows(none.out).empty());
    EXPECT_NE(none.out.find("no POI"), std::string::npos);
    const auto cold = run({"recommend", "--data-root", root, "--user", "stranger"});
    EXPECT_EQ(cold.code, 0);
    EXPECT_NE(cold.out.find("cold start"), std::string::npos);
}

TEST_F(Cli, FlBenchWritesNineSummaryRowsAndReportMatches) {
    TempDir dir;
    const auto root = dir.path.string();
    ASSERT_EQ(run({"gen-data", "--data-root", root, "--history-days", "0"}).code, 0);
    const auto bench = run({"fl-bench", "--data-root", root, "--clients", "top3", "--seed", "7"});
    ASSERT_EQ(bench.code, 0) << bench.err;
    std::ifstream in(dir.path / "bench" / "summary.csv");
    const auto rows = fl::read_summary_csv(in);
    EXPECT_EQ(rows.size(), 9u);
    std::set<std::string> scenarios, users;
    for (const auto& r : rows) {
        scenarios.insert(r.scenario);
        users.insert(r.user_id);
    }
    EXPECT_EQ(scenarios.size(), 3u);
    EXPECT_EQ(users.size(), 3u);

    const auto report = run({"report", "--data-root", root});
    ASSERT_EQ(report.code, 0);
    EXPECT_EQ(bench.out.substr(0, report.out.size()), report.out);
    EXPECT_NE(report.out.find("five-number"), std::string::npos);

    const auto hashes = file_hashes(dir.path / "bench");
    ASSERT_EQ(run({"fl-bench", "--data-root", root, "--clients", "top3", "--seed", "7"}).code, 0);
    EXPECT_EQ(file_hashes(dir.path / "bench"), hashes);

    TempDir planted;
    const auto p = run({"fl-bench", "--source", "planted", "--out", planted.path.string(), "--clients", "U00,U01",
                        "--rounds", "2"});
    ASSERT_EQ(p.code, 0) << p.err;
    std::ifstream pin(planted.path / "summary.csv");
    EXPECT_EQ(fl::read_summary_csv(pin).size(), 6u);
    EXPECT_EQ(run({"report", "--out", (dir.path / "nothing").string()}).code, 1);
}

TEST_F(Cli, IngestReportsRejectedLines) {
    TempDir dir;
    const auto root = dir.path.string();
    ASSERT_EQ(run({"gen-data", "--data-root", root, "--history-days", "0"}).code, 0);
    const auto before = store::load_all(store::DataRoot(dir.path)).readings.size();
    std::ostringstream csv_text;
    auto good = sensor::reading_for_aqi("AQ-V1", 1706659200, 30.0);
    auto stranger = sensor::reading_for_aqi("nowhere", 1706659200, 30.0);
    sensor::write_readings(csv_text, {good, stranger});
    auto text = csv_text.str() + "AQ-V1,1706659260,1,2,3,4,5,6,7,8,20,50,1000\nAQ-V1,bad\n";
    const auto file = dir.path / "new.csv";
    std::ofstream(file) << text;

    const auto abort = run({"ingest", "--data-root", root, "--file", file.string(), "--on-error", "abort"});
    EXPECT_EQ(abort.code, 1);
    EXPECT_EQ(store::load_all(store::DataRoot(dir.path)).readings.size(), before);

    const auto r = run({"ingest", "--data-root", root, "--file", file.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("ingested 2 readings, rejected 2"), std::string::npos) << r.out;
    EXPECT_NE(r.err.find("nowhere"), std::string::npos);
    EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
    EXPECT_EQ(store::load_all(store::DataRoot(dir.path)).readings.size(), before + 2);
    EXPECT_EQ(run({"ingest", "--data-root", root, "--file", (dir.path / "absent.csv").string()}).code, 1);
}

TEST_F(Cli, ForecastAndAnomalies) {
    TempDir dir;
    const auto root = dir.path.string();
    ASSERT_EQ(run({"gen-data", "--data-root", root, "--history-days", "1"}).code, 0);
    const auto out = dir.path / "fc.csv";
    const auto f = run({"forecast", "--data-root", root, "--sensor", "AQ-V3", "--horizon-hours", "5", "--out",
                        out.string()});
    ASSERT_EQ(f.code, 0) << f.err;
    std::ifstream in(out);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 6);

    const auto a = run({"anomalies", "--data-root", root, "--sensor", "AQ-V3", "--pollutant", "NO"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("10 anomalies"), std::string::npos) << a.out;
    EXPECT_EQ(run({"anomalies", "--data-root", root, "--sensor", "nope"}).code, 1);
    EXPECT_EQ(run({"forecast", "--data-root", root, "--sensor", "AQ-V3", "--pollutant", "H2O"}).code, 2);
}
