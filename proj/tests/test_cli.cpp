#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "czb/cli.hpp"
#include "czb/errors.hpp"

using namespace czb;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "czb_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::size_t count_char(const std::string& s, char c) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), c));
}

}  // namespace

TEST(ParseOrders, ListsAndExplorer) {
    auto o = parse_orders("1,2,explorer");
    ASSERT_EQ(o.size(), 3u);
    EXPECT_EQ(o[0], 1);
    EXPECT_EQ(o[1], 2);
    EXPECT_FALSE(o[2]);
    EXPECT_THROW(parse_orders("two"), InvalidParameter);
    EXPECT_THROW(parse_orders(""), InvalidParameter);
}

TEST(ParseCounts, ListsAndRanges) {
    EXPECT_EQ(parse_counts("0,5,10"), (std::vector<std::size_t>{0, 5, 10}));
    EXPECT_EQ(parse_counts("5..9"), (std::vector<std::size_t>{5, 6, 7, 8, 9}));
    EXPECT_EQ(parse_counts("0..100:25"), (std::vector<std::size_t>{0, 25, 50, 75, 100}));
    EXPECT_EQ(parse_counts("1, 3..4"), (std::vector<std::size_t>{1, 3, 4}));
    EXPECT_THROW(parse_counts("9..5"), InvalidParameter);
    EXPECT_THROW(parse_counts("0..10:0"), InvalidParameter);
    EXPECT_THROW(parse_counts("x"), InvalidParameter);
    EXPECT_THROW(parse_counts("-1"), InvalidParameter);
}

TEST(ParseEnums, TopologyAndPairMode) {
    EXPECT_EQ(parse_topology("torus"), TopologyKind::torus);
    EXPECT_EQ(parse_topology("grid"), TopologyKind::grid);
    EXPECT_THROW(parse_topology("ring"), InvalidParameter);
    EXPECT_EQ(parse_pair_mode("all"), PairMode::all);
    EXPECT_EQ(parse_pair_mode("correct-only"), PairMode::correct_only);
    EXPECT_THROW(parse_pair_mode("some"), InvalidParameter);
}

TEST(SweepValidation, NamesViolatedPrecondition) {
    SweepSpec spec;
    spec.side = 4;
    spec.orders = {3};
    try {
        validate(spec);
        FAIL();
    } catch (const InvalidParameter& e) {
        EXPECT_NE(std::string(e.what()).find("zones:"), std::string::npos);
    }
    spec.orders = {1};
    spec.byzantine_counts = {16};
    try {
        validate(spec);
        FAIL();
    } catch (const InvalidParameter& e) {
        EXPECT_NE(std::string(e.what()).find("n_B"), std::string::npos);
    }
}

TEST(RunSweep, ZeroByzantineRowsAreCertain) {
    SweepSpec spec;
    spec.side = 30;
    spec.orders = {1, 2, 3};
    spec.byzantine_counts = {0};
    spec.trials = 20;
    spec.threads = 1;
    spec.crosscheck_fraction = 0.0;
    spec.out = scratch("zero.csv");
    std::ostringstream log;
    run_sweep(spec, log);
    std::istringstream csv(slurp(spec.out));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, csv_header());
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        EXPECT_EQ(line, "torus,30," + std::to_string(rows) + ",0,20,1.000000,1.000000,1.000000,0.000000,1");
    }
    EXPECT_EQ(rows, 3);
    EXPECT_FALSE(std::filesystem::exists(spec.out.string() + ".partial"));
}

TEST(RunSweep, ByteReproducible) {
    SweepSpec spec;
    spec.kind = TopologyKind::grid;
    spec.side = 12;
    spec.orders = {1, 2, std::nullopt};
    spec.byzantine_counts = {3, 6};
    spec.trials = 40;
    spec.seed = 9;
    spec.threads = 2;
    spec.crosscheck_fraction = 0.05;
    std::ostringstream log;
    spec.out = scratch("a.csv");
    run_sweep(spec, log);
    spec.out = scratch("b.csv");
    spec.threads = 1;
    run_sweep(spec, log);
    const std::string a = slurp(scratch("a.csv"));
    EXPECT_EQ(a, slurp(scratch("b.csv")));
    EXPECT_NE(a.find("grid,12,explorer,3,40,,,"), std::string::npos);
    EXPECT_EQ(count_char(a, '\n'), 7u);
}

TEST(RunSweep, TraceExportWritesJsonLines) {
    SweepSpec spec;
    spec.side = 6;
    spec.orders = {1};
    spec.byzantine_counts = {1};
    spec.trials = 2;
    spec.threads = 1;
    spec.crosscheck_fraction = 1.0;
    spec.trace = true;
    spec.out = scratch("traced.csv");
    std::ostringstream log;
    run_sweep(spec, log);
    const std::string traces = slurp(spec.out.string() + ".trace.jsonl");
    EXPECT_NE(traces.find("\"trial\":0"), std::string::npos);
    EXPECT_NE(traces.find("\"kind\":\"auth\""), std::string::npos);
    EXPECT_NE(traces.find("\"accept\""), std::string::npos);
}

TEST(RunSweep, UnwritableOutputIsIoError) {
    SweepSpec spec;
    spec.side = 5;
    spec.orders = {1};
    spec.trials = 1;
    spec.threads = 1;
    spec.out = "/nonexistent-dir/x/out.csv";
    std::ostringstream log;
    EXPECT_THROW(run_sweep(spec, log), IoError);
}

TEST(RunSweep, InvalidSpecWritesNothing) {
    SweepSpec spec;
    spec.side = 5;
    spec.orders = {1, 4};
    spec.trials = 1;
    spec.out = scratch("never.csv");
    std::filesystem::remove(spec.out);
    std::ostringstream log;
    EXPECT_THROW(run_sweep(spec, log), InvalidParameter);
    EXPECT_FALSE(std::filesystem::exists(spec.out));
    EXPECT_TRUE(log.str().empty());
}

TEST(Placement, ParsesCommentsAndBlanks) {
    std::istringstream in("# block\n3,3\n\n 3,4 # trailing\n4,3\n");
    auto p = parse_placement(in, 10);
    EXPECT_EQ(p, (std::vector<Coord>{{3, 3}, {3, 4}, {4, 3}}));
}

TEST(Placement, LineNumberedDiagnostics) {
    const auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_placement(in, 10);
        } catch (const InvalidParameter& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_EQ(message("1,1\n2;2\n").rfind("placement:2:", 0), 0u);
    EXPECT_EQ(message("1,1\n\n# c\n11,1\n").rfind("placement:4:", 0), 0u);
    EXPECT_EQ(message("a,b\n").rfind("placement:1:", 0), 0u);
    EXPECT_THROW(read_placement("/nonexistent/placement.txt", 10), IoError);
}

TEST(DebugScenario, EmptyPlacementAllReliable) {
    ScenarioSpec spec;
    spec.side = 6;
    spec.order = 1;
    std::ostringstream out;
    ScenarioReport r = debug_scenario(spec, out);
    EXPECT_TRUE(r.cover_found);
    EXPECT_EQ(count_char(r.map, 'R'), 36u);
    EXPECT_EQ(r.reliable, 36u);
    EXPECT_TRUE(r.simulated);
    EXPECT_TRUE(r.pairs_communicate);
}

TEST(DebugScenario, SingleCenterNodeOneCoreCell) {
    ScenarioSpec spec;
    spec.side = 10;
    spec.order = 1;
    spec.byzantine = {{5, 5}};
    spec.trace_out = scratch("single.trace.jsonl");
    std::ostringstream out;
    ScenarioReport r = debug_scenario(spec, out);
    EXPECT_EQ(count_char(r.map, 'C'), 1u);
    EXPECT_EQ(count_char(r.map, 'R'), 99u);
    EXPECT_EQ(r.map.substr(4 * 11, 11), "RRRRCRRRRR\n");
    EXPECT_TRUE(r.pairs_communicate);
    EXPECT_EQ(r.false_acceptances, 0u);
    EXPECT_TRUE(std::filesystem::exists(*spec.trace_out));
}

TEST(DebugScenario, BlockWithoutCoverReported) {
    ScenarioSpec spec;
    spec.side = 10;
    spec.order = 2;
    for (int i = 4; i <= 6; ++i) {
        for (int j = 4; j <= 6; ++j) spec.byzantine.push_back({i, j});
    }
    std::ostringstream out;
    ScenarioReport r = debug_scenario(spec, out);
    EXPECT_FALSE(r.cover_found);
    EXPECT_NE(out.str().find("no safe cover"), std::string::npos);
    EXPECT_EQ(count_char(r.map, 'B'), 9u);
    EXPECT_EQ(count_char(r.map, 'R'), 0u);
}
