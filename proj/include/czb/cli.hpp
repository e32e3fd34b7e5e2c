#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "czb/evaluation.hpp"

namespace czb {

// W value of a sweep point; std::nullopt stands for the explorer baseline.
using OrderChoice = std::optional<int>;

struct SweepSpec {
    TopologyKind kind = TopologyKind::torus;
    int side = 100;
    std::vector<OrderChoice> orders{3};
    std::vector<std::size_t> byzantine_counts{0};
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::filesystem::path out = "sweep.csv";
    bool trace = false;
    double crosscheck_fraction = 0.01;
    PairMode pair_mode = PairMode::all;
    std::uint64_t backtrack_budget = 10'000;
    unsigned threads = 0;
};

// "3", "1,2,3", "explorer", "1,2,explorer".
std::vector<OrderChoice> parse_orders(std::string_view text);
// "0,5,10", "5..9", "0..100:10" (inclusive range with step), or mixes.
std::vector<std::size_t> parse_counts(std::string_view text);
TopologyKind parse_topology(std::string_view text);
PairMode parse_pair_mode(std::string_view text);

ExperimentConfig point_config(const SweepSpec& spec, OrderChoice order, std::size_t n_b);

// Checks every point's preconditions before any trial runs.
void validate(const SweepSpec& spec);

std::string csv_header();
std::string csv_row(const ExperimentConfig& cfg, const Estimate& est);

// Writes one CSV row per (W, n_B) point in spec order. The file is written to
// a temporary sibling and renamed; nothing is left behind on failure. Throws
// IoError when the output cannot be written. Progress lines go to `log`.
void run_sweep(const SweepSpec& spec, std::ostream& log);

// "i,j" per line; blank lines and '#' comments are skipped. Throws
// InvalidParameter with "placement:<line>: ..." on malformed input.
std::vector<Coord> parse_placement(std::istream& in, int side);
std::vector<Coord> read_placement(const std::filesystem::path& path, int side);

struct ScenarioSpec {
    TopologyKind kind = TopologyKind::torus;
    int side = 10;
    int order = 1;
    std::vector<Coord> byzantine;
    std::uint64_t seed = 1;
    std::optional<std::filesystem::path> trace_out;
    std::uint64_t backtrack_budget = 10'000;
    std::uint64_t simulation_budget = 50'000'000;
};

struct ScenarioReport {
    bool cover_found = false;
    std::string map;  // N lines of N cells
    std::size_t reliable = 0;
    std::size_t correct = 0;
    bool simulated = false;
    bool pairs_communicate = false;
    std::size_t false_acceptances = 0;
};

// Map legend: C = core of the chosen cover, B = Byzantine outside any chosen
// core, R = reliable, x = correct but not reliable.
ScenarioReport debug_scenario(const ScenarioSpec& spec, std::ostream& out);

}  // namespace czb
