#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "czb/analysis.hpp"
#include "czb/simulator.hpp"
#include "czb/topology.hpp"
#include "czb/zones.hpp"

namespace czb {

enum class PairMode { all, correct_only };
enum class Method { protocol, explorer };

struct ExperimentConfig {
    TopologyKind kind = TopologyKind::torus;
    int side = 100;
    Method method = Method::protocol;
    int order = 3;  // ignored by the explorer baseline
    std::size_t byzantine_count = 0;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    // Fraction of trials that also run the simulator against forging scripts.
    double crosscheck_fraction = 0.01;
    // Cross-checks are skipped when the message ceiling exceeds this.
    std::uint64_t crosscheck_message_budget = 50'000'000;
    bool record_traces = false;
    std::uint64_t backtrack_budget = 10'000;
    PairMode pair_mode = PairMode::all;
    // Builds the whole reliable set per trial; pair success never needs it.
    bool reliable_fraction = true;
    unsigned threads = 0;  // 0: hardware concurrency
};

// Throws InvalidParameter naming the violated precondition.
void validate(const ExperimentConfig& cfg);

// Topology and zone family shared read-only by every trial of an experiment.
struct ExperimentContext {
    Topology topo;
    ZoneSet zones;

    explicit ExperimentContext(const ExperimentConfig& cfg);
};

struct CrossCheck {
    bool skipped = false;             // ceiling above the configured budget
    bool pairs_communicate = false;   // every reliable pair accepted both ways
    // False messages attributed to a reliable node and accepted by one.
    std::size_t false_acceptances = 0;
    // False messages of any source accepted by a safe node.
    std::size_t safe_false_acceptances = 0;
    // True-message traffic <= complexity_bound, and all traffic when n_B = 0.
    bool within_ceiling = false;
    MessageCounts counts;
    MessageCounts true_counts;
    std::optional<Trace> trace;       // with record_traces
};

struct TrialResult {
    std::vector<NodeIndex> byzantine;
    NodeIndex first = 0;
    NodeIndex second = 0;
    bool cover_found = false;
    double reliable_fraction = 0.0;  // |reliable| / |correct|, 0 without a cover
    bool pair_success = false;
    std::size_t explorer_paths = 0;  // achieved path count (explorer only)
    std::optional<CrossCheck> crosscheck;
};

// Independent PRNG stream for one trial.
std::mt19937_64 trial_rng(std::uint64_t master_seed, std::uint64_t trial_index);

bool crosscheck_selected(double fraction, std::size_t trial_index);

TrialResult run_trial(const ExperimentContext& ctx, const ExperimentConfig& cfg, std::size_t trial_index);
TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial_index);

struct Estimate {
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::size_t covers_found = 0;
    double p_hat = 0.0;
    double ci95 = 0.0;
    double p_exists = 0.0;          // NaN for the explorer baseline
    double p_exists_ci95 = 0.0;
    double mean_reliable_fraction = 0.0;  // over trials with a cover; NaN if none
    double reliable_fraction_ci95 = 0.0;
    std::size_t crosschecked = 0;
    std::size_t crosscheck_skipped = 0;
    std::size_t crosscheck_failures = 0;
};

Estimate aggregate(const ExperimentConfig& cfg, const std::vector<TrialResult>& trials);

// Runs every trial (in parallel when configured) and aggregates in trial order.
std::vector<TrialResult> run_trials(const ExperimentContext& ctx, const ExperimentConfig& cfg);

Estimate estimate_P(const ExperimentContext& ctx, const ExperimentConfig& cfg);
Estimate estimate_P(const ExperimentConfig& cfg);

// Explorer baseline: fixed internally node-disjoint paths between two nodes.
struct ExplorerPaths {
    NodeIndex from = 0;
    NodeIndex to = 0;
    std::vector<std::vector<NodeIndex>> paths;  // each runs from..to inclusive

    std::size_t achieved() const { return paths.size(); }
    bool complete() const { return paths.size() == 4; }
};

// Four internally node-disjoint paths of minimum total length (fewer when the
// endpoints' degree or the graph does not allow four). Throws InvalidParameter
// when a == b.
ExplorerPaths explorer_paths(const Topology& topo, NodeIndex a, NodeIndex b);

// Throws std::logic_error if two paths share an interior node or a path is not
// a walk over topology edges.
void verify_disjoint(const Topology& topo, const ExplorerPaths& paths);

// At most one path has a Byzantine node in its interior.
bool explorer_success(const ExplorerPaths& paths, const NodeSet& byzantine);

// d * n * (n + N_Border * N_Ctr).
std::uint64_t complexity_bound(std::uint64_t n, std::uint64_t d, std::uint64_t n_ctr,
                               std::uint64_t n_border);
std::uint64_t complexity_bound(const Topology& topo, const ZoneSet& zones);

}  // namespace czb
