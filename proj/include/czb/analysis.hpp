#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "czb/topology.hpp"
#include "czb/zones.hpp"

namespace czb {

// A zone set Z whose cores hold every Byzantine node and whose cores-union and
// borders-union are disjoint. Nodes outside `cores` never accept a false
// message.
struct SafeCover {
    std::vector<ZoneId> zones;  // ascending
    NodeSet cores;
    NodeSet borders;
};

struct CoverSearchOptions {
    // Candidate placements tried per cluster of interacting Byzantine nodes
    // before the search gives up.
    std::uint64_t backtrack_budget = 10'000;
};

// Greedy depth-first search, smallest cores first, with bounded backtracking.
// std::nullopt means the search failed, not that no cover exists.
std::optional<SafeCover> find_safe_cover(const Topology& topo, const ZoneSet& zones,
                                         const NodeSet& byzantine,
                                         const CoverSearchOptions& options = {});

// Recomputes both unions from the zone list and checks disjointness and
// coverage of `byzantine`.
bool is_valid_cover(const ZoneSet& zones, const NodeSet& byzantine, const SafeCover& cover);

// All nodes outside the cover's cores. Throws InvalidParameter if the cover's
// cores and borders intersect.
NodeSet safe_set(const Topology& topo, const SafeCover& cover);

enum class OracleVerdict { found, none, inconclusive };

struct OracleResult {
    OracleVerdict verdict = OracleVerdict::inconclusive;
    std::optional<SafeCover> cover;
    std::uint64_t subsets_examined = 0;
};

// Exact decision by enumerating subsets (size <= number of Byzantine nodes)
// of the zones whose core meets a Byzantine node. Reports `inconclusive`
// rather than `none` once more than `limit` subsets have been examined.
OracleResult exhaustive_safe_cover(const Topology& topo, const ZoneSet& zones,
                                   const NodeSet& byzantine, std::uint64_t limit = 50'000'000);

// Correct nodes that eventually accept `source`'s true message in every fair
// execution, whatever the Byzantine nodes send. Throws InvalidParameter for a
// Byzantine source.
NodeSet accepting_nodes(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
                        NodeIndex source);

// Element v: the sources whose true message v eventually accepts (empty for
// Byzantine v).
std::vector<NodeSet> acceptance_matrix(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine);

// {a, b} is a communicating set: each eventually accepts the other's message.
bool pair_communicates(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine, NodeIndex a,
                       NodeIndex b);

// A communicating set containing `seed`: the nodes in mutual acceptance with
// it, minus a greedy choice of members until every remaining pair is mutual.
// Throws InvalidParameter for a Byzantine seed.
NodeSet build_communicating_set(const Topology& topo, const ZoneSet& zones,
                                const NodeSet& byzantine, NodeIndex seed);

NodeSet reliable_set(const NodeSet& safe, const NodeSet& communicating);

struct AnalysisResult {
    NodeSet safe;           // empty when no cover was found
    NodeSet communicating;
    NodeSet reliable;
    std::optional<SafeCover> cover;
};

AnalysisResult analyze(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
                       NodeIndex seed, const CoverSearchOptions& options = {});

}  // namespace czb
