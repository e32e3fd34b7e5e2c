#include "czb/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "czb/errors.hpp"

namespace czb {

namespace {

// Per-node multiplicities of the running cores/borders unions, so zones can be
// added and removed during backtracking.
class CoverState {
public:
    explicit CoverState(std::size_t n) : core_count_(n, 0), border_count_(n, 0) {}

    bool compatible(const ControlZone& z) const {
        for (NodeIndex p : z.core) {
            if (border_count_[p]) return false;
        }
        for (NodeIndex p : z.border) {
            if (core_count_[p]) return false;
        }
        return true;
    }

    void add(const ControlZone& z) {
        for (NodeIndex p : z.core) ++core_count_[p];
        for (NodeIndex p : z.border) ++border_count_[p];
        chosen_.push_back(z.id);
    }

    void remove(const ControlZone& z) {
        for (NodeIndex p : z.core) --core_count_[p];
        for (NodeIndex p : z.border) --border_count_[p];
        chosen_.pop_back();
    }

    bool covered(NodeIndex p) const { return core_count_[p] != 0; }
    const std::vector<ZoneId>& chosen() const { return chosen_; }

private:
    std::vector<std::uint16_t> core_count_;
    std::vector<std::uint16_t> border_count_;
    std::vector<ZoneId> chosen_;
};

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

// Depth-first cover search for one cluster of Byzantine nodes.
class ClusterSearch {
public:
    ClusterSearch(const ZoneSet& zones, CoverState& state, std::vector<NodeIndex> byz,
                  const std::vector<std::vector<ZoneId>>& candidates, std::uint64_t budget)
        : zones_(zones), state_(state), byz_(std::move(byz)), candidates_(candidates), budget_(budget) {}

    bool run() { return descend(); }

private:
    bool descend() {
        // Most constrained uncovered node first; its candidates are already
        // ordered smallest core first.
        std::size_t best = byz_.size();
        std::size_t best_options = 0;
        for (std::size_t k = 0; k < byz_.size(); ++k) {
            if (state_.covered(byz_[k])) continue;
            std::size_t options = 0;
            for (ZoneId z : candidates_[k]) options += state_.compatible(zones_.zone(z)) ? 1 : 0;
            if (options == 0) return false;
            if (best == byz_.size() || options < best_options) {
                best = k;
                best_options = options;
            }
        }
        if (best == byz_.size()) return true;

        for (ZoneId id : candidates_[best]) {
            const ControlZone& z = zones_.zone(id);
            if (!state_.compatible(z)) continue;
            if (budget_ == 0) return false;
            --budget_;
            state_.add(z);
            if (descend()) return true;
            state_.remove(z);
        }
        return false;
    }

    const ZoneSet& zones_;
    CoverState& state_;
    std::vector<NodeIndex> byz_;
    const std::vector<std::vector<ZoneId>>& candidates_;
    std::uint64_t budget_;
};

SafeCover make_cover(const Topology& topo, const ZoneSet& zones, std::vector<ZoneId> chosen) {
    SafeCover cover;
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    cover.zones = std::move(chosen);
    cover.cores = NodeSet(topo.node_count());
    cover.borders = NodeSet(topo.node_count());
    for (ZoneId id : cover.zones) {
        const ControlZone& z = zones.zone(id);
        for (NodeIndex p : z.core) cover.cores.insert(p);
        for (NodeIndex p : z.border) cover.borders.insert(p);
    }
    return cover;
}

}  // namespace

std::optional<SafeCover> find_safe_cover(const Topology& topo, const ZoneSet& zones,
                                         const NodeSet& byzantine, const CoverSearchOptions& options) {
    const std::vector<NodeIndex> byz = byzantine.members();
    if (byz.empty()) return make_cover(topo, zones, {});

    // Candidates: zones holding the node in their core and no Byzantine node
    // on their border.
    std::vector<std::vector<ZoneId>> candidates(byz.size());
    for (std::size_t k = 0; k < byz.size(); ++k) {
        for (ZoneId id : zones.by_core(byz[k])) {
            const ControlZone& z = zones.zone(id);
            const bool clean = std::none_of(z.border.begin(), z.border.end(),
                                            [&](NodeIndex p) { return byzantine.contains(p); });
            if (clean) candidates[k].push_back(id);
        }
        if (candidates[k].empty()) return std::nullopt;
        std::stable_sort(candidates[k].begin(), candidates[k].end(), [&](ZoneId a, ZoneId b) {
            return zones.zone(a).core.size() < zones.zone(b).core.size();
        });
    }

    // Byzantine nodes whose candidate footprints never meet cannot constrain
    // each other; each such cluster is searched on its own.
    UnionFind clusters(byz.size());
    std::vector<std::int32_t> owner(topo.node_count(), -1);
    for (std::size_t k = 0; k < byz.size(); ++k) {
        for (ZoneId id : candidates[k]) {
            const ControlZone& z = zones.zone(id);
            for (const auto* part : {&z.core, &z.border}) {
                for (NodeIndex p : *part) {
                    if (owner[p] < 0) {
                        owner[p] = static_cast<std::int32_t>(k);
                    } else {
                        clusters.unite(k, static_cast<std::size_t>(owner[p]));
                    }
                }
            }
        }
    }

    CoverState state(topo.node_count());
    for (std::size_t root = 0; root < byz.size(); ++root) {
        if (clusters.find(root) != root) continue;
        std::vector<NodeIndex> members;
        std::vector<std::vector<ZoneId>> member_candidates;
        for (std::size_t k = 0; k < byz.size(); ++k) {
            if (clusters.find(k) == root) {
                members.push_back(byz[k]);
                member_candidates.push_back(candidates[k]);
            }
        }
        ClusterSearch search(zones, state, std::move(members), member_candidates, options.backtrack_budget);
        if (!search.run()) return std::nullopt;
    }
    SafeCover cover = make_cover(topo, zones, state.chosen());
    if (!is_valid_cover(zones, byzantine, cover)) {
        throw std::logic_error("analysis: cover search produced an invalid cover");
    }
    return cover;
}

bool is_valid_cover(const ZoneSet& zones, const NodeSet& byzantine, const SafeCover& cover) {
    const std::size_t n = byzantine.universe();
    NodeSet cores(n);
    NodeSet borders(n);
    for (ZoneId id : cover.zones) {
        if (!zones.contains(id)) return false;
        const ControlZone& z = zones.zone(id);
        for (NodeIndex p : z.core) cores.insert(p);
        for (NodeIndex p : z.border) borders.insert(p);
    }
    return !cores.intersects(borders) && byzantine.is_subset_of(cores);
}

NodeSet safe_set(const Topology& topo, const SafeCover& cover) {
    if (cover.cores.universe() != topo.node_count() || cover.borders.universe() != topo.node_count()) {
        throw InvalidParameter("analysis: cover does not match the topology");
    }
    if (cover.cores.intersects(cover.borders)) {
        throw InvalidParameter("analysis: cover cores and borders intersect");
    }
    return cover.cores.complement();
}

namespace {

class SubsetEnumerator {
public:
    SubsetEnumerator(const ZoneSet& zones, const NodeSet& byz, std::vector<ZoneId> pool,
                     std::size_t max_size, std::uint64_t limit)
        : zones_(zones), byz_(byz.members()), pool_(std::move(pool)), max_size_(max_size), limit_(limit),
          core_count_(byz.universe(), 0), border_count_(byz.universe(), 0) {}

    OracleVerdict run() { return extend(0); }

    const std::vector<ZoneId>& solution() const { return solution_; }
    std::uint64_t examined() const { return examined_; }

private:
    // Examines the current subset, then every extension by zones at index >= from.
    OracleVerdict extend(std::size_t from) {
        if (++examined_ > limit_) return OracleVerdict::inconclusive;
        if (conflicts_ == 0 && std::all_of(byz_.begin(), byz_.end(),
                                           [&](NodeIndex p) { return core_count_[p] > 0; })) {
            solution_ = current_;
            return OracleVerdict::found;
        }
        if (current_.size() == max_size_) return OracleVerdict::none;
        for (std::size_t k = from; k < pool_.size(); ++k) {
            apply(pool_[k], +1);
            current_.push_back(pool_[k]);
            OracleVerdict v = OracleVerdict::none;
            // Adding zones never removes a conflict, so conflicted subsets are
            // closed under extension and need no further expansion.
            if (conflicts_ == 0) v = extend(k + 1);
            current_.pop_back();
            apply(pool_[k], -1);
            if (v != OracleVerdict::none) return v;
        }
        return OracleVerdict::none;
    }

    void apply(ZoneId id, int delta) {
        const ControlZone& z = zones_.zone(id);
        for (NodeIndex p : z.core) {
            if (delta > 0) {
                if (border_count_[p] > 0) conflicts_ += border_count_[p];
                ++core_count_[p];
            } else {
                --core_count_[p];
                if (border_count_[p] > 0) conflicts_ -= border_count_[p];
            }
        }
        for (NodeIndex p : z.border) {
            if (delta > 0) {
                if (core_count_[p] > 0) conflicts_ += core_count_[p];
                ++border_count_[p];
            } else {
                --border_count_[p];
                if (core_count_[p] > 0) conflicts_ -= core_count_[p];
            }
        }
    }

    const ZoneSet& zones_;
    std::vector<NodeIndex> byz_;
    std::vector<ZoneId> pool_;
    std::size_t max_size_;
    std::uint64_t limit_;
    std::vector<int> core_count_;
    std::vector<int> border_count_;
    long conflicts_ = 0;  // number of (core, border) incidences on shared nodes
    std::vector<ZoneId> current_;
    std::vector<ZoneId> solution_;
    std::uint64_t examined_ = 0;
};

}  // namespace

OracleResult exhaustive_safe_cover(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
                                   std::uint64_t limit) {
    // A zone without a Byzantine node in its core can be dropped from any cover,
    // and any cover contains a sub-cover of at most |byz| zones.
    std::vector<ZoneId> pool;
    for (NodeIndex b : byzantine.members()) {
        for (ZoneId id : zones.by_core(b)) pool.push_back(id);
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    SubsetEnumerator search(zones, byzantine, pool, byzantine.size(), limit);
    OracleResult result;
    result.verdict = search.run();
    result.subsets_examined = std::min(search.examined(), limit);
    if (result.verdict == OracleVerdict::found) {
        result.cover = make_cover(topo, zones, search.solution());
    }
    return result;
}

namespace {

// Acceptance of true messages with silent Byzantine nodes. Sending more never
// blocks an acceptance (the exit condition only looks for what has arrived),
// so silence is the worst case for liveness.
//
// v accepts (s, m) from a neighbor u that accepted it once, for every zone z
// with u in core(z), v on border(z) and s outside core(z), some correct node
// of border(z) that accepted (s, m) is linked to v by correct border nodes of
// z: border-only forwarding relays authorizations exactly along such paths.
class AcceptanceModel {
public:
    AcceptanceModel(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine)
        : topo_(topo), zones_(zones), byzantine_(byzantine) {
        const std::size_t n = topo.node_count();
        // Correct-border components, numbered globally across zones.
        std::vector<std::size_t> comp_at;  // per (zone, border position)
        std::vector<std::size_t> offset(zones.size() + 1, 0);
        for (ZoneId z = 0; z < zones.size(); ++z) offset[z + 1] = offset[z] + zones.zone(z).border.size();
        comp_at.assign(offset.back(), kNone);
        std::vector<std::size_t> stack;
        for (ZoneId z = 0; z < zones.size(); ++z) {
            const auto& border = zones.zone(z).border;
            const auto pos = [&](NodeIndex p) {
                return static_cast<std::size_t>(std::lower_bound(border.begin(), border.end(), p) - border.begin());
            };
            for (std::size_t k = 0; k < border.size(); ++k) {
                if (byzantine.contains(border[k]) || comp_at[offset[z] + k] != kNone) continue;
                const std::size_t c = members_.size();
                members_.emplace_back();
                comp_at[offset[z] + k] = c;
                stack.assign({k});
                while (!stack.empty()) {
                    const std::size_t at = stack.back();
                    stack.pop_back();
                    members_[c].push_back(border[at]);
                    for (NodeIndex q : topo.neighbors(border[at])) {
                        const std::size_t kq = pos(q);
                        if (kq == border.size() || border[kq] != q || byzantine.contains(q)) continue;
                        if (comp_at[offset[z] + kq] != kNone) continue;
                        comp_at[offset[z] + kq] = c;
                        stack.push_back(kq);
                    }
                }
            }
        }
        // Per node: the components it belongs to, and per neighbor slot the
        // (zone, component) gates that a message relayed by that neighbor meets.
        ctr_.resize(n);
        gates_.resize(n);
        for (NodeIndex v = 0; v < n; ++v) {
            if (byzantine.contains(v)) continue;
            const auto nb = topo.neighbors(v);
            gates_[v].resize(nb.size());
            for (ZoneId z : zones.by_border(v)) {
                const ControlZone& zone = zones.zone(z);
                const std::size_t k = static_cast<std::size_t>(
                    std::lower_bound(zone.border.begin(), zone.border.end(), v) - zone.border.begin());
                const std::size_t c = comp_at[offset[z] + k];
                ctr_[v].push_back(c);
                for (std::size_t slot = 0; slot < nb.size(); ++slot) {
                    if (zone.in_core(nb[slot])) gates_[v][slot].push_back({z, c});
                }
            }
        }
    }

    NodeSet accepting(NodeIndex source) const {
        const std::size_t n = topo_.node_count();
        NodeSet accepted(n);
        if (byzantine_.contains(source)) return accepted;
        std::vector<char> authorized(members_.size(), 0);
        std::vector<NodeIndex> work;
        const auto admit = [&](NodeIndex w) {
            accepted.insert(w);
            for (std::size_t c : ctr_[w]) {
                if (authorized[c]) continue;
                authorized[c] = 1;
                for (NodeIndex x : members_[c]) {
                    if (!accepted.contains(x)) work.push_back(x);
                }
            }
            for (NodeIndex x : topo_.neighbors(w)) {
                if (!accepted.contains(x) && !byzantine_.contains(x)) work.push_back(x);
            }
        };
        admit(source);
        while (!work.empty()) {
            const NodeIndex v = work.back();
            work.pop_back();
            if (accepted.contains(v)) continue;
            const auto nb = topo_.neighbors(v);
            for (std::size_t slot = 0; slot < nb.size(); ++slot) {
                if (!accepted.contains(nb[slot])) continue;
                bool open = true;
                for (const Gate& g : gates_[v][slot]) {
                    if (!authorized[g.comp] && !zones_.zone(g.zone).in_core(source)) {
                        open = false;
                        break;
                    }
                }
                if (open) {
                    admit(v);
                    break;
                }
            }
        }
        return accepted;
    }

    // Row v: the sources whose true message v accepts, one bit per source.
    std::vector<std::vector<std::uint64_t>> accepting_all() const {
        const std::size_t n = topo_.node_count();
        std::vector<std::vector<std::uint64_t>> rows(n, std::vector<std::uint64_t>((n + 63) / 64, 0));
        for (NodeIndex s = 0; s < n; ++s) {
            if (byzantine_.contains(s)) continue;
            for (NodeIndex v : accepting(s).members()) rows[v][s / 64] |= std::uint64_t{1} << (s % 64);
        }
        return rows;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    struct Gate {
        ZoneId zone;
        std::size_t comp;
    };

    const Topology& topo_;
    const ZoneSet& zones_;
    const NodeSet& byzantine_;
    std::vector<std::vector<NodeIndex>> members_;      // per component
    std::vector<std::vector<std::size_t>> ctr_;        // per node
    std::vector<std::vector<std::vector<Gate>>> gates_;  // per node, per neighbor slot
};

bool row_has(const std::vector<std::uint64_t>& row, NodeIndex p) {
    return (row[p / 64] >> (p % 64)) & 1U;
}

void check_seed(const Topology& topo, const NodeSet& byzantine, NodeIndex node, const char* what) {
    if (node >= topo.node_count()) throw InvalidParameter(std::string("analysis: ") + what + " outside topology");
    if (byzantine.contains(node)) {
        throw InvalidParameter(std::string("analysis: ") + what + " " + to_string(topo.coord(node)) +
                               " is Byzantine");
    }
}

}  // namespace

NodeSet accepting_nodes(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
                        NodeIndex source) {
    check_seed(topo, byzantine, source, "source");
    return AcceptanceModel(topo, zones, byzantine).accepting(source);
}

std::vector<NodeSet> acceptance_matrix(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine) {
    const std::size_t n = topo.node_count();
    const auto rows = AcceptanceModel(topo, zones, byzantine).accepting_all();
    std::vector<NodeSet> out(n, NodeSet(n));
    for (NodeIndex v = 0; v < n; ++v) {
        for (NodeIndex s = 0; s < n; ++s) {
            if (row_has(rows[v], s)) out[v].insert(s);
        }
    }
    return out;
}

bool pair_communicates(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine, NodeIndex a,
                       NodeIndex b) {
    check_seed(topo, byzantine, a, "endpoint");
    check_seed(topo, byzantine, b, "endpoint");
    const AcceptanceModel model(topo, zones, byzantine);
    return model.accepting(a).contains(b) && model.accepting(b).contains(a);
}

NodeSet build_communicating_set(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
                                NodeIndex seed) {
    check_seed(topo, byzantine, seed, "communicating set seed");
    const std::size_t n = topo.node_count();
    const auto rows = AcceptanceModel(topo, zones, byzantine).accepting_all();
    const auto mutual = [&](NodeIndex a, NodeIndex b) { return row_has(rows[a], b) && row_has(rows[b], a); };

    std::vector<NodeIndex> members;
    for (NodeIndex v = 0; v < n; ++v) {
        if (v == seed || mutual(seed, v)) members.push_back(v);
    }
    // Drop the member with the most non-mutual partners until none remain; the
    // seed is mutual with everyone left, so it is never the one dropped.
    std::vector<std::size_t> conflicts(members.size(), 0);
    for (std::size_t x = 0; x < members.size(); ++x) {
        for (std::size_t y = x + 1; y < members.size(); ++y) {
            if (!mutual(members[x], members[y])) {
                ++conflicts[x];
                ++conflicts[y];
            }
        }
    }
    std::vector<char> alive(members.size(), 1);
    for (;;) {
        std::size_t worst = members.size();
        for (std::size_t x = 0; x < members.size(); ++x) {
            if (alive[x] && conflicts[x] > 0 && (worst == members.size() || conflicts[x] > conflicts[worst])) {
                worst = x;
            }
        }
        if (worst == members.size()) break;
        alive[worst] = 0;
        for (std::size_t y = 0; y < members.size(); ++y) {
            if (alive[y] && !mutual(members[worst], members[y])) --conflicts[y];
        }
    }
    NodeSet out(n);
    for (std::size_t x = 0; x < members.size(); ++x) {
        if (alive[x]) out.insert(members[x]);
    }
    return out;
}

NodeSet reliable_set(const NodeSet& safe, const NodeSet& communicating) {
    return safe.intersection(communicating);
}

AnalysisResult analyze(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
                       NodeIndex seed, const CoverSearchOptions& options) {
    AnalysisResult r;
    r.cover = find_safe_cover(topo, zones, byzantine, options);
    r.safe = r.cover ? safe_set(topo, *r.cover) : NodeSet(topo.node_count());
    r.communicating = build_communicating_set(topo, zones, byzantine, seed);
    r.reliable = reliable_set(r.safe, r.communicating);
    return r;
}

}  // namespace czb
