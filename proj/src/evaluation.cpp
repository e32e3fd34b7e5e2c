#include "czb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "czb/errors.hpp"

namespace czb {

void validate(const ExperimentConfig& cfg) {
    if (cfg.kind == TopologyKind::torus && cfg.side < 3) {
        throw InvalidParameter("topology: torus side must be >= 3 (got " + std::to_string(cfg.side) + ")");
    }
    if (cfg.kind == TopologyKind::grid && cfg.side < 2) {
        throw InvalidParameter("topology: grid side must be >= 2 (got " + std::to_string(cfg.side) + ")");
    }
    if (cfg.method == Method::protocol) {
        if (cfg.order < 1) {
            throw InvalidParameter("zones: order W must be >= 1 (got " + std::to_string(cfg.order) + ")");
        }
        if (cfg.order + 2 > cfg.side) {
            throw InvalidParameter("zones: order W + 2 must not exceed N (W " + std::to_string(cfg.order) +
                                   ", N " + std::to_string(cfg.side) + ")");
        }
    }
    const std::size_t n = static_cast<std::size_t>(cfg.side) * cfg.side;
    if (cfg.byzantine_count >= n) {
        throw InvalidParameter("evaluation: n_B must be < n (n_B " + std::to_string(cfg.byzantine_count) +
                               ", n " + std::to_string(n) + ")");
    }
    if (n < 2 || (cfg.pair_mode == PairMode::correct_only && n - cfg.byzantine_count < 2)) {
        throw InvalidParameter("evaluation: fewer than two nodes available for the evaluated pair");
    }
    if (cfg.trials < 1) throw InvalidParameter("evaluation: trial count must be >= 1");
    if (!(cfg.crosscheck_fraction >= 0.0 && cfg.crosscheck_fraction <= 1.0)) {
        throw InvalidParameter("evaluation: cross-check fraction must lie in [0, 1]");
    }
}

ExperimentContext::ExperimentContext(const ExperimentConfig& cfg)
    : topo(build_topology(cfg.kind, cfg.side)),
      zones(cfg.method == Method::protocol ? ctr_order(topo, cfg.order) : ZoneSet(topo.node_count(), {})) {}

std::mt19937_64 trial_rng(std::uint64_t master_seed, std::uint64_t trial_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial_index), static_cast<std::uint32_t>(trial_index >> 32)};
    return std::mt19937_64(seq);
}

bool crosscheck_selected(double fraction, std::size_t trial_index) {
    if (fraction <= 0.0) return false;
    const auto t = static_cast<double>(trial_index);
    return std::floor((t + 1.0) * fraction) > std::floor(t * fraction);
}

namespace {

std::size_t uniform_below(std::mt19937_64& rng, std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng);
}

// Simulates the trial's placement against forging scripts and checks what the
// analysis claimed.
CrossCheck cross_check(const ExperimentContext& ctx, const ExperimentConfig& cfg, const NodeSet& byz,
                       const AnalysisResult& analysis, std::uint64_t seed) {
    CrossCheck check;
    const std::uint64_t ceiling = complexity_bound(ctx.topo, ctx.zones);
    if (ceiling > cfg.crosscheck_message_budget) {
        check.skipped = true;
        return check;
    }
    std::vector<Payload> payloads(ctx.topo.node_count());
    std::iota(payloads.begin(), payloads.end(), Payload{0});
    std::vector<ByzantineScript> scripts;
    for (NodeIndex b : byz.members()) scripts.push_back(forging_script(ctx.topo, ctx.zones, b, byz, payloads));
    SimulationOptions options;
    options.record_deliveries = cfg.record_traces;
    Trace trace = run(ctx.topo, ctx.zones, byz, scripts, seed, options);

    const std::vector<NodeIndex> reliable = analysis.reliable.members();
    check.pairs_communicate = true;
    for (NodeIndex q : reliable) {
        for (NodeIndex p : reliable) {
            if (!trace.states[q].accepted({p, payloads[p]})) {
                check.pairs_communicate = false;
                break;
            }
        }
        if (!check.pairs_communicate) break;
    }
    // A reliable set only vouches for messages attributed to its members.
    // Correct nodes sharing a cover core with a Byzantine node can be
    // impersonated even towards safe nodes, so those are tallied apart.
    const auto violations = check_safety(trace, analysis.safe);
    check.safe_false_acceptances = violations.size();
    check.false_acceptances = static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const SafetyViolation& v) {
            return analysis.reliable.contains(v.node) && analysis.reliable.contains(v.message.source);
        }));
    check.counts = message_counts(trace);
    check.true_counts = true_message_counts(trace);
    check.within_ceiling = check.true_counts.total() <= ceiling && (!byz.empty() || check.counts.total() <= ceiling);
    if (cfg.record_traces) check.trace = std::move(trace);
    return check;
}

}  // namespace

TrialResult run_trial(const ExperimentContext& ctx, const ExperimentConfig& cfg, std::size_t trial_index) {
    const Topology& topo = ctx.topo;
    const std::size_t n = topo.node_count();
    std::mt19937_64 rng = trial_rng(cfg.seed, trial_index);
    TrialResult result;

    // Uniform placement without replacement (partial Fisher-Yates).
    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    for (std::size_t k = 0; k < cfg.byzantine_count; ++k) {
        std::swap(order[k], order[k + uniform_below(rng, n - k)]);
    }
    result.byzantine.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.byzantine_count));
    std::sort(result.byzantine.begin(), result.byzantine.end());
    const NodeSet byz(n, result.byzantine);

    // Evaluated pair: two distinct nodes, drawn from all nodes or from the
    // correct ones.
    if (cfg.pair_mode == PairMode::all) {
        result.first = static_cast<NodeIndex>(uniform_below(rng, n));
        result.second = static_cast<NodeIndex>(uniform_below(rng, n - 1));
        if (result.second >= result.first) ++result.second;
    } else {
        const std::size_t correct = n - cfg.byzantine_count;
        const std::size_t x = uniform_below(rng, correct);
        std::size_t y = uniform_below(rng, correct - 1);
        if (y >= x) ++y;
        result.first = order[cfg.byzantine_count + x];
        result.second = order[cfg.byzantine_count + y];
    }
    const bool endpoints_correct = !byz.contains(result.first) && !byz.contains(result.second);

    if (cfg.method == Method::explorer) {
        const ExplorerPaths paths = explorer_paths(topo, result.first, result.second);
        result.explorer_paths = paths.achieved();
        result.pair_success = endpoints_correct && explorer_success(paths, byz);
        return result;
    }

    NodeIndex seed = result.first;
    if (byz.contains(seed)) seed = result.second;
    if (byz.contains(seed)) seed = order[cfg.byzantine_count];
    const std::uint64_t sim_seed = rng();

    AnalysisResult analysis;
    analysis.cover = find_safe_cover(topo, ctx.zones, byz, {cfg.backtrack_budget});
    result.cover_found = analysis.cover.has_value();
    analysis.safe = result.cover_found ? safe_set(topo, *analysis.cover) : NodeSet(n);
    // A safe mutual pair is itself a reliable set, so the pair test is exact.
    result.pair_success = endpoints_correct && analysis.safe.contains(result.first) &&
                          analysis.safe.contains(result.second) &&
                          pair_communicates(topo, ctx.zones, byz, result.first, result.second);

    const bool crosscheck = crosscheck_selected(cfg.crosscheck_fraction, trial_index);
    if (cfg.reliable_fraction || crosscheck) {
        analysis.communicating = build_communicating_set(topo, ctx.zones, byz, seed);
        analysis.reliable = reliable_set(analysis.safe, analysis.communicating);
        if (result.cover_found && cfg.reliable_fraction) {
            result.reliable_fraction = static_cast<double>(analysis.reliable.size()) /
                                       static_cast<double>(n - cfg.byzantine_count);
        }
    }
    if (crosscheck) result.crosscheck = cross_check(ctx, cfg, byz, analysis, sim_seed);
    return result;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial_index) {
    validate(cfg);
    const ExperimentContext ctx(cfg);
    return run_trial(ctx, cfg, trial_index);
}

std::vector<TrialResult> run_trials(const ExperimentContext& ctx, const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<TrialResult> results(cfg.trials);
    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.trials));
    if (workers <= 1) {
        for (std::size_t t = 0; t < cfg.trials; ++t) results[t] = run_trial(ctx, cfg, t);
        return results;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t t = w; t < cfg.trials; t += workers) results[t] = run_trial(ctx, cfg, t);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

Estimate aggregate(const ExperimentConfig& cfg, const std::vector<TrialResult>& trials) {
    Estimate est;
    est.trials = trials.size();
    double frac_sum = 0.0;
    double frac_sq = 0.0;
    for (const TrialResult& t : trials) {
        est.successes += t.pair_success ? 1 : 0;
        if (t.cover_found) {
            ++est.covers_found;
            frac_sum += t.reliable_fraction;
            frac_sq += t.reliable_fraction * t.reliable_fraction;
        }
        if (t.crosscheck) {
            if (t.crosscheck->skipped) {
                ++est.crosscheck_skipped;
            } else {
                ++est.crosschecked;
                const bool ok = t.crosscheck->pairs_communicate && t.crosscheck->false_acceptances == 0 &&
                                t.crosscheck->within_ceiling;
                est.crosscheck_failures += ok ? 0 : 1;
            }
        }
    }
    const auto k = static_cast<double>(est.trials);
    const auto half_width = [&](double p) { return k > 0 ? 1.96 * std::sqrt(p * (1.0 - p) / k) : 0.0; };
    est.p_hat = k > 0 ? static_cast<double>(est.successes) / k : 0.0;
    est.ci95 = half_width(est.p_hat);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (cfg.method == Method::explorer) {
        est.p_exists = nan;
        est.p_exists_ci95 = nan;
        est.mean_reliable_fraction = nan;
        est.reliable_fraction_ci95 = nan;
        return est;
    }
    est.p_exists = k > 0 ? static_cast<double>(est.covers_found) / k : 0.0;
    est.p_exists_ci95 = half_width(est.p_exists);
    if (est.covers_found == 0 || !cfg.reliable_fraction) {
        est.mean_reliable_fraction = nan;
        est.reliable_fraction_ci95 = nan;
    } else {
        const auto m = static_cast<double>(est.covers_found);
        est.mean_reliable_fraction = frac_sum / m;
        const double var = m > 1 ? std::max(0.0, (frac_sq - m * est.mean_reliable_fraction *
                                                                 est.mean_reliable_fraction) / (m - 1))
                                 : 0.0;
        est.reliable_fraction_ci95 = 1.96 * std::sqrt(var / m);
    }
    return est;
}

Estimate estimate_P(const ExperimentContext& ctx, const ExperimentConfig& cfg) {
    return aggregate(cfg, run_trials(ctx, cfg));
}

Estimate estimate_P(const ExperimentConfig& cfg) {
    validate(cfg);
    const ExperimentContext ctx(cfg);
    return estimate_P(ctx, cfg);
}

namespace {

// Unit-capacity min-cost flow on the node-split graph: node v becomes
// in(v) = 2v -> out(v) = 2v + 1 with capacity 1, every edge u-v becomes
// out(u) -> in(v) with capacity 1 and cost 1.
class DisjointPathFlow {
public:
    DisjointPathFlow(const Topology& topo, NodeIndex a, NodeIndex b) : topo_(topo), a_(a), b_(b) {
        const std::size_t n = topo.node_count();
        head_.assign(2 * n, -1);
        for (NodeIndex v = 0; v < n; ++v) add_arc(2 * v, 2 * v + 1, 0);
        for (NodeIndex u = 0; u < n; ++u) {
            for (NodeIndex v : topo.neighbors(u)) add_arc(2 * u + 1, 2 * v, 1);
        }
    }

    std::size_t augment(std::size_t max_paths) {
        std::size_t flow = 0;
        while (flow < max_paths && shortest_path()) ++flow;
        return flow;
    }

    std::vector<std::vector<NodeIndex>> paths() {
        std::vector<std::vector<NodeIndex>> out;
        const std::size_t source = 2 * a_ + 1;
        const std::size_t sink = 2 * b_;
        for (int e = head_[source]; e >= 0; e = arcs_[e].next) {
            if (!(arcs_[e].cost == 1 && arcs_[e].cap == 0)) continue;
            std::vector<NodeIndex> path{a_};
            std::size_t at = arcs_[e].to;
            while (at != sink) {
                const NodeIndex v = static_cast<NodeIndex>(at / 2);
                path.push_back(v);
                // through in(v) -> out(v), then the saturated forward arc out of out(v)
                const std::size_t out_node = 2 * v + 1;
                std::size_t next = sink;
                bool found = false;
                for (int f = head_[out_node]; f >= 0; f = arcs_[f].next) {
                    if (arcs_[f].cost == 1 && arcs_[f].cap == 0) {
                        next = arcs_[f].to;
                        found = true;
                        break;
                    }
                }
                if (!found) throw std::logic_error("evaluation: broken flow decomposition");
                at = next;
            }
            path.push_back(b_);
            out.push_back(std::move(path));
        }
        return out;
    }

private:
    struct Arc {
        std::size_t to;
        int cap;
        int cost;
        int next;
    };

    void add_arc(std::size_t from, std::size_t to, int cost) {
        arcs_.push_back({to, 1, cost, head_[from]});
        head_[from] = static_cast<int>(arcs_.size() - 1);
        arcs_.push_back({from, 0, -cost, head_[to]});
        head_[to] = static_cast<int>(arcs_.size() - 1);
    }

    // Bellman-Ford queue variant; residual arcs carry negative costs.
    bool shortest_path() {
        const std::size_t nodes = head_.size();
        const std::size_t source = 2 * a_ + 1;
        const std::size_t sink = 2 * b_;
        constexpr int inf = std::numeric_limits<int>::max();
        std::vector<int> dist(nodes, inf);
        std::vector<int> via(nodes, -1);
        std::vector<char> in_queue(nodes, 0);
        std::deque<std::size_t> queue{source};
        dist[source] = 0;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            in_queue[u] = 0;
            for (int e = head_[u]; e >= 0; e = arcs_[e].next) {
                const Arc& arc = arcs_[e];
                if (arc.cap == 0 || arc.to == 2 * a_ + 0) continue;
                const int d = dist[u] + arc.cost;
                if (d < dist[arc.to]) {
                    dist[arc.to] = d;
                    via[arc.to] = e;
                    if (!in_queue[arc.to] && arc.to != sink) {
                        in_queue[arc.to] = 1;
                        queue.push_back(arc.to);
                    }
                }
            }
        }
        if (dist[sink] == inf) return false;
        for (std::size_t v = sink; v != source;) {
            const int e = via[v];
            arcs_[e].cap -= 1;
            arcs_[e ^ 1].cap += 1;
            v = arcs_[e ^ 1].to;
        }
        return true;
    }

    const Topology& topo_;
    NodeIndex a_;
    NodeIndex b_;
    std::vector<int> head_;
    std::vector<Arc> arcs_;
};

}  // namespace

ExplorerPaths explorer_paths(const Topology& topo, NodeIndex a, NodeIndex b) {
    if (a >= topo.node_count() || b >= topo.node_count()) {
        throw InvalidParameter("evaluation: explorer endpoint outside topology");
    }
    if (a == b) throw InvalidParameter("evaluation: explorer endpoints must differ");
    ExplorerPaths result;
    result.from = a;
    result.to = b;
    DisjointPathFlow flow(topo, a, b);
    flow.augment(4);
    result.paths = flow.paths();
    std::sort(result.paths.begin(), result.paths.end(),
              [](const auto& x, const auto& y) { return x.size() != y.size() ? x.size() < y.size() : x < y; });
    verify_disjoint(topo, result);
    return result;
}

void verify_disjoint(const Topology& topo, const ExplorerPaths& paths) {
    std::vector<NodeIndex> interior;
    for (const auto& path : paths.paths) {
        if (path.size() < 2 || path.front() != paths.from || path.back() != paths.to) {
            throw std::logic_error("evaluation: explorer path has wrong endpoints");
        }
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            if (!topo.adjacent(path[k], path[k + 1])) {
                throw std::logic_error("evaluation: explorer path uses a non-edge");
            }
        }
        interior.insert(interior.end(), path.begin() + 1, path.end() - 1);
    }
    std::sort(interior.begin(), interior.end());
    if (std::adjacent_find(interior.begin(), interior.end()) != interior.end()) {
        throw std::logic_error("evaluation: explorer paths share an interior node");
    }
    if (std::binary_search(interior.begin(), interior.end(), paths.from) ||
        std::binary_search(interior.begin(), interior.end(), paths.to)) {
        throw std::logic_error("evaluation: explorer path revisits an endpoint");
    }
    // Two direct a-b edges would be the same edge.
    const auto direct = std::count_if(paths.paths.begin(), paths.paths.end(),
                                      [](const auto& p) { return p.size() == 2; });
    if (direct > 1) throw std::logic_error("evaluation: explorer paths repeat the direct edge");
}

bool explorer_success(const ExplorerPaths& paths, const NodeSet& byzantine) {
    std::size_t hit = 0;
    for (const auto& path : paths.paths) {
        const bool touched = std::any_of(path.begin() + 1, path.end() - 1,
                                         [&](NodeIndex p) { return byzantine.contains(p); });
        hit += touched ? 1 : 0;
    }
    return hit <= 1;
}

std::uint64_t complexity_bound(std::uint64_t n, std::uint64_t d, std::uint64_t n_ctr, std::uint64_t n_border) {
    return d * n * (n + n_border * n_ctr);
}

std::uint64_t complexity_bound(const Topology& topo, const ZoneSet& zones) {
    return complexity_bound(topo.node_count(), topo.max_degree(), zones.size(), zones.max_border_size());
}

}  // namespace czb
