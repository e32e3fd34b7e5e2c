#include "czb/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "czb/errors.hpp"

namespace czb {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

template <typename T>
std::optional<T> to_number(std::string_view s) {
    T value{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
    return value;
}

std::string fixed(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

void write_text_file(const std::filesystem::path& target, const std::string& body) {
    std::filesystem::path tmp = target;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cli: cannot open " + tmp.string() + " for writing");
        f << body;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("cli: failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cli: cannot move output into place at " + target.string());
    }
}

}  // namespace

std::vector<OrderChoice> parse_orders(std::string_view text) {
    std::vector<OrderChoice> out;
    for (std::string_view part : split(text, ',')) {
        if (part == "explorer") {
            out.push_back(std::nullopt);
        } else if (auto w = to_number<int>(part)) {
            out.push_back(*w);
        } else {
            throw InvalidParameter("cli: --order expects integers or 'explorer' (got '" + std::string(part) + "')");
        }
    }
    return out;
}

std::vector<std::size_t> parse_counts(std::string_view text) {
    std::vector<std::size_t> out;
    const auto bad = [&](std::string_view part) {
        return InvalidParameter("cli: --byz expects a list or range like 0,5,10 or 5..9 or 0..100:10 (got '" +
                                std::string(part) + "')");
    };
    for (std::string_view part : split(text, ',')) {
        const std::size_t dots = part.find("..");
        if (dots == std::string_view::npos) {
            const auto v = to_number<std::size_t>(part);
            if (!v) throw bad(part);
            out.push_back(*v);
            continue;
        }
        std::string_view hi_text = part.substr(dots + 2);
        std::size_t step = 1;
        if (const std::size_t colon = hi_text.find(':'); colon != std::string_view::npos) {
            const auto s = to_number<std::size_t>(hi_text.substr(colon + 1));
            if (!s || *s == 0) throw bad(part);
            step = *s;
            hi_text = hi_text.substr(0, colon);
        }
        const auto lo = to_number<std::size_t>(part.substr(0, dots));
        const auto hi = to_number<std::size_t>(hi_text);
        if (!lo || !hi || *lo > *hi) throw bad(part);
        for (std::size_t v = *lo; v <= *hi; v += step) out.push_back(v);
    }
    return out;
}

TopologyKind parse_topology(std::string_view text) {
    if (text == "torus") return TopologyKind::torus;
    if (text == "grid") return TopologyKind::grid;
    throw InvalidParameter("cli: --topology must be torus or grid (got '" + std::string(text) + "')");
}

PairMode parse_pair_mode(std::string_view text) {
    if (text == "all") return PairMode::all;
    if (text == "correct-only") return PairMode::correct_only;
    throw InvalidParameter("cli: --pair-mode must be all or correct-only (got '" + std::string(text) + "')");
}

ExperimentConfig point_config(const SweepSpec& spec, OrderChoice order, std::size_t n_b) {
    ExperimentConfig cfg;
    cfg.kind = spec.kind;
    cfg.side = spec.side;
    cfg.method = order ? Method::protocol : Method::explorer;
    cfg.order = order.value_or(0);
    cfg.byzantine_count = n_b;
    cfg.trials = spec.trials;
    cfg.seed = spec.seed;
    cfg.crosscheck_fraction = order ? spec.crosscheck_fraction : 0.0;
    cfg.record_traces = spec.trace;
    cfg.backtrack_budget = spec.backtrack_budget;
    cfg.pair_mode = spec.pair_mode;
    cfg.threads = spec.threads;
    return cfg;
}

void validate(const SweepSpec& spec) {
    if (spec.orders.empty()) throw InvalidParameter("cli: --order lists no values");
    if (spec.byzantine_counts.empty()) throw InvalidParameter("cli: --byz lists no values");
    for (OrderChoice w : spec.orders) {
        for (std::size_t n_b : spec.byzantine_counts) validate(point_config(spec, w, n_b));
    }
}

std::string csv_header() {
    return "topology,N,W,n_B,trials,p_exists,mean_reliable_frac,p_hat,ci95,seed";
}

std::string csv_row(const ExperimentConfig& cfg, const Estimate& est) {
    std::ostringstream row;
    row << to_string(cfg.kind) << ',' << cfg.side << ','
        << (cfg.method == Method::explorer ? std::string("explorer") : std::to_string(cfg.order)) << ','
        << cfg.byzantine_count << ',' << est.trials << ',' << fixed(est.p_exists) << ','
        << fixed(est.mean_reliable_fraction) << ',' << fixed(est.p_hat) << ',' << fixed(est.ci95) << ','
        << cfg.seed;
    return row.str();
}

void run_sweep(const SweepSpec& spec, std::ostream& log) {
    validate(spec);
    std::ostringstream csv;
    std::ostringstream traces;
    csv << csv_header() << '\n';
    for (OrderChoice w : spec.orders) {
        const ExperimentConfig base = point_config(spec, w, spec.byzantine_counts.front());
        const ExperimentContext ctx(base);
        for (std::size_t n_b : spec.byzantine_counts) {
            const ExperimentConfig cfg = point_config(spec, w, n_b);
            const std::vector<TrialResult> trials = run_trials(ctx, cfg);
            const Estimate est = aggregate(cfg, trials);
            csv << csv_row(cfg, est) << '\n';
            log << csv_row(cfg, est);
            if (est.crosschecked || est.crosscheck_skipped) {
                log << "  (cross-checked " << est.crosschecked << ", skipped " << est.crosscheck_skipped
                    << ", failures " << est.crosscheck_failures << ")";
            }
            log << '\n';
            if (!spec.trace) continue;
            for (std::size_t t = 0; t < trials.size(); ++t) {
                const auto& cc = trials[t].crosscheck;
                if (!cc || !cc->trace) continue;
                nlohmann::json header{{"trial", t}, {"W", cfg.order}, {"n_B", n_b}, {"seed", cc->trace->seed}};
                traces << header.dump() << '\n';
                write_trace_jsonl(traces, ctx.topo, *cc->trace);
            }
        }
    }
    write_text_file(spec.out, csv.str());
    if (spec.trace) {
        std::filesystem::path trace_path = spec.out;
        trace_path += ".trace.jsonl";
        write_text_file(trace_path, traces.str());
    }
}

std::vector<Coord> parse_placement(std::istream& in, int side) {
    std::vector<Coord> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view text = trim(line);
        if (const std::size_t hash = text.find('#'); hash != std::string_view::npos) {
            text = trim(text.substr(0, hash));
        }
        if (text.empty()) continue;
        const auto fail = [&](const std::string& why) {
            return InvalidParameter("placement:" + std::to_string(number) + ": " + why + " ('" +
                                    std::string(text) + "')");
        };
        const auto parts = split(text, ',');
        if (parts.size() != 2) throw fail("expected i,j");
        const auto i = to_number<int>(parts[0]);
        const auto j = to_number<int>(parts[1]);
        if (!i || !j) throw fail("coordinates must be integers");
        if (*i < 1 || *i > side || *j < 1 || *j > side) {
            throw fail("coordinates must lie in 1.." + std::to_string(side));
        }
        out.push_back({*i, *j});
    }
    return out;
}

std::vector<Coord> read_placement(const std::filesystem::path& path, int side) {
    std::ifstream f(path);
    if (!f) throw IoError("cli: cannot read placement file " + path.string());
    return parse_placement(f, side);
}

ScenarioReport debug_scenario(const ScenarioSpec& spec, std::ostream& out) {
    const Topology topo = build_topology(spec.kind, spec.side);
    const ZoneSet zones = ctr_order(topo, spec.order);
    const std::size_t n = topo.node_count();
    NodeSet byz(n);
    for (Coord c : spec.byzantine) byz.insert(topo.index(c));
    if (byz.size() == n) throw InvalidParameter("evaluation: n_B must be < n");

    ScenarioReport report;
    const std::optional<SafeCover> cover = find_safe_cover(topo, zones, byz, {spec.backtrack_budget});
    report.cover_found = cover.has_value();
    const NodeSet cores = cover ? cover->cores : NodeSet(n);

    NodeIndex seed = 0;
    bool have_seed = false;
    for (NodeIndex p = 0; p < n && !have_seed; ++p) {
        if (!byz.contains(p) && !cores.contains(p)) {
            seed = p;
            have_seed = true;
        }
    }
    for (NodeIndex p = 0; p < n && !have_seed; ++p) {
        if (!byz.contains(p)) {
            seed = p;
            have_seed = true;
        }
    }
    const NodeSet safe = cover ? safe_set(topo, *cover) : NodeSet(n);
    const NodeSet communicating = build_communicating_set(topo, zones, byz, seed);
    const NodeSet reliable = reliable_set(safe, communicating);
    report.reliable = reliable.size();
    report.correct = n - byz.size();

    std::ostringstream map;
    for (int i = 1; i <= spec.side; ++i) {
        for (int j = 1; j <= spec.side; ++j) {
            const NodeIndex p = topo.index({i, j});
            char cell = 'x';
            if (cores.contains(p)) {
                cell = 'C';
            } else if (byz.contains(p)) {
                cell = 'B';
            } else if (reliable.contains(p)) {
                cell = 'R';
            }
            map << cell;
        }
        map << '\n';
    }
    report.map = map.str();

    out << to_string(spec.kind) << ' ' << spec.side << 'x' << spec.side << ", W=" << spec.order
        << ", n_B=" << byz.size() << '\n';
    if (cover) {
        out << "safe cover: " << cover->zones.size() << " zone(s)";
        for (ZoneId z : cover->zones) out << ' ' << to_string(zones.zone(z).label);
        out << '\n';
    } else {
        out << "no safe cover\n";
    }
    out << report.map;
    out << "reliable " << report.reliable << " / correct " << report.correct << '\n';

    const std::uint64_t ceiling = complexity_bound(topo, zones);
    if (ceiling <= spec.simulation_budget) {
        std::vector<Payload> payloads(n);
        for (NodeIndex p = 0; p < n; ++p) payloads[p] = static_cast<Payload>(p);
        std::vector<ByzantineScript> scripts;
        for (NodeIndex b : byz.members()) scripts.push_back(forging_script(topo, zones, b, byz, payloads));
        SimulationOptions options;
        options.record_deliveries = spec.trace_out.has_value();
        const Trace trace = run(topo, zones, byz, scripts, spec.seed, options);
        report.simulated = true;
        report.pairs_communicate = true;
        for (NodeIndex q : reliable.members()) {
            for (NodeIndex p : reliable.members()) {
                if (!trace.states[q].accepted({p, trace.payloads[p]})) report.pairs_communicate = false;
            }
        }
        report.false_acceptances = check_safety(trace, safe).size();
        out << "simulation: " << trace.delivery_count << " deliveries, reliable pairs "
            << (report.pairs_communicate ? "communicate" : "DO NOT communicate") << ", "
            << report.false_acceptances << " false acceptance(s) by safe nodes\n";
        if (spec.trace_out) {
            std::ostringstream body;
            write_trace_jsonl(body, topo, trace);
            write_text_file(*spec.trace_out, body.str());
        }
    } else {
        out << "simulation skipped: message ceiling " << ceiling << " exceeds budget\n";
    }
    return report;
}

}  // namespace czb
