#include "czb/simulator.hpp"

#include <algorithm>
#include <ostream>
#include <random>

#include "json.hpp"

#include "czb/errors.hpp"

namespace czb {

Broadcast Envelope::body() const {
    if (kind == MessageKind::standard) return StandardMessage{source, payload};
    return AuthMessage{source, payload, zone};
}

namespace {

Envelope make_envelope(NodeIndex from, NodeIndex to, const Broadcast& body) {
    Envelope e;
    e.from = from;
    e.to = to;
    if (const auto* s = std::get_if<StandardMessage>(&body)) {
        e.kind = MessageKind::standard;
        e.source = s->source;
        e.payload = s->payload;
    } else {
        const auto& a = std::get<AuthMessage>(body);
        e.kind = MessageKind::auth;
        e.source = a.source;
        e.payload = a.payload;
        e.zone = a.zone;
    }
    return e;
}

class Scheduler {
public:
    Scheduler(const Topology& topo, std::uint64_t seed) : topo_(topo), rng_(seed) {}

    // Returns the number of envelopes enqueued.
    std::uint64_t broadcast(NodeIndex from, const Broadcast& body) {
        const auto nb = topo_.neighbors(from);
        for (NodeIndex to : nb) pool_.push_back(make_envelope(from, to, body));
        return nb.size();
    }

    bool empty() const { return pool_.empty(); }

    Envelope draw() {
        const std::size_t k = static_cast<std::size_t>(rng_() % pool_.size());
        Envelope e = pool_[k];
        pool_[k] = pool_.back();
        pool_.pop_back();
        return e;
    }

private:
    const Topology& topo_;
    std::mt19937_64 rng_;
    std::vector<Envelope> pool_;
};

struct PendingInjection {
    std::uint64_t at_step;
    std::size_t order;
    NodeIndex node;
    Broadcast body;
    std::uint32_t repeat;
};

}  // namespace

Trace run(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
          std::span<const ByzantineScript> scripts, std::uint64_t seed,
          const SimulationOptions& options) {
    const std::size_t n = topo.node_count();
    if (byzantine.universe() != n) {
        throw ConfigurationError("simulator: Byzantine set does not match the topology");
    }
    Trace trace;
    trace.seed = seed;
    trace.byzantine = byzantine;
    trace.states.resize(n);
    if (options.payloads.empty()) {
        trace.payloads.resize(n);
        for (NodeIndex p = 0; p < n; ++p) trace.payloads[p] = static_cast<Payload>(p);
    } else if (options.payloads.size() == n) {
        trace.payloads = options.payloads;
    } else {
        throw ConfigurationError("simulator: payload table does not match the topology");
    }

    std::vector<PendingInjection> pending;
    for (const ByzantineScript& script : scripts) {
        if (!byzantine.contains(script.node)) {
            throw ConfigurationError("simulator: script bound to correct node " +
                                     to_string(topo.coord(script.node)));
        }
        for (const Injection& inj : script.actions) {
            pending.push_back({inj.at_step, pending.size(), script.node, inj.body, inj.repeat});
        }
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [](const PendingInjection& a, const PendingInjection& b) { return a.at_step < b.at_step; });

    Scheduler scheduler(topo, seed);
    const auto is_true = [&](NodeIndex source, Payload payload) {
        return source < n && !byzantine.contains(source) && trace.payloads[source] == payload;
    };
    const auto send = [&](NodeIndex from, const Outbox& out) {
        for (const Broadcast& b : out) {
            const std::uint64_t k = scheduler.broadcast(from, b);
            if (const auto* m = std::get_if<StandardMessage>(&b)) {
                trace.standard_sent += k;
                if (is_true(m->source, m->payload)) trace.true_standard_sent += k;
            } else {
                const auto& a = std::get<AuthMessage>(b);
                trace.auth_sent += k;
                if (is_true(a.source, a.payload)) trace.true_auth_sent += k;
            }
        }
    };

    for (NodeIndex p = 0; p < n; ++p) {
        if (byzantine.contains(p)) continue;
        InitResult init = init_node(p, trace.payloads[p], zones.by_border(p));
        trace.states[p] = std::move(init.state);
        trace.acceptances.push_back({0, p, {p, trace.payloads[p]}});
        send(p, init.out);
    }

    std::size_t next_injection = 0;
    const auto release_injections = [&](std::uint64_t step) {
        while (next_injection < pending.size() && pending[next_injection].at_step <= step) {
            const PendingInjection& inj = pending[next_injection++];
            for (std::uint32_t r = 0; r < inj.repeat; ++r) {
                const std::uint64_t k = scheduler.broadcast(inj.node, inj.body);
                (std::holds_alternative<StandardMessage>(inj.body) ? trace.injected_standard
                                                                   : trace.injected_auth) += k;
            }
        }
    };

    Outbox relay;
    std::uint64_t step = 0;
    for (;;) {
        release_injections(step);
        if (scheduler.empty()) {
            if (next_injection == pending.size()) break;
            step = std::max(step, pending[next_injection].at_step);
            continue;
        }
        const Envelope e = scheduler.draw();
        ++step;
        ++trace.delivery_count;
        if (options.record_deliveries) trace.deliveries.push_back({step, e});
        if (byzantine.contains(e.to)) continue;

        NodeState& state = trace.states[e.to];
        const StandardMessage msg{e.source, e.payload};
        bool touched = false;
        if (e.kind == MessageKind::standard) {
            touched = on_standard(state, msg, e.from);
        } else {
            relay.clear();
            const AuthOutcome outcome =
                on_auth(state, {e.source, e.payload, e.zone}, e.from, zones, relay, options.protocol);
            if (outcome == AuthOutcome::unknown_zone) ++trace.malformed;
            touched = outcome == AuthOutcome::stored;
            send(e.to, relay);
        }
        if (!touched) continue;
        ExitResult exit = try_exit(state, zones, msg);
        for (const StandardMessage& m : exit.accepted) trace.acceptances.push_back({step, e.to, m});
        send(e.to, exit.out);
    }
    return trace;
}

MessageCounts message_counts(const Trace& trace) {
    return {trace.standard_sent, trace.auth_sent};
}

MessageCounts true_message_counts(const Trace& trace) {
    return {trace.true_standard_sent, trace.true_auth_sent};
}

std::vector<SafetyViolation> check_safety(const Trace& trace, const NodeSet& claimed_safe,
                                          const SafetyOptions& options) {
    std::vector<SafetyViolation> out;
    for (const Acceptance& a : trace.acceptances) {
        if (!claimed_safe.contains(a.node)) continue;
        const NodeIndex s = a.message.source;
        if (s >= trace.payloads.size()) continue;  // names no node, so it has no true value
        if (trace.byzantine.contains(s) && !options.flag_byzantine_sources) continue;
        if (a.message.payload != trace.payloads.at(s)) out.push_back({a.step, a.node, a.message});
    }
    return out;
}

ByzantineScript forging_script(const Topology& topo, const ZoneSet& zones, NodeIndex node,
                               const NodeSet& byzantine, std::span<const Payload> payloads) {
    ByzantineScript script;
    script.node = node;
    const auto own_zones = zones.by_border(node);
    for (NodeIndex s = 0; s < topo.node_count(); ++s) {
        if (byzantine.contains(s)) continue;
        const Payload fake = forged_payload(payloads[s]);
        script.actions.push_back({StandardMessage{s, fake}});
        for (ZoneId z : own_zones) script.actions.push_back({AuthMessage{s, fake, z}});
    }
    script.actions.push_back({StandardMessage{node, payloads[node]}});
    script.actions.push_back({StandardMessage{node, forged_payload(payloads[node])}});
    return script;
}

void write_trace_jsonl(std::ostream& out, const Topology& topo, const Trace& trace) {
    const auto xy = [&](NodeIndex p) {
        const Coord c = topo.coord(p);
        return nlohmann::json::array({c.i, c.j});
    };
    const auto write_acceptance = [&](const Acceptance& a) {
        nlohmann::json ev{{"step", a.step},
                          {"accept", xy(a.node)},
                          {"s", xy(a.message.source)},
                          {"m", a.message.payload}};
        out << ev.dump() << '\n';
    };
    std::size_t next = 0;
    while (next < trace.acceptances.size() && trace.acceptances[next].step == 0) {
        write_acceptance(trace.acceptances[next++]);
    }
    for (const Delivery& d : trace.deliveries) {
        const Envelope& e = d.envelope;
        nlohmann::json ev{{"step", d.step},
                          {"from", xy(e.from)},
                          {"to", xy(e.to)},
                          {"kind", e.kind == MessageKind::standard ? "std" : "auth"},
                          {"s", xy(e.source)},
                          {"m", e.payload}};
        if (e.kind == MessageKind::auth) ev["z"] = e.zone;
        out << ev.dump() << '\n';
        while (next < trace.acceptances.size() && trace.acceptances[next].step == d.step) {
            write_acceptance(trace.acceptances[next++]);
        }
    }
    while (next < trace.acceptances.size()) write_acceptance(trace.acceptances[next++]);
}

}  // namespace czb
