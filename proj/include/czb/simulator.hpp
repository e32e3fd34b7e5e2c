#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "czb/protocol.hpp"
#include "czb/topology.hpp"
#include "czb/zones.hpp"

namespace czb {

enum class MessageKind : std::uint8_t { standard, auth };

// One in-flight message on the edge from -> to. `zone` is meaningful for
// authorizations only.
struct Envelope {
    NodeIndex from = 0;
    NodeIndex to = 0;
    MessageKind kind = MessageKind::standard;
    NodeIndex source = 0;
    Payload payload = 0;
    ZoneId zone = 0;

    Broadcast body() const;
    bool operator==(const Envelope&) const = default;
};

// A scripted Byzantine emission, broadcast to all neighbors `repeat` times
// once the scheduler reaches `at_step` deliveries.
struct Injection {
    Broadcast body;
    std::uint32_t repeat = 1;
    std::uint64_t at_step = 0;
};

// Byzantine nodes only run their script and silently drop what they receive.
struct ByzantineScript {
    NodeIndex node = 0;
    std::vector<Injection> actions;
};

struct Delivery {
    std::uint64_t step = 0;
    Envelope envelope;
};

struct Acceptance {
    std::uint64_t step = 0;  // 0 for INIT, otherwise the delivery that triggered it
    NodeIndex node = 0;
    StandardMessage message;
};

struct Trace {
    std::uint64_t seed = 0;
    std::uint64_t delivery_count = 0;
    std::vector<Delivery> deliveries;  // filled only when recording is enabled
    std::vector<Acceptance> acceptances;
    std::vector<NodeState> states;     // by node; Byzantine entries stay default
    NodeSet byzantine;
    std::vector<Payload> payloads;     // true m0 per node (nominal for Byzantine nodes)

    // Envelopes emitted by correct nodes.
    std::uint64_t standard_sent = 0;
    std::uint64_t auth_sent = 0;
    // The part of the above carrying a true message (s, s.m0) of a correct s.
    std::uint64_t true_standard_sent = 0;
    std::uint64_t true_auth_sent = 0;
    // Envelopes emitted by Byzantine scripts.
    std::uint64_t injected_standard = 0;
    std::uint64_t injected_auth = 0;
    // Authorizations naming a zone outside the zone set.
    std::uint64_t malformed = 0;
};

struct SimulationOptions {
    ProtocolOptions protocol;
    bool record_deliveries = false;
    // True payload per node; empty means m0(p) = p.
    std::vector<Payload> payloads;
};

// Executes the protocol under a seeded scheduler that repeatedly delivers an
// in-flight envelope drawn uniformly at random, until quiescence. Throws
// ConfigurationError if a script is bound to a correct node.
Trace run(const Topology& topo, const ZoneSet& zones, const NodeSet& byzantine,
          std::span<const ByzantineScript> scripts, std::uint64_t seed,
          const SimulationOptions& options = {});

struct MessageCounts {
    std::uint64_t standard = 0;
    std::uint64_t auth = 0;

    std::uint64_t total() const { return standard + auth; }
};

// Envelopes sent by correct nodes.
MessageCounts message_counts(const Trace& trace);

// Envelopes sent by correct nodes about true messages of correct sources; the
// traffic the dn(n + N_Border * N_Ctr) ceiling accounts for. Relays of forged
// authorizations are excluded: an adversary can make their number arbitrary.
MessageCounts true_message_counts(const Trace& trace);

struct SafetyViolation {
    std::uint64_t step = 0;
    NodeIndex node = 0;
    StandardMessage message;
};

struct SafetyOptions {
    // Byzantine sources have no real m0; when set, accepting (b, m) with m
    // different from b's nominal payload is also reported.
    bool flag_byzantine_sources = false;
};

// Acceptances of false messages by nodes in `claimed_safe`.
std::vector<SafetyViolation> check_safety(const Trace& trace, const NodeSet& claimed_safe,
                                          const SafetyOptions& options = {});

// Payload a forging adversary substitutes for m; never equal to a true payload
// under the default m0(p) = p convention.
constexpr Payload forged_payload(Payload m) { return -m - 1; }

// Default adversary for `node`: a false standard message for every correct
// source, a matching false authorization for every zone on whose border the
// node sits, and an equivocation about its own value.
ByzantineScript forging_script(const Topology& topo, const ZoneSet& zones, NodeIndex node,
                               const NodeSet& byzantine, std::span<const Payload> payloads);

// Line-delimited JSON: delivery events followed by the acceptances they caused.
void write_trace_jsonl(std::ostream& out, const Topology& topo, const Trace& trace);

}  // namespace czb
