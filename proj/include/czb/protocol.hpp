#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "czb/topology.hpp"
#include "czb/zones.hpp"

namespace czb {

using Payload = std::int64_t;

// (s, m): a claim that node s broadcast payload m.
struct StandardMessage {
    NodeIndex source = 0;
    Payload payload = 0;

    auto operator<=>(const StandardMessage&) const = default;
};

// (s, m, z): authorizes (s, m) to leave the core of zone z.
struct AuthMessage {
    NodeIndex source = 0;
    Payload payload = 0;
    ZoneId zone = 0;

    auto operator<=>(const AuthMessage&) const = default;
    StandardMessage message() const { return {source, payload}; }
};

struct StandardMessageHash {
    std::size_t operator()(const StandardMessage& m) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(m.source) << 40) ^
                                          static_cast<std::uint64_t>(m.payload));
    }
};

struct AuthMessageHash {
    std::size_t operator()(const AuthMessage& m) const noexcept {
        std::uint64_t h = (static_cast<std::uint64_t>(m.source) << 40) ^ static_cast<std::uint64_t>(m.payload);
        h ^= static_cast<std::uint64_t>(m.zone) * 0x9e3779b97f4a7c15ULL;
        return std::hash<std::uint64_t>{}(h);
    }
};

// Every protocol send goes to all neighbors of the sending node.
using Broadcast = std::variant<StandardMessage, AuthMessage>;
using Outbox = std::vector<Broadcast>;

// Who relays an authorization received from a border node.
//  border_only: only nodes that are themselves on border(z) store and relay it.
//  verbatim:    every receiver stores and relays it.
enum class DiffForwarding { border_only, verbatim };

struct ProtocolOptions {
    DiffForwarding diff = DiffForwarding::border_only;
};

struct NodeState {
    NodeIndex self = 0;
    Payload m0 = 0;
    std::vector<ZoneId> my_ctr;  // sorted

    // (s, m) -> neighbors q it was received from, pending authorization.
    std::map<StandardMessage, std::vector<NodeIndex>> wait;
    std::unordered_set<AuthMessage, AuthMessageHash> auth;
    std::unordered_set<StandardMessage, StandardMessageHash> acc;

    bool accepted(const StandardMessage& m) const { return acc.contains(m); }
    bool authorized(const AuthMessage& a) const { return auth.contains(a); }
    bool waiting(const StandardMessage& m, NodeIndex from) const;
    std::size_t wait_size() const;
};

struct InitResult {
    NodeState state;
    Outbox out;
};

// INIT: accepts (p, m0) and broadcasts it plus one authorization per zone of
// my_ctr.
InitResult init_node(NodeIndex p, Payload m0, std::span<const ZoneId> my_ctr);

// ENTER. Returns true iff Wait gained the triple (s, m, from).
bool on_standard(NodeState& state, const StandardMessage& msg, NodeIndex from);

enum class AuthOutcome {
    stored,          // joined Auth and was relayed
    duplicate,       // already in Auth
    foreign_sender,  // sender not on border(z)
    not_on_border,   // border_only forwarding and receiver not on border(z)
    unknown_zone,    // zone id outside the zone set
};

// DIFF. Relays are appended to `out`.
AuthOutcome on_auth(NodeState& state, const AuthMessage& msg, NodeIndex from, const ZoneSet& zones,
                    Outbox& out, const ProtocolOptions& options = {});

struct ExitResult {
    Outbox out;
    std::vector<StandardMessage> accepted;
};

// True iff the EXIT guard holds for the Wait entry (s, m, from).
bool exit_condition(const NodeState& state, const StandardMessage& msg, NodeIndex from,
                    const ZoneSet& zones);

// EXIT, iterated to a local fixpoint over all of Wait.
ExitResult try_exit(NodeState& state, const ZoneSet& zones);

// EXIT restricted to the Wait entries of one message; enough after a delivery
// that only touched (s, m).
ExitResult try_exit(NodeState& state, const ZoneSet& zones, const StandardMessage& msg);

}  // namespace czb
