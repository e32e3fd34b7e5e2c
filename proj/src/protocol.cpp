#include "czb/protocol.hpp"

#include <algorithm>

namespace czb {

bool NodeState::waiting(const StandardMessage& m, NodeIndex from) const {
    const auto it = wait.find(m);
    return it != wait.end() && std::find(it->second.begin(), it->second.end(), from) != it->second.end();
}

std::size_t NodeState::wait_size() const {
    std::size_t n = 0;
    for (const auto& [msg, senders] : wait) n += senders.size();
    return n;
}

namespace {

// Accepts msg: Acc, standard broadcast, one authorization per zone of my_ctr
// not already relayed, and Wait cleanup.
void accept(NodeState& state, const StandardMessage& msg, ExitResult& result) {
    state.acc.insert(msg);
    result.out.emplace_back(msg);
    for (ZoneId z : state.my_ctr) {
        const AuthMessage a{msg.source, msg.payload, z};
        if (state.auth.insert(a).second) result.out.emplace_back(a);
    }
    result.accepted.push_back(msg);
}

bool any_sender_passes(const NodeState& state, const StandardMessage& msg,
                       const std::vector<NodeIndex>& senders, const ZoneSet& zones) {
    return std::any_of(senders.begin(), senders.end(),
                       [&](NodeIndex q) { return exit_condition(state, msg, q, zones); });
}

}  // namespace

InitResult init_node(NodeIndex p, Payload m0, std::span<const ZoneId> my_ctr) {
    InitResult r;
    r.state.self = p;
    r.state.m0 = m0;
    r.state.my_ctr.assign(my_ctr.begin(), my_ctr.end());
    std::sort(r.state.my_ctr.begin(), r.state.my_ctr.end());
    const StandardMessage own{p, m0};
    r.state.acc.insert(own);
    r.out.emplace_back(own);
    for (ZoneId z : r.state.my_ctr) {
        const AuthMessage a{p, m0, z};
        r.state.auth.insert(a);
        r.out.emplace_back(a);
    }
    return r;
}

bool on_standard(NodeState& state, const StandardMessage& msg, NodeIndex from) {
    if (state.accepted(msg)) return false;
    auto& senders = state.wait[msg];
    if (std::find(senders.begin(), senders.end(), from) != senders.end()) return false;
    senders.push_back(from);
    return true;
}

AuthOutcome on_auth(NodeState& state, const AuthMessage& msg, NodeIndex from, const ZoneSet& zones,
                    Outbox& out, const ProtocolOptions& options) {
    if (!zones.contains(msg.zone)) return AuthOutcome::unknown_zone;
    if (state.authorized(msg)) return AuthOutcome::duplicate;
    const ControlZone& z = zones.zone(msg.zone);
    if (!z.in_border(from)) return AuthOutcome::foreign_sender;
    if (options.diff == DiffForwarding::border_only &&
        !std::binary_search(state.my_ctr.begin(), state.my_ctr.end(), msg.zone)) {
        return AuthOutcome::not_on_border;
    }
    state.auth.insert(msg);
    out.emplace_back(msg);
    return AuthOutcome::stored;
}

bool exit_condition(const NodeState& state, const StandardMessage& msg, NodeIndex from,
                    const ZoneSet& zones) {
    for (ZoneId id : state.my_ctr) {
        const ControlZone& z = zones.zone(id);
        if (z.in_core(from) && !z.in_core(msg.source) &&
            !state.authorized({msg.source, msg.payload, id})) {
            return false;
        }
    }
    return true;
}

ExitResult try_exit(NodeState& state, const ZoneSet& zones) {
    ExitResult result;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = state.wait.begin(); it != state.wait.end();) {
            if (!state.accepted(it->first) && any_sender_passes(state, it->first, it->second, zones)) {
                const StandardMessage msg = it->first;
                it = state.wait.erase(it);
                accept(state, msg, result);
                changed = true;
            } else {
                ++it;
            }
        }
    }
    return result;
}

ExitResult try_exit(NodeState& state, const ZoneSet& zones, const StandardMessage& msg) {
    ExitResult result;
    const auto it = state.wait.find(msg);
    if (it == state.wait.end()) return result;
    if (state.accepted(msg)) {
        state.wait.erase(it);
        return result;
    }
    if (any_sender_passes(state, msg, it->second, zones)) {
        state.wait.erase(it);
        accept(state, msg, result);
    }
    return result;
}

}  // namespace czb
