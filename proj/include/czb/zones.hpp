#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "czb/topology.hpp"

namespace czb {

using ZoneId = std::uint32_t;

// Deterministic provenance of a zone: the square it was cut from and, for
// grid fragments, the 1-based ordinal of its core component (0 = whole square).
struct ZoneLabel {
    int i0 = 0;
    int j0 = 0;
    int width = 0;
    int fragment = 0;

    bool operator==(const ZoneLabel&) const = default;
};

std::string to_string(const ZoneLabel& label);

// A (core, border) pair. Both node lists are kept sorted ascending.
struct ControlZone {
    ZoneId id = 0;
    ZoneLabel label;
    std::vector<NodeIndex> core;
    std::vector<NodeIndex> border;

    bool in_core(NodeIndex p) const;
    bool in_border(NodeIndex p) const;
};

// Indexed, immutable collection of control zones. Zone ids are positions in
// the collection.
class ZoneSet {
public:
    ZoneSet() = default;
    ZoneSet(std::size_t node_count, std::vector<ControlZone> zones);

    std::size_t size() const { return zones_.size(); }
    bool empty() const { return zones_.empty(); }
    bool contains(ZoneId z) const { return z < zones_.size(); }
    const ControlZone& zone(ZoneId z) const { return zones_.at(z); }
    std::span<const ControlZone> zones() const { return zones_; }

    std::span<const ZoneId> by_core(NodeIndex p) const;
    std::span<const ZoneId> by_border(NodeIndex p) const;

    // Largest border cardinality.
    std::size_t max_border_size() const { return max_border_; }

private:
    std::vector<ControlZone> zones_;
    std::vector<std::vector<ZoneId>> by_core_;
    std::vector<std::vector<ZoneId>> by_border_;
    std::size_t max_border_ = 0;
};

// Square zone anchored at its upper-left border node (i0, j0): a w x w core
// inside a (w+2) x (w+2) perimeter. Coordinates wrap modulo N on a torus; on a
// grid the square must fit inside the grid.
ControlZone square_zone(const Topology& topo, int i0, int j0, int width);

// All square zones of widths 1..W at every anchor. On a grid the torus family
// is fragmented by the edge cut and only valid fragments are kept.
ZoneSet ctr_order(const Topology& topo, int order);

// Splits a zone built on the companion torus along the grid edge cut. Returns
// the zone unchanged when it is already valid on the grid.
std::vector<ControlZone> fragment_zone(const Topology& grid, const ControlZone& zone);

// Disjoint non-empty core and border, each connected, border isolates core.
bool validate_zone(const Topology& topo, const ControlZone& zone);

// Zones whose border contains p.
std::span<const ZoneId> my_ctr(const ZoneSet& zones, NodeIndex p);

// "zone <id>: core=[i,j ...] border=[i,j ...]" per zone.
void write_zones(std::ostream& out, const Topology& topo, const ZoneSet& zones);

}  // namespace czb
