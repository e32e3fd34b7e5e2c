#include "czb/zones.hpp"

#include <algorithm>
#include <ostream>

#include "czb/errors.hpp"

namespace czb {

std::string to_string(const ZoneLabel& label) {
    std::string s = "sqr(" + std::to_string(label.i0) + "," + std::to_string(label.j0) + "," +
                    std::to_string(label.width) + ")";
    if (label.fragment > 0) s += "#" + std::to_string(label.fragment);
    return s;
}

bool ControlZone::in_core(NodeIndex p) const {
    return std::binary_search(core.begin(), core.end(), p);
}

bool ControlZone::in_border(NodeIndex p) const {
    return std::binary_search(border.begin(), border.end(), p);
}

ZoneSet::ZoneSet(std::size_t node_count, std::vector<ControlZone> zones)
    : zones_(std::move(zones)), by_core_(node_count), by_border_(node_count) {
    for (std::size_t k = 0; k < zones_.size(); ++k) {
        ControlZone& z = zones_[k];
        z.id = static_cast<ZoneId>(k);
        std::sort(z.core.begin(), z.core.end());
        std::sort(z.border.begin(), z.border.end());
        for (NodeIndex p : z.core) {
            if (p >= node_count) throw InvalidParameter("zones: core node outside topology");
            by_core_[p].push_back(z.id);
        }
        for (NodeIndex p : z.border) {
            if (p >= node_count) throw InvalidParameter("zones: border node outside topology");
            by_border_[p].push_back(z.id);
        }
        max_border_ = std::max(max_border_, z.border.size());
    }
}

std::span<const ZoneId> ZoneSet::by_core(NodeIndex p) const {
    if (p >= by_core_.size()) return {};
    return by_core_[p];
}

std::span<const ZoneId> ZoneSet::by_border(NodeIndex p) const {
    if (p >= by_border_.size()) return {};
    return by_border_[p];
}

namespace {

int wrap(int x, int side) {
    return ((x - 1) % side + side) % side + 1;
}

// Square laid out on torus coordinates of side N, regardless of topology kind.
ControlZone square_on_torus(int side, int i0, int j0, int width) {
    ControlZone z;
    z.label = {wrap(i0, side), wrap(j0, side), width, 0};
    const int last = width + 1;
    for (int di = 0; di <= last; ++di) {
        for (int dj = 0; dj <= last; ++dj) {
            const int i = wrap(i0 + di, side);
            const int j = wrap(j0 + dj, side);
            const auto p = static_cast<NodeIndex>((i - 1) * side + (j - 1));
            const bool on_perimeter = di == 0 || di == last || dj == 0 || dj == last;
            (on_perimeter ? z.border : z.core).push_back(p);
        }
    }
    std::sort(z.core.begin(), z.core.end());
    std::sort(z.border.begin(), z.border.end());
    return z;
}

void check_width(const Topology& topo, int width) {
    if (width < 1) {
        throw InvalidParameter("zones: width must be >= 1 (got " + std::to_string(width) + ")");
    }
    if (width + 2 > topo.side()) {
        throw InvalidParameter("zones: width + 2 must not exceed N (width " + std::to_string(width) +
                               ", N " + std::to_string(topo.side()) + ")");
    }
}

// Connected components of `nodes` in topo, each sorted, ordered by smallest member.
std::vector<std::vector<NodeIndex>> components(const Topology& topo,
                                               const std::vector<NodeIndex>& nodes) {
    std::vector<std::vector<NodeIndex>> out;
    std::vector<char> seen(nodes.size(), 0);
    const auto position = [&](NodeIndex q) -> std::ptrdiff_t {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), q);
        return (it != nodes.end() && *it == q) ? it - nodes.begin() : -1;
    };
    for (std::size_t start = 0; start < nodes.size(); ++start) {
        if (seen[start]) continue;
        std::vector<NodeIndex> comp;
        std::vector<std::size_t> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            const NodeIndex p = nodes[stack.back()];
            stack.pop_back();
            comp.push_back(p);
            for (NodeIndex q : topo.neighbors(p)) {
                const auto k = position(q);
                if (k >= 0 && !seen[k]) {
                    seen[k] = 1;
                    stack.push_back(static_cast<std::size_t>(k));
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

}  // namespace

ControlZone square_zone(const Topology& topo, int i0, int j0, int width) {
    check_width(topo, width);
    if (topo.kind() == TopologyKind::grid) {
        if (!topo.contains({i0, j0}) || !topo.contains({i0 + width + 1, j0 + width + 1})) {
            throw InvalidParameter("zones: square (" + std::to_string(i0) + "," + std::to_string(j0) +
                                   "," + std::to_string(width) + ") does not fit the grid");
        }
    }
    return square_on_torus(topo.side(), i0, j0, width);
}

ZoneSet ctr_order(const Topology& topo, int order) {
    if (order < 1) {
        throw InvalidParameter("zones: order W must be >= 1 (got " + std::to_string(order) + ")");
    }
    check_width(topo, order);
    const int side = topo.side();
    std::vector<ControlZone> zones;
    zones.reserve(static_cast<std::size_t>(order) * topo.node_count());
    for (int w = 1; w <= order; ++w) {
        for (int i0 = 1; i0 <= side; ++i0) {
            for (int j0 = 1; j0 <= side; ++j0) {
                ControlZone z = square_on_torus(side, i0, j0, w);
                if (topo.kind() == TopologyKind::torus) {
                    zones.push_back(std::move(z));
                } else {
                    for (ControlZone& f : fragment_zone(topo, z)) zones.push_back(std::move(f));
                }
            }
        }
    }
    return ZoneSet(topo.node_count(), std::move(zones));
}

std::vector<ControlZone> fragment_zone(const Topology& grid, const ControlZone& zone) {
    if (validate_zone(grid, zone)) return {zone};

    std::vector<NodeIndex> core = zone.core;
    std::vector<NodeIndex> border = zone.border;
    std::sort(core.begin(), core.end());
    std::sort(border.begin(), border.end());
    const auto core_parts = components(grid, core);
    const auto border_parts = components(grid, border);

    std::vector<ControlZone> out;
    int ordinal = 0;
    for (const auto& part : core_parts) {
        ++ordinal;
        ControlZone frag;
        frag.label = zone.label;
        frag.label.fragment = ordinal;
        frag.core = part;
        // Border pieces touching this core component; the grid boundary closes
        // the rest of the cut.
        for (const auto& piece : border_parts) {
            const bool touches = std::any_of(piece.begin(), piece.end(), [&](NodeIndex b) {
                const auto nb = grid.neighbors(b);
                return std::any_of(nb.begin(), nb.end(), [&](NodeIndex q) {
                    return std::binary_search(part.begin(), part.end(), q);
                });
            });
            if (touches) frag.border.insert(frag.border.end(), piece.begin(), piece.end());
        }
        std::sort(frag.border.begin(), frag.border.end());
        if (validate_zone(grid, frag)) out.push_back(std::move(frag));
    }
    return out;
}

bool validate_zone(const Topology& topo, const ControlZone& zone) {
    if (zone.core.empty() || zone.border.empty()) return false;
    for (NodeIndex p : zone.core) {
        if (p >= topo.node_count()) return false;
        if (std::find(zone.border.begin(), zone.border.end(), p) != zone.border.end()) return false;
    }
    for (NodeIndex p : zone.border) {
        if (p >= topo.node_count()) return false;
    }
    return is_connected(topo, zone.core) && is_connected(topo, zone.border) &&
           isolates(topo, zone.border, zone.core);
}

std::span<const ZoneId> my_ctr(const ZoneSet& zones, NodeIndex p) {
    return zones.by_border(p);
}

void write_zones(std::ostream& out, const Topology& topo, const ZoneSet& zones) {
    const auto list = [&](const std::vector<NodeIndex>& nodes) {
        out << '[';
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (k) out << ' ';
            out << to_string(topo.coord(nodes[k]));
        }
        out << ']';
    };
    for (const ControlZone& z : zones.zones()) {
        out << "zone " << z.id << ": core=";
        list(z.core);
        out << " border=";
        list(z.border);
        out << '\n';
    }
}

}  // namespace czb
