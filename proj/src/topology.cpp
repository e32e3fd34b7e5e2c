#include "czb/topology.hpp"

#include <algorithm>
#include <ostream>

#include "czb/errors.hpp"

namespace czb {

std::string to_string(Coord c) {
    return std::to_string(c.i) + "," + std::to_string(c.j);
}

const char* to_string(TopologyKind kind) {
    return kind == TopologyKind::torus ? "torus" : "grid";
}

NodeSet::NodeSet(std::size_t universe, std::span<const NodeIndex> members) : bits_(universe, 0) {
    for (NodeIndex p : members) {
        if (p >= universe) {
            throw InvalidParameter("topology: node " + std::to_string(p) + " outside universe of " +
                                   std::to_string(universe));
        }
        insert(p);
    }
}

NodeSet NodeSet::all(std::size_t universe) {
    NodeSet s;
    s.bits_.assign(universe, 1);
    s.count_ = universe;
    return s;
}

bool NodeSet::insert(NodeIndex p) {
    if (bits_[p]) return false;
    bits_[p] = 1;
    ++count_;
    return true;
}

bool NodeSet::erase(NodeIndex p) {
    if (p >= bits_.size() || !bits_[p]) return false;
    bits_[p] = 0;
    --count_;
    return true;
}

std::vector<NodeIndex> NodeSet::members() const {
    std::vector<NodeIndex> out;
    out.reserve(count_);
    for (std::size_t p = 0; p < bits_.size(); ++p) {
        if (bits_[p]) out.push_back(static_cast<NodeIndex>(p));
    }
    return out;
}

NodeSet NodeSet::intersection(const NodeSet& other) const {
    NodeSet out(bits_.size());
    const std::size_t n = std::min(bits_.size(), other.bits_.size());
    for (std::size_t p = 0; p < n; ++p) {
        if (bits_[p] && other.bits_[p]) out.insert(static_cast<NodeIndex>(p));
    }
    return out;
}

NodeSet NodeSet::complement() const {
    NodeSet out(bits_.size());
    for (std::size_t p = 0; p < bits_.size(); ++p) {
        if (!bits_[p]) out.insert(static_cast<NodeIndex>(p));
    }
    return out;
}

bool NodeSet::intersects(const NodeSet& other) const {
    const std::size_t n = std::min(bits_.size(), other.bits_.size());
    for (std::size_t p = 0; p < n; ++p) {
        if (bits_[p] && other.bits_[p]) return true;
    }
    return false;
}

bool NodeSet::is_subset_of(const NodeSet& other) const {
    for (std::size_t p = 0; p < bits_.size(); ++p) {
        if (bits_[p] && !other.contains(static_cast<NodeIndex>(p))) return false;
    }
    return true;
}

Topology::Topology(TopologyKind kind, int side) : kind_(kind), side_(side) {
    const bool wrap = kind == TopologyKind::torus;
    const std::size_t n = node_count();
    offsets_.reserve(n + 1);
    adjacency_.reserve(4 * n);
    offsets_.push_back(0);
    for (int i = 1; i <= side; ++i) {
        for (int j = 1; j <= side; ++j) {
            // up, down, left, right
            const Coord candidates[4] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (Coord c : candidates) {
                if (wrap) {
                    c.i = (c.i + side - 1) % side + 1;
                    c.j = (c.j + side - 1) % side + 1;
                } else if (!contains(c)) {
                    continue;
                }
                adjacency_.push_back(index(c));
            }
            offsets_.push_back(static_cast<std::uint32_t>(adjacency_.size()));
        }
    }
}

NodeIndex Topology::index(Coord c) const {
    if (!contains(c)) {
        throw InvalidParameter("topology: coordinate (" + to_string(c) + ") outside 1.." +
                               std::to_string(side_));
    }
    return static_cast<NodeIndex>((c.i - 1) * side_ + (c.j - 1));
}

Coord Topology::coord(NodeIndex p) const {
    return {static_cast<int>(p) / side_ + 1, static_cast<int>(p) % side_ + 1};
}

std::span<const NodeIndex> Topology::neighbors(NodeIndex p) const {
    return {adjacency_.data() + offsets_[p], adjacency_.data() + offsets_[p + 1]};
}

std::size_t Topology::max_degree() const {
    std::size_t d = 0;
    for (std::size_t p = 0; p + 1 < offsets_.size(); ++p) {
        d = std::max<std::size_t>(d, offsets_[p + 1] - offsets_[p]);
    }
    return d;
}

bool Topology::adjacent(NodeIndex a, NodeIndex b) const {
    const auto nb = neighbors(a);
    return std::find(nb.begin(), nb.end(), b) != nb.end();
}

Topology build_torus(int side) {
    if (side < 3) {
        throw InvalidParameter("topology: torus side must be >= 3 (got " + std::to_string(side) + ")");
    }
    return Topology(TopologyKind::torus, side);
}

Topology build_grid(int side) {
    if (side < 2) {
        throw InvalidParameter("topology: grid side must be >= 2 (got " + std::to_string(side) + ")");
    }
    return Topology(TopologyKind::grid, side);
}

Topology build_topology(TopologyKind kind, int side) {
    return kind == TopologyKind::torus ? build_torus(side) : build_grid(side);
}

namespace {

void check_members(const Topology& topo, std::span<const NodeIndex> nodes) {
    for (NodeIndex p : nodes) {
        if (p >= topo.node_count()) {
            throw InvalidParameter("topology: unknown node " + std::to_string(p));
        }
    }
}

std::vector<NodeIndex> sorted_unique(std::span<const NodeIndex> nodes) {
    std::vector<NodeIndex> v(nodes.begin(), nodes.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

bool is_connected(const Topology& topo, std::span<const NodeIndex> nodes) {
    check_members(topo, nodes);
    if (nodes.size() <= 1) return true;
    const std::vector<NodeIndex> in = sorted_unique(nodes);
    std::vector<char> seen(in.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const NodeIndex p = in[stack.back()];
        stack.pop_back();
        for (NodeIndex q : topo.neighbors(p)) {
            const auto it = std::lower_bound(in.begin(), in.end(), q);
            if (it == in.end() || *it != q) continue;
            const auto k = static_cast<std::size_t>(it - in.begin());
            if (!seen[k]) {
                seen[k] = 1;
                ++reached;
                stack.push_back(k);
            }
        }
    }
    return reached == in.size();
}

bool isolates(const Topology& topo, std::span<const NodeIndex> border,
              std::span<const NodeIndex> core) {
    check_members(topo, border);
    check_members(topo, core);
    const std::vector<NodeIndex> b = sorted_unique(border);
    const std::vector<NodeIndex> c = sorted_unique(core);
    const auto has = [](const std::vector<NodeIndex>& v, NodeIndex p) {
        return std::binary_search(v.begin(), v.end(), p);
    };
    for (NodeIndex p : c) {
        if (has(b, p)) throw InvalidParameter("topology: border and core overlap");
    }
    // With the border removed, outside nodes reach the core iff some core node
    // has a neighbor that is neither core nor border.
    for (NodeIndex p : c) {
        for (NodeIndex q : topo.neighbors(p)) {
            if (!has(c, q) && !has(b, q)) return false;
        }
    }
    return true;
}

void write_adjacency(std::ostream& out, const Topology& topo) {
    for (NodeIndex p = 0; p < topo.node_count(); ++p) {
        out << to_string(topo.coord(p)) << ":";
        for (NodeIndex q : topo.neighbors(p)) out << ' ' << to_string(topo.coord(q));
        out << '\n';
    }
}

}  // namespace czb
