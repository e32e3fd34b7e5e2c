#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace czb {

// Dense node identifier: (i-1)*N + (j-1).
using NodeIndex = std::uint32_t;

// 1-based (row, column) coordinate of a node.
struct Coord {
    int i = 1;
    int j = 1;

    auto operator<=>(const Coord&) const = default;
};

std::string to_string(Coord c);

enum class TopologyKind { torus, grid };

const char* to_string(TopologyKind kind);

// Membership bitmap over the nodes of one topology.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(std::size_t universe) : bits_(universe, 0) {}
    NodeSet(std::size_t universe, std::span<const NodeIndex> members);

    static NodeSet all(std::size_t universe);

    bool contains(NodeIndex p) const { return p < bits_.size() && bits_[p] != 0; }
    bool insert(NodeIndex p);
    bool erase(NodeIndex p);

    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }
    std::size_t universe() const { return bits_.size(); }

    // Members in ascending order.
    std::vector<NodeIndex> members() const;

    NodeSet intersection(const NodeSet& other) const;
    NodeSet complement() const;
    bool intersects(const NodeSet& other) const;
    bool is_subset_of(const NodeSet& other) const;

    bool operator==(const NodeSet& other) const { return bits_ == other.bits_; }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

// N x N torus or grid. Immutable after construction.
class Topology {
public:
    TopologyKind kind() const { return kind_; }
    int side() const { return side_; }
    std::size_t node_count() const { return static_cast<std::size_t>(side_) * side_; }

    bool contains(Coord c) const { return c.i >= 1 && c.i <= side_ && c.j >= 1 && c.j <= side_; }
    NodeIndex index(Coord c) const;
    Coord coord(NodeIndex p) const;

    // Neighbors in the fixed order up, down, left, right (absent ones skipped).
    std::span<const NodeIndex> neighbors(NodeIndex p) const;
    std::size_t degree(NodeIndex p) const { return neighbors(p).size(); }
    std::size_t max_degree() const;
    bool adjacent(NodeIndex a, NodeIndex b) const;

private:
    friend Topology build_torus(int side);
    friend Topology build_grid(int side);
    Topology(TopologyKind kind, int side);

    TopologyKind kind_;
    int side_;
    std::vector<std::uint32_t> offsets_;
    std::vector<NodeIndex> adjacency_;
};

// Throws InvalidParameter for side < 3.
Topology build_torus(int side);
// Throws InvalidParameter for side < 2.
Topology build_grid(int side);
Topology build_topology(TopologyKind kind, int side);

// True iff the subgraph induced by `nodes` is connected. Empty and singleton
// sets are connected.
bool is_connected(const Topology& topo, std::span<const NodeIndex> nodes);

// True iff, once `border` is removed, no node of `core` can be reached from a
// node outside core and border. Throws InvalidParameter if the sets overlap.
bool isolates(const Topology& topo, std::span<const NodeIndex> border,
              std::span<const NodeIndex> core);

// One line per node: "i,j: i1,j1 i2,j2 ...".
void write_adjacency(std::ostream& out, const Topology& topo);

}  // namespace czb
