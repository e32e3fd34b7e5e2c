#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include "czb/errors.hpp"
#include "czb/zones.hpp"

using namespace czb;

namespace {

std::set<Coord> as_coords(const Topology& t, const std::vector<NodeIndex>& nodes) {
    std::set<Coord> out;
    for (NodeIndex p : nodes) out.insert(t.coord(p));
    return out;
}

// Reference perimeter/core of a square, by direct definition over torus coordinates.
std::pair<std::set<Coord>, std::set<Coord>> square_oracle(int n, int i0, int j0, int w) {
    std::set<Coord> core, border;
    auto wrap = [n](int x) { return ((x - 1) % n + n) % n + 1; };
    for (int i = i0; i <= i0 + w + 1; ++i) {
        for (int j = j0; j <= j0 + w + 1; ++j) {
            Coord c{wrap(i), wrap(j)};
            if (i == i0 || i == i0 + w + 1 || j == j0 || j == j0 + w + 1) {
                border.insert(c);
            } else {
                core.insert(c);
            }
        }
    }
    return {core, border};
}

bool uses_only_grid_edges(const Topology& grid, const std::vector<NodeIndex>& nodes) {
    return is_connected(grid, nodes);
}

}  // namespace

TEST(SquareZone, WidthThreeBorderHasSixteenNodes) {
    Topology t = build_torus(10);
    ControlZone z = square_zone(t, 1, 1, 3);
    EXPECT_EQ(z.border.size(), 16u);
    EXPECT_EQ(z.core.size(), 9u);
}

TEST(SquareZone, WidthOneAroundSingleCore) {
    Topology t = build_torus(10);
    ControlZone z = square_zone(t, 1, 1, 1);
    EXPECT_EQ(as_coords(t, z.core), (std::set<Coord>{{2, 2}}));
    std::set<Coord> expected{{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 3}, {3, 1}, {3, 2}, {3, 3}};
    EXPECT_EQ(as_coords(t, z.border), expected);
}

TEST(SquareZone, CoreWrapsAroundCorner) {
    Topology t = build_torus(10);
    ControlZone z = square_zone(t, 9, 9, 2);
    std::set<Coord> expected{{10, 10}, {10, 1}, {1, 10}, {1, 1}};
    EXPECT_EQ(as_coords(t, z.core), expected);
    EXPECT_EQ(z.border.size(), 12u);
    EXPECT_TRUE(validate_zone(t, z));
}

TEST(SquareZone, MatchesDefinitionEverywhere) {
    Topology t = build_torus(7);
    for (int w = 1; w <= 5; ++w) {
        for (int i0 = 1; i0 <= 7; ++i0) {
            for (int j0 = 1; j0 <= 7; ++j0) {
                ControlZone z = square_zone(t, i0, j0, w);
                auto [core, border] = square_oracle(7, i0, j0, w);
                EXPECT_EQ(as_coords(t, z.core), core);
                EXPECT_EQ(as_coords(t, z.border), border);
                EXPECT_EQ(z.border.size(), static_cast<std::size_t>(4 * (w + 1)));
                EXPECT_EQ(z.core.size(), static_cast<std::size_t>(w * w));
            }
        }
    }
}

TEST(SquareZone, RejectsOversizedOrNonPositiveWidth) {
    Topology t = build_torus(10);
    EXPECT_THROW(square_zone(t, 1, 1, 9), InvalidParameter);
    EXPECT_NO_THROW(square_zone(t, 1, 1, 8));
    EXPECT_THROW(square_zone(t, 1, 1, 0), InvalidParameter);
    Topology g = build_grid(10);
    EXPECT_THROW(square_zone(g, 9, 9, 2), InvalidParameter);
    EXPECT_NO_THROW(square_zone(g, 7, 7, 2));
}

TEST(CtrOrder, TorusCounts) {
    Topology t = build_torus(10);
    ZoneSet z1 = ctr_order(t, 1);
    EXPECT_EQ(z1.size(), 100u);
    for (const ControlZone& z : z1.zones()) EXPECT_EQ(z.core.size(), 1u);
    EXPECT_EQ(ctr_order(t, 3).size(), 300u);
    EXPECT_EQ(ctr_order(build_torus(100), 3).size(), 30'000u);
}

TEST(CtrOrder, RejectsBadOrders) {
    Topology t = build_torus(5);
    EXPECT_THROW(ctr_order(t, 4), InvalidParameter);
    EXPECT_THROW(ctr_order(t, 0), InvalidParameter);
    EXPECT_NO_THROW(ctr_order(t, 3));
}

TEST(CtrOrder, EveryTorusZoneValidWithExactSizes) {
    for (int n : {5, 8}) {
        Topology t = build_torus(n);
        ZoneSet zs = ctr_order(t, 3);
        EXPECT_EQ(zs.size(), static_cast<std::size_t>(n * n * 3));
        for (const ControlZone& z : zs.zones()) {
            EXPECT_TRUE(validate_zone(t, z)) << to_string(z.label);
            const int w = z.label.width;
            EXPECT_EQ(z.border.size(), static_cast<std::size_t>(4 * (w + 1)));
            EXPECT_EQ(z.core.size(), static_cast<std::size_t>(w * w));
        }
    }
}

TEST(CtrOrder, IndexCoherence) {
    for (TopologyKind kind : {TopologyKind::torus, TopologyKind::grid}) {
        Topology t = build_topology(kind, 7);
        ZoneSet zs = ctr_order(t, 2);
        for (NodeIndex p = 0; p < t.node_count(); ++p) {
            for (const ControlZone& z : zs.zones()) {
                const auto bc = zs.by_core(p);
                const auto bb = zs.by_border(p);
                EXPECT_EQ(z.in_core(p), std::find(bc.begin(), bc.end(), z.id) != bc.end());
                EXPECT_EQ(z.in_border(p), std::find(bb.begin(), bb.end(), z.id) != bb.end());
            }
        }
        for (std::size_t k = 0; k < zs.size(); ++k) EXPECT_EQ(zs.zone(static_cast<ZoneId>(k)).id, k);
    }
}

TEST(CtrOrder, GridFragmentsValidAndNeverUseWrapEdges) {
    for (int n : {6, 10}) {
        Topology g = build_grid(n);
        for (int w = 1; w <= 3; ++w) {
            ZoneSet zs = ctr_order(g, w);
            for (const ControlZone& z : zs.zones()) {
                EXPECT_TRUE(validate_zone(g, z)) << to_string(z.label);
                EXPECT_TRUE(uses_only_grid_edges(g, z.core));
                EXPECT_TRUE(uses_only_grid_edges(g, z.border));
            }
        }
    }
}

TEST(CtrOrder, GridOrderOneKeepsClippedSeamZones) {
    // A width-1 core is one node; the seam only clips its border, and the grid
    // boundary closes the cut, so every anchor survives with a smaller border.
    Topology g = build_grid(10);
    ZoneSet zs = ctr_order(g, 1);
    EXPECT_EQ(zs.size(), 100u);
    std::size_t clipped = 0;
    for (const ControlZone& z : zs.zones()) {
        if (z.border.size() < 8) ++clipped;
    }
    // Cores on the outer ring of the grid: 4 * (10 - 1).
    EXPECT_EQ(clipped, 36u);
}

TEST(CtrOrder, GridWiderOrdersSplitSeamZones) {
    Topology g = build_grid(10);
    ZoneSet zs = ctr_order(g, 2);
    std::size_t fragments = 0;
    for (const ControlZone& z : zs.zones()) {
        if (z.label.width == 2 && z.label.fragment > 0) ++fragments;
    }
    EXPECT_GT(fragments, 0u);
}

TEST(FragmentZone, InteriorZoneUnchanged) {
    Topology t = build_torus(10);
    Topology g = build_grid(10);
    ControlZone z = square_zone(t, 3, 3, 2);
    auto frags = fragment_zone(g, z);
    ASSERT_EQ(frags.size(), 1u);
    EXPECT_EQ(frags[0].core, z.core);
    EXPECT_EQ(frags[0].border, z.border);
    EXPECT_EQ(frags[0].label.fragment, 0);
}

TEST(FragmentZone, LeftRightSeamGivesTwo) {
    Topology t = build_torus(10);
    Topology g = build_grid(10);
    ControlZone z = square_zone(t, 4, 9, 2);  // core columns 10 and 1
    auto frags = fragment_zone(g, z);
    ASSERT_EQ(frags.size(), 2u);
    for (const ControlZone& f : frags) {
        EXPECT_EQ(f.core.size(), 2u);
        EXPECT_TRUE(validate_zone(g, f));
    }
    EXPECT_EQ(frags[0].label.fragment, 1);
    EXPECT_EQ(frags[1].label.fragment, 2);
}

TEST(FragmentZone, CornerSeamGivesFour) {
    Topology t = build_torus(10);
    Topology g = build_grid(10);
    ControlZone z = square_zone(t, 9, 9, 2);  // core straddles both seams
    auto frags = fragment_zone(g, z);
    EXPECT_EQ(frags.size(), 4u);
    std::set<Coord> cores;
    for (const ControlZone& f : frags) {
        ASSERT_EQ(f.core.size(), 1u);
        cores.insert(g.coord(f.core[0]));
        EXPECT_TRUE(validate_zone(g, f));
    }
    EXPECT_EQ(cores, (std::set<Coord>{{10, 10}, {10, 1}, {1, 10}, {1, 1}}));
}

TEST(ValidateZone, DeletedBorderNodeLeaks) {
    Topology t = build_torus(10);
    ControlZone z = square_zone(t, 2, 2, 2);
    EXPECT_TRUE(validate_zone(t, z));
    ControlZone broken = z;
    // Remove an edge-adjacent perimeter node (not a corner).
    broken.border.erase(std::find(broken.border.begin(), broken.border.end(), t.index({2, 3})));
    EXPECT_FALSE(validate_zone(t, broken));
}

TEST(ValidateZone, LShapedGridEdgeFragment) {
    Topology g = build_grid(8);
    ControlZone z;
    z.core = {g.index({1, 4})};
    z.border = {g.index({1, 3}), g.index({1, 5}), g.index({2, 3}), g.index({2, 4}), g.index({2, 5})};
    std::sort(z.border.begin(), z.border.end());
    EXPECT_TRUE(validate_zone(g, z));
}

TEST(ValidateZone, RejectsDegenerateZones) {
    Topology t = build_torus(6);
    ControlZone empty;
    EXPECT_FALSE(validate_zone(t, empty));
    ControlZone overlap = square_zone(t, 1, 1, 1);
    overlap.border.push_back(overlap.core[0]);
    std::sort(overlap.border.begin(), overlap.border.end());
    EXPECT_FALSE(validate_zone(t, overlap));
}

TEST(MyCtr, WidthOneCentralNodeHasEight) {
    Topology t = build_torus(10);
    ZoneSet zs = ctr_order(t, 1);
    EXPECT_EQ(my_ctr(zs, t.index({5, 5})).size(), 8u);
}

TEST(MyCtr, EmptyZoneSet) {
    ZoneSet zs(100, {});
    EXPECT_TRUE(my_ctr(zs, 5).empty());
}

TEST(MyCtr, OrderThreeIsThirtySixEverywhere) {
    Topology t = build_torus(100);
    ZoneSet zs = ctr_order(t, 3);
    for (NodeIndex p = 0; p < t.node_count(); ++p) ASSERT_EQ(my_ctr(zs, p).size(), 36u);
    EXPECT_EQ(zs.max_border_size(), 16u);
}

TEST(WriteZones, DumpFormat) {
    Topology t = build_torus(3);
    ZoneSet zs(t.node_count(), {square_zone(t, 1, 1, 1)});
    std::ostringstream out;
    write_zones(out, t, zs);
    EXPECT_EQ(out.str(), "zone 0: core=[2,2] border=[1,1 1,2 1,3 2,1 2,3 3,1 3,2 3,3]\n");
}

TEST(ZoneLabelTest, ToString) {
    EXPECT_EQ(to_string(ZoneLabel{3, 4, 2, 0}), "sqr(3,4,2)");
    EXPECT_EQ(to_string(ZoneLabel{3, 4, 2, 1}), "sqr(3,4,2)#1");
}
