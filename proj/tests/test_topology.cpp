#include <gtest/gtest.h>

#include <cmath>
#include <deque>

#include "fpx/rng.hpp"
#include "fpx/scene.hpp"
#include "fpx/topology.hpp"

using namespace fpx;

namespace {

// O(n^2) nearest-obstacle scan; the ring just outside the map counts as
// obstacle, as do Occupied and Unknown cells.
std::vector<double> edt_oracle(const GridMap& m) {
    std::vector<CellIndex> obstacles;
    for (int r = -1; r <= m.height(); ++r)
        for (int c = -1; c <= m.width(); ++c)
            if (!m.in_bounds(r, c) || m.at(r, c) != CellState::Free) obstacles.push_back({r, c});
    std::vector<double> out(m.size());
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) {
            long best = std::numeric_limits<long>::max();
            for (const CellIndex o : obstacles)
                best = std::min(best, long(o.row - r) * (o.row - r) + long(o.col - c) * (o.col - c));
            out[m.index({r, c})] = std::sqrt(static_cast<double>(best));
        }
    return out;
}

GridMap random_map(Rng& rng, int w, int h, double p_free) {
    GridMap m(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (rng.unit() < p_free) m.set(r, c, CellState::Free);
            else if (rng.below(2)) m.set(r, c, CellState::Occupied);
        }
    return m;
}

DistanceField quadratic(double a, double b) {  // D = 5 + a u^2 + b v^2 around (20, 20)
    DistanceField D{41, 41, std::vector<double>(41 * 41)};
    for (int r = 0; r < 41; ++r)
        for (int c = 0; c < 41; ++c) D.values[r * 41 + c] = 5.0 + a * (c - 20) * (c - 20) + b * (r - 20) * (r - 20);
    return D;
}

// Rooms laid out as a 1-row strip by the synthetic generator.
RoomGraph strip_graph(std::uint64_t seed, int n) { return segment_map(generate_synthetic_floorplan(seed, n, 1).floorplan); }

void check_graph_invariants(const GridMap& map, const RoomGraph& g) {
    ASSERT_EQ(static_cast<int>(g.adjacency.size()), g.rooms);
    for (int a = 1; a <= g.rooms; ++a) {
        EXPECT_FALSE(g.adjacent(a, a));
        for (int b = 1; b <= g.rooms; ++b) EXPECT_EQ(g.adjacent(a, b), g.adjacent(b, a));
    }
    for (int id = 1; id <= g.rooms; ++id) {
        const auto [labels, n] = label_components(
            g.width, g.height, [&](CellIndex c) { return g.label(c) == id; }, 4);
        EXPECT_EQ(n, 1) << "room " << id << " is not one 4-connected region";
    }
    for (int d = 1; d <= g.doors; ++d) EXPECT_NE(std::find(g.seg.begin(), g.seg.end(), -d), g.seg.end());
    for (std::size_t i = 0; i < g.seg.size(); ++i) {
        EXPECT_GE(g.seg[i], -g.doors);
        EXPECT_LE(g.seg[i], g.rooms);
        if (g.seg[i] != 0) { EXPECT_EQ(map.bytes()[i], 255); }
    }
}

}  // namespace

TEST(DistanceTransform, CollinearStrip) {
    GridMap m(7, 21, 0.2, {0, 0}, CellState::Free);
    for (int r = 0; r < 21; ++r) m.set(r, 0, CellState::Occupied);
    const DistanceField D = distance_transform(m);
    EXPECT_EQ(D.at(10, 0), 0.0);
    EXPECT_EQ(D.at(10, 1), 1.0);
    EXPECT_EQ(D.at(10, 2), 2.0);
}

TEST(DistanceTransform, SmallOpenMapMeasuresToBorder) {
    const GridMap m(3, 3, 0.2, {0, 0}, CellState::Free);
    EXPECT_EQ(distance_transform(m).at(1, 1), 2.0);
    EXPECT_EQ(distance_transform(m).at(0, 0), 1.0);
}

TEST(DistanceTransform, MatchesBruteForceExactly) {
    Rng rng(2024);
    for (int t = 0; t < 60; ++t) {
        const int w = 1 + static_cast<int>(rng.below(64)), h = 1 + static_cast<int>(rng.below(64));
        const GridMap m = random_map(rng, w, h, 0.5 + 0.5 * rng.unit());
        const DistanceField D = distance_transform(m);
        EXPECT_EQ(D.values, edt_oracle(m)) << w << "x" << h;
    }
}

TEST(DistanceTransform, IsOneLipschitzAndZeroOnObstacles) {
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const GridMap m = random_map(rng, 40, 30, 0.85);
        const DistanceField D = distance_transform(m);
        for (int r = 0; r < 30; ++r)
            for (int c = 0; c < 40; ++c) {
                EXPECT_EQ(D.at(r, c) == 0.0, m.at(r, c) != CellState::Free);
                if (c + 1 < 40) { EXPECT_LE(std::abs(D.at(r, c) - D.at(r, c + 1)), 1.0 + 1e-12); }
                if (r + 1 < 30) { EXPECT_LE(std::abs(D.at(r, c) - D.at(r + 1, c)), 1.0 + 1e-12); }
            }
    }
}

TEST(CriticalPoints, QuadraticSaddle) {
    const DistanceField D = quadratic(-0.5, 0.5);
    const Hessian raw = hessian_at(D.values, 41, 20, 20);
    EXPECT_DOUBLE_EQ(raw.duu, -1.0);
    EXPECT_DOUBLE_EQ(raw.dvv, 1.0);
    EXPECT_DOUBLE_EQ(raw.duv, 0.0);
    EXPECT_DOUBLE_EQ(raw.det(), -1.0);
    // A symmetric blur shifts a quadratic by a constant only.
    const Hessian smooth = hessian_at(gaussian_smooth(D, 0.5), 41, 20, 20);
    EXPECT_NEAR(smooth.det(), -1.0, 1e-9);

    CriticalPointParams p;
    p.sigma = 0;
    const CriticalPoints cp = detect_critical_points(D, p);
    EXPECT_EQ(cp.saddles, (std::vector<CellIndex>{{20, 20}}));
    EXPECT_TRUE(cp.maxima.empty());
}

TEST(CriticalPoints, QuadraticMaximum) {
    const CriticalPoints cp = detect_critical_points(quadratic(-0.5, -0.5));
    EXPECT_EQ(cp.maxima, (std::vector<CellIndex>{{20, 20}}));
    EXPECT_TRUE(cp.saddles.empty());
}

TEST(CriticalPoints, StraightCorridorHasNoSaddles) {
    GridMap m(200, 9, 0.2, {0, 0}, CellState::Free);
    for (int c = 0; c < 200; ++c) {
        m.set(0, c, CellState::Occupied);
        m.set(8, c, CellState::Occupied);
    }
    const CriticalPoints cp = detect_critical_points(distance_transform(m));
    EXPECT_TRUE(cp.saddles.empty());
    for (const CellIndex c : cp.maxima) EXPECT_GE(distance_transform(m).at(c), 1.5);
}

TEST(CriticalPoints, RejectsMapsSmallerThanTheKernel) {
    const DistanceField D{2, 2, {1, 1, 1, 1}};
    CriticalPointParams p;
    p.sigma = 1.0;
    EXPECT_THROW(detect_critical_points(D, p), TooSmall);
}

TEST(RoomGraph, ThreeRoomsInARow) {
    const Scene s = generate_synthetic_floorplan(11, 3, 1);
    const RoomGraph g = segment_map(s.floorplan);
    ASSERT_EQ(g.rooms, 3);
    EXPECT_EQ(g.doors, 2);
    int edges = 0, degree_one = 0;
    for (int a = 1; a <= 3; ++a) {
        int deg = 0;
        for (int b = 1; b <= 3; ++b) deg += g.adjacent(a, b);
        edges += deg;
        degree_one += deg == 1;
    }
    EXPECT_EQ(edges, 4);  // two undirected edges
    EXPECT_EQ(degree_one, 2);
    check_graph_invariants(s.floorplan, g);
}

TEST(RoomGraph, SingleRoom) {
    const Scene s = generate_synthetic_floorplan(3, 1, 1);
    const RoomGraph g = segment_map(s.floorplan);
    EXPECT_EQ(g.rooms, 1);
    EXPECT_EQ(g.doors, 0);
    EXPECT_EQ(g.adjacency, (std::vector<std::vector<char>>{{0}}));
}

TEST(RoomGraph, NearbySaddlesMergeIntoOneDoor) {
    const Scene s = generate_synthetic_floorplan(5, 2, 1);
    CriticalPoints cp = detect_critical_points(distance_transform(s.floorplan));
    ASSERT_EQ(cp.saddles.size(), 1u);
    cp.saddles.push_back({cp.saddles[0].row + 1, cp.saddles[0].col});
    const RoomGraph g = build_room_graph(s.floorplan, cp);
    EXPECT_EQ(g.doors, 1);
    EXPECT_EQ(g.rooms, 2);
    EXPECT_TRUE(g.adjacent(1, 2));
}

TEST(RoomGraph, EmptyMapsThrow) {
    EXPECT_THROW(build_room_graph(GridMap(10, 10), {}), EmptyGraph);
    GridMap tiny(10, 10, 0.2, {0, 0}, CellState::Occupied);
    tiny.set(5, 5, CellState::Free);  // too small for the orphan sweep, no maxima
    EXPECT_THROW(build_room_graph(tiny, {}), EmptyGraph);
}

TEST(RoomGraph, OrphanRegionsBecomeRooms) {
    GridMap m(20, 10, 0.2, {0, 0}, CellState::Occupied);
    for (int r = 1; r < 9; ++r)
        for (int c = 1; c < 19; ++c) m.set(r, c, CellState::Free);
    const RoomGraph g = build_room_graph(m, {});  // no maxima at all
    EXPECT_EQ(g.rooms, 1);
    EXPECT_EQ(g.room_cells(1), 8u * 18u);
}

TEST(RoomGraph, StripsSegmentIntoPaths) {
    for (int n = 1; n <= 5; ++n)
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const RoomGraph g = strip_graph(seed * 31 + n, n);
            ASSERT_EQ(g.rooms, n) << "n=" << n << " seed=" << seed;
            // Path graph: n-1 edges, connected.
            int edges = 0;
            for (int a = 1; a <= n; ++a)
                for (int b = a + 1; b <= n; ++b) edges += g.adjacent(a, b);
            EXPECT_EQ(edges, n - 1);
            for (int a = 1; a <= n; ++a) EXPECT_NE(topo_distance(g, 1, a), kNoPath);
        }
}

TEST(RoomGraph, InvariantsOnGeneratedScenes) {
    for (int seed = 0; seed < 8; ++seed) {
        const Scene s = generate_synthetic_floorplan(seed, 1 + seed % 3, 1 + seed / 3 % 3);
        const RoomGraph a = segment_map(s.floorplan), b = segment_map(s.floorplan);
        check_graph_invariants(s.floorplan, a);
        EXPECT_EQ(a.seg, b.seg);
        EXPECT_EQ(a.adjacency, b.adjacency);
    }
}

TEST(RoomOf, InsideOnDoorAndFringe) {
    const Scene s = generate_synthetic_floorplan(11, 3, 1);
    const RoomGraph g = segment_map(s.floorplan);
    // Inside: any cell labeled positive maps to itself.
    for (std::size_t i = 0; i < g.seg.size(); i += 97)
        if (g.seg[i] > 0) { EXPECT_EQ(room_of(g, s.floorplan.cell_at(i)), g.seg[i]); }

    // Door cell: BFS over free cells finds the nearest room. Oracle: plain BFS
    // distances to each room, minimum then smallest id.
    const auto bfs_oracle = [&](CellIndex from) {
        std::vector<int> dist(g.seg.size(), -1);
        std::deque<CellIndex> q{from};
        dist[s.floorplan.index(from)] = 0;
        int best = 0, best_d = -1;
        while (!q.empty()) {
            const CellIndex c = q.front();
            q.pop_front();
            const int dc = dist[s.floorplan.index(c)];
            if (best_d >= 0 && dc > best_d) break;
            const int l = g.label(c);
            if (l > 0 && (best == 0 || l < best)) {
                best = l;
                best_d = dc;
            }
            for (const CellIndex d : kNeighbors4) {
                const CellIndex n{c.row + d.row, c.col + d.col};
                if (!s.floorplan.in_bounds(n) || s.floorplan.at(n) != CellState::Free || dist[s.floorplan.index(n)] >= 0) continue;
                dist[s.floorplan.index(n)] = dc + 1;
                q.push_back(n);
            }
        }
        return best;
    };
    int door_cells = 0;
    for (std::size_t i = 0; i < g.seg.size(); ++i) {
        if (g.seg[i] >= 0) continue;
        ++door_cells;
        const CellIndex c = s.floorplan.cell_at(i);
        EXPECT_EQ(room_of(g, c), bfs_oracle(c));
    }
    EXPECT_GT(door_cells, 0);
}

TEST(RoomOf, ErrorsAndFallback) {
    RoomGraph empty;
    empty.width = empty.height = 2;
    empty.seg.assign(4, 0);
    empty.passable.assign(4, 1);
    EXPECT_THROW(room_of(empty, {0, 0}), NoRooms);

    // An unlabeled pocket with no free path to a room uses straight-line distance.
    GridMap m(30, 12, 0.2, {0, 0}, CellState::Occupied);
    for (int r = 1; r < 11; ++r)
        for (int c = 1; c < 20; ++c) m.set(r, c, CellState::Free);
    m.set(5, 25, CellState::Free);
    const RoomGraph g = build_room_graph(m, {});
    ASSERT_EQ(g.rooms, 1);
    EXPECT_EQ(room_of(g, {5, 25}), 1);
    EXPECT_THROW(room_of(g, {50, 50}), OutOfBounds);
}

TEST(TopoDistance, HopCounts) {
    const RoomGraph g = strip_graph(40, 3);
    ASSERT_EQ(g.rooms, 3);
    for (int a = 1; a <= 3; ++a) EXPECT_EQ(topo_distance(g, a, a), 0);
    int far = 0;
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) far = std::max(far, topo_distance(g, a, b));
    EXPECT_EQ(far, 2);
    EXPECT_THROW(topo_distance(g, 0, 1), BadRoomId);
    EXPECT_THROW(topo_distance(g, 1, 4), BadRoomId);

    // Two separate buildings side by side: no path.
    GridMap m(40, 12, 0.2, {0, 0}, CellState::Occupied);
    for (int r = 1; r < 11; ++r)
        for (int c = 1; c < 39; ++c)
            if (c != 20) m.set(r, c, CellState::Free);
    const RoomGraph two = build_room_graph(m, {});
    ASSERT_EQ(two.rooms, 2);
    EXPECT_EQ(topo_distance(two, 1, 2), kNoPath);
}

TEST(Export, DotAndJson) {
    const Scene s = generate_synthetic_floorplan(11, 3, 1);
    const RoomGraph g = segment_map(s.floorplan);
    const std::string dot = to_dot(g);
    EXPECT_EQ(dot.rfind("graph rooms {", 0), 0u);
    char area[32];
    std::snprintf(area, sizeof area, "%.2f", static_cast<double>(g.room_cells(1)) * 0.04);
    EXPECT_NE(dot.find("R1 [label=\"R1 area=" + std::string(area) + "\"]"), std::string::npos);
    EXPECT_NE(dot.find("[label=\"D1\"]"), std::string::npos);
    EXPECT_NE(dot.find("[label=\"D2\"]"), std::string::npos);

    const Segmentation back = segmentation_from_json(nlohmann::json::parse(segmentation_to_json(g).dump()));
    EXPECT_EQ(back.seg, g.seg);
    EXPECT_EQ(back.adjacency, g.adjacency);
    EXPECT_EQ(back.rooms, g.rooms);
    EXPECT_EQ(back.doors, g.doors);
    EXPECT_THROW(segmentation_from_json(nlohmann::json::parse(R"({"width":2})")), SchemaError);
}
