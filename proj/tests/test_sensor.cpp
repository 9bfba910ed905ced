#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fpx/scene.hpp"
#include "fpx/sensor.hpp"

using namespace fpx;

namespace {

constexpr double kPi = std::numbers::pi;

GridMap open_field(double side) {
    const int n = static_cast<int>(std::lround(side / 0.2));
    return GridMap(n, n, 0.2, {0, 0}, CellState::Free);
}

// Closed 4 m x 4 m room, walls on cell centers.
GridMap room4() {
    const std::vector<WallSegment> walls{{{0, 0}, {4, 0}}, {{4, 0}, {4, 4}}, {{4, 4}, {0, 4}}, {{0, 4}, {0, 0}}};
    return rasterize(walls, {-1.1, -1.1, 5.1, 5.1}, {2.05, 2.05});
}

}  // namespace

TEST(CastRay, OpenSpaceRunsToRange) {
    const GridMap m = open_field(40);
    const RayResult r = cast_ray(m, {20.1, 20.1}, 0.0, 12.0);
    EXPECT_FALSE(r.hit);
    EXPECT_FALSE(r.hit_boundary);
    EXPECT_NEAR(static_cast<double>(r.traversed.size()), 60.0, 1.0);
    for (std::size_t i = 1; i < r.traversed.size(); ++i) {
        EXPECT_EQ(r.traversed[i].row, r.traversed[0].row);
        EXPECT_EQ(r.traversed[i].col, r.traversed[i - 1].col + 1);
    }
}

TEST(CastRay, StopsAtWall) {
    GridMap m = open_field(20);
    const CellIndex start = world_to_cell(m, {5.1, 10.1});
    for (int r = 0; r < m.height(); ++r) m.set(r, start.col + 10, CellState::Occupied);  // 2 m ahead
    const RayResult r = cast_ray(m, {5.1, 10.1}, 0.0, 12.0);
    ASSERT_TRUE(r.hit);
    EXPECT_EQ(*r.hit, (CellIndex{start.row, start.col + 10}));
    EXPECT_EQ(r.traversed.size(), 10u);
}

TEST(CastRay, MapEdgeActsAsWall) {
    const GridMap m = open_field(10);
    const RayResult r = cast_ray(m, {1.1, 5.1}, kPi, 12.0);  // 1 m from the left edge
    EXPECT_FALSE(r.hit);
    EXPECT_TRUE(r.hit_boundary);
    EXPECT_LE(r.traversed.size(), 6u);  // the start cell plus 5 cells of the 1.1 m run
    EXPECT_EQ(r.traversed.back().col, 0);
}

TEST(CastRay, CannotSlipThroughDiagonalCorner) {
    GridMap m(10, 10, 0.2, {0, 0}, CellState::Free);
    m.set(5, 6, CellState::Occupied);
    m.set(6, 5, CellState::Occupied);
    // From the center of (5,5) at 45 degrees: passes exactly through the shared corner.
    const RayResult r = cast_ray(m, cell_to_world(m, {5, 5}), kPi / 4, 5.0);
    ASSERT_TRUE(r.hit);
    for (const CellIndex c : r.traversed) EXPECT_FALSE(c.row > 5 && c.col > 5);
}

TEST(Sense, EmptyRoomMatchesVisibilityOracle) {
    const GridMap truth = room4();
    GridMap obs(truth.width(), truth.height(), truth.resolution(), truth.origin());
    sense(truth, obs, {{2.05, 2.05}});
    // Convex room: every interior cell is visible and every wall cell sharing an
    // edge with the interior is hit by some ray.
    for (int r = 0; r < truth.height(); ++r)
        for (int c = 0; c < truth.width(); ++c) {
            const CellState t = truth.at(r, c);
            if (t == CellState::Free) { EXPECT_EQ(obs.at(r, c), CellState::Free) << r << "," << c; }
            if (t == CellState::Unknown) { EXPECT_EQ(obs.at(r, c), CellState::Unknown); }
            if (t == CellState::Occupied) {
                bool faces_interior = false;
                for (const CellIndex d : kNeighbors4)
                    faces_interior |= truth.in_bounds(r + d.row, c + d.col) && truth.at(r + d.row, c + d.col) == CellState::Free;
                if (faces_interior) { EXPECT_EQ(obs.at(r, c), CellState::Occupied) << r << "," << c; }
            }
        }
}

TEST(Sense, IsIdempotentForStaticPose) {
    const GridMap truth = room4();
    GridMap obs(truth.width(), truth.height(), truth.resolution(), truth.origin());
    EXPECT_GT(sense(truth, obs, {{1.1, 2.9}}), 0u);
    const GridMap once = obs;
    EXPECT_EQ(sense(truth, obs, {{1.1, 2.9}}), 0u);
    EXPECT_EQ(obs, once);
}

TEST(Sense, WallsOccludeTheOtherSide) {
    // Corridor along y = 1 between two long walls; an open room lies beyond the upper wall.
    GridMap truth(60, 40, 0.2, {0, 0}, CellState::Free);
    for (int c = 0; c < 60; ++c) {
        truth.set(2, c, CellState::Occupied);
        truth.set(8, c, CellState::Occupied);
    }
    GridMap obs(truth.width(), truth.height(), truth.resolution(), truth.origin());
    sense(truth, obs, {cell_to_world(truth, {5, 30})});
    for (int r = 9; r < 40; ++r)
        for (int c = 0; c < 60; ++c) EXPECT_EQ(obs.at(r, c), CellState::Unknown);
    EXPECT_EQ(obs.at(5, 0), CellState::Free);
}

TEST(Sense, RejectsBadInput) {
    const GridMap truth = room4();
    GridMap obs(truth.width(), truth.height(), truth.resolution(), truth.origin());
    EXPECT_THROW(sense(truth, obs, {{0.0, 0.0}}), InvalidPose);
    GridMap wrong(3, 3);
    EXPECT_THROW(sense(truth, wrong, {{2.05, 2.05}}), InvalidMap);
    EXPECT_THROW(sense(truth, obs, {{2.05, 2.05}}, {12.0, 4}), ParamError);
}

TEST(Sense, SoundMonotoneAndRangeLimited) {
    for (int seed = 0; seed < 6; ++seed) {
        Scene s = generate_synthetic_floorplan(seed, 2, 2);
        s.cluttered = inject_clutter(s, {}, seed).map;
        const GridMap& truth = s.cluttered;
        GridMap obs(truth.width(), truth.height(), truth.resolution(), truth.origin());
        Rng rng(seed);
        std::vector<CellIndex> free;
        for (std::size_t i = 0; i < truth.size(); ++i)
            if (truth.bytes()[i] == 255) free.push_back(truth.cell_at(i));
        const LidarConfig cfg{5.0, 360};
        for (int step = 0; step < 8; ++step) {
            const CellIndex at = free[rng.below(free.size())];
            const GridMap before = obs;
            sense(truth, obs, {cell_to_world(truth, at)}, cfg);
            for (std::size_t i = 0; i < obs.size(); ++i) {
                const auto b = before.bytes()[i], a = obs.bytes()[i];
                if (b != 100) { EXPECT_EQ(a, b); }  // never reverted or flipped
                if (a != 100) { EXPECT_EQ(a, truth.bytes()[i]); }
                if (a != b) {
                    const CellIndex c = obs.cell_at(i);
                    EXPECT_LE(std::hypot(c.row - at.row, c.col - at.col), cfg.range / 0.2 + 1.0 + 1e-9);
                }
            }
        }
    }
}
