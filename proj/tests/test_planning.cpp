#include <gtest/gtest.h>

#include <cmath>
#include <queue>

#include "fpx/planning.hpp"
#include "fpx/rng.hpp"

using namespace fpx;

namespace {

constexpr double kTol = 1e-9;

// Textbook Dijkstra over doubles with the same motion rule.
template <class Ok>
std::vector<double> dijkstra_oracle(const GridMap& m, CellIndex s, Ok ok) {
    std::vector<double> dist(m.size(), std::numeric_limits<double>::infinity());
    if (!ok(m.at(s))) return dist;
    using E = std::pair<double, std::size_t>;
    std::priority_queue<E, std::vector<E>, std::greater<>> pq;
    dist[m.index(s)] = 0;
    pq.push({0, m.index(s)});
    while (!pq.empty()) {
        const auto [d, i] = pq.top();
        pq.pop();
        if (d > dist[i]) continue;
        const CellIndex c = m.cell_at(i);
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                const CellIndex n{c.row + dr, c.col + dc};
                if (!m.in_bounds(n) || !ok(m.at(n))) continue;
                if (dr != 0 && dc != 0) {
                    const bool a = m.in_bounds(c.row + dr, c.col) && ok(m.at(c.row + dr, c.col));
                    const bool b = m.in_bounds(c.row, c.col + dc) && ok(m.at(c.row, c.col + dc));
                    if (!a && !b) continue;
                }
                const double nd = d + m.resolution() * ((dr != 0 && dc != 0) ? std::sqrt(2.0) : 1.0);
                if (nd < dist[m.index(n)]) {
                    dist[m.index(n)] = nd;
                    pq.push({nd, m.index(n)});
                }
            }
    }
    return dist;
}

GridMap random_map(Rng& rng, int w, int h, double p_free, double p_unknown = 0.0) {
    GridMap m(w, h, 0.2, {0, 0}, CellState::Occupied);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double u = rng.unit();
            if (u < p_free) m.set(r, c, CellState::Free);
            else if (u < p_free + p_unknown) m.set(r, c, CellState::Unknown);
        }
    return m;
}

void check_path(const GridMap& m, const PathResult& p, CellIndex s, CellIndex g, bool (*ok)(CellState)) {
    ASSERT_FALSE(p.cells.empty());
    EXPECT_EQ(p.cells.front(), s);
    EXPECT_EQ(p.cells.back(), g);
    double len = 0;
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
        EXPECT_TRUE(ok(m.at(p.cells[i])));
        if (i == 0) continue;
        const int dr = p.cells[i].row - p.cells[i - 1].row, dc = p.cells[i].col - p.cells[i - 1].col;
        ASSERT_TRUE(std::max(std::abs(dr), std::abs(dc)) == 1);
        if (dr != 0 && dc != 0) {
            EXPECT_TRUE(ok(m.at(p.cells[i - 1].row + dr, p.cells[i - 1].col)) ||
                        ok(m.at(p.cells[i - 1].row, p.cells[i - 1].col + dc)));
        }
        len += (dr != 0 && dc != 0) ? std::sqrt(2.0) : 1.0;
    }
    EXPECT_NEAR(len * m.resolution(), p.cost, kTol);
}

}  // namespace

TEST(ShortestPath, Examples) {
    GridMap corridor(11, 3, 0.2, {0, 0}, CellState::Occupied);
    for (int c = 0; c < 11; ++c) corridor.set(1, c, CellState::Free);
    const PathResult straight = shortest_path(corridor, {1, 0}, {1, 10}, traversable_free);
    EXPECT_NEAR(straight.cost, 2.0, kTol);
    EXPECT_EQ(straight.steps, (StepCount{10, 0}));

    const GridMap open(20, 20, 0.2, {0, 0}, CellState::Free);
    const PathResult diag = shortest_path(open, {2, 2}, {7, 7}, traversable_free);
    EXPECT_NEAR(diag.cost, 5 * std::sqrt(2.0) * 0.2, kTol);
    EXPECT_NEAR(diag.cost, 1.41421, 1e-5);

    GridMap sealed = open;
    for (int r = 0; r < 20; ++r) sealed.set(r, 10, CellState::Occupied);
    try {
        shortest_path(sealed, {5, 2}, {5, 15}, traversable_free);
        FAIL();
    } catch (const Unreachable& e) {
        EXPECT_EQ(e.explored(), 200u);  // the left half
    }
    EXPECT_THROW(shortest_path(sealed, {5, 10}, {5, 15}, traversable_free), ParamError);
    EXPECT_THROW(shortest_path(sealed, {5, 2}, {25, 15}, traversable_free), ParamError);
}

TEST(ShortestPath, NoCornerCutting) {
    // Both axial cells blocked: the diagonal is refused.
    GridMap n(2, 2, 0.2, {0, 0}, CellState::Free);
    n.set(0, 1, CellState::Occupied);
    n.set(1, 0, CellState::Occupied);
    EXPECT_THROW(shortest_path(n, {0, 0}, {1, 1}, traversable_free), Unreachable);
    n.set(1, 0, CellState::Free);  // one side open: diagonal allowed
    EXPECT_NEAR(shortest_path(n, {0, 0}, {1, 1}, traversable_free).cost, 0.2 * std::sqrt(2.0), kTol);
}

TEST(ShortestPath, MatchesDijkstraOnRandomMaps) {
    Rng rng(99);
    for (int t = 0; t < 30; ++t) {
        const GridMap m = random_map(rng, 32, 32, 0.7);
        std::vector<CellIndex> free;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.bytes()[i] == 255) free.push_back(m.cell_at(i));
        for (int q = 0; q < 10; ++q) {
            const CellIndex s = free[rng.below(free.size())], g = free[rng.below(free.size())];
            const auto oracle = dijkstra_oracle(m, s, traversable_free);
            const double want = oracle[m.index(g)];
            if (std::isinf(want)) {
                EXPECT_THROW(shortest_path(m, s, g, traversable_free), Unreachable);
                continue;
            }
            const PathResult p = shortest_path(m, s, g, traversable_free);
            EXPECT_NEAR(p.cost, want, kTol);
            check_path(m, p, s, g, traversable_free);
        }
    }
}

TEST(ShortestPath, MetricProperties) {
    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
        const GridMap m = random_map(rng, 32, 32, 0.8);
        std::vector<CellIndex> free;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.bytes()[i] == 255) free.push_back(m.cell_at(i));
        for (int q = 0; q < 10; ++q) {
            const CellIndex a = free[rng.below(free.size())], b = free[rng.below(free.size())],
                            c = free[rng.below(free.size())];
            const auto fa = cost_field(m, a, traversable_free), fb = cost_field(m, b, traversable_free);
            const double ab = fa[m.index(b)], ba = fb[m.index(a)];
            EXPECT_EQ(std::isinf(ab), std::isinf(ba));
            if (std::isinf(ab)) continue;
            EXPECT_NEAR(ab, ba, kTol);
            EXPECT_GE(ab + kTol, 0.2 * std::hypot(a.row - b.row, a.col - b.col));
            const double ac = fa[m.index(c)], cb = fb[m.index(c)];
            if (!std::isinf(ac)) { EXPECT_LE(ab, ac + cb + kTol); }
        }
    }
}

TEST(CostField, AgreesWithShortestPath) {
    Rng rng(6);
    for (int t = 0; t < 5; ++t) {
        const GridMap m = random_map(rng, 24, 24, 0.75, 0.1);
        std::vector<CellIndex> open;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.bytes()[i] != 0) open.push_back(m.cell_at(i));
        const CellIndex s = open[rng.below(open.size())];
        const auto field = cost_field(m, s, traversable_optimistic);
        const auto oracle = dijkstra_oracle(m, s, traversable_optimistic);
        for (std::size_t i = 0; i < m.size(); ++i) {
            EXPECT_EQ(std::isinf(field[i]), std::isinf(oracle[i]));
            if (std::isinf(field[i])) continue;
            EXPECT_NEAR(field[i], oracle[i], kTol);
            // Bit-identical to a point query.
            EXPECT_EQ(field[i], shortest_path(m, s, m.cell_at(i), traversable_optimistic).cost);
        }
    }
}

TEST(NavCost, ExamplesAndDoorOracle) {
    GridMap m(40, 20, 0.2, {0, 0}, CellState::Unknown);
    for (int c = 0; c < 40; ++c) m.set(5, c, CellState::Free);
    EXPECT_EQ(nav_cost(m, {5, 3}, {5, 3}), 0.0);
    EXPECT_NEAR(nav_cost(m, {5, 3}, {5, 23}), 4.0, kTol);

    // Two rooms joined by one door.
    GridMap rooms(30, 15, 0.2, {0, 0}, CellState::Free);
    for (int r = 0; r < 15; ++r) rooms.set(r, 15, CellState::Occupied);
    rooms.set(12, 15, CellState::Free);
    const auto oracle = dijkstra_oracle(rooms, {2, 2}, traversable_free);
    EXPECT_NEAR(nav_cost(rooms, {2, 2}, {2, 27}), oracle[rooms.index({2, 27})], kTol);
    EXPECT_GT(nav_cost(rooms, {2, 2}, {2, 27}), 25 * 0.2);

    // Unknown is not traversable at exploration time.
    GridMap gap = rooms;
    gap.set(12, 15, CellState::Unknown);
    EXPECT_THROW(nav_cost(gap, {2, 2}, {2, 27}), Unreachable);
}

TEST(OptimisticCost, Examples) {
    const GridMap unknown(30, 30);
    const PredictedMap p = unpredicted(unknown);
    EXPECT_NEAR(optimistic_cost(p, {0, 0}, {10, 4}), 0.2 * (6 + 4 * std::sqrt(2.0)), kTol);

    GridMap wall(30, 30);
    for (int r = 0; r < 30; ++r) wall.set(r, 15, CellState::Occupied);
    wall.set(25, 15, CellState::Free);
    const PredictedMap pw = unpredicted(wall);
    const double cost = optimistic_cost(pw, {5, 5}, {5, 25});
    EXPECT_GT(cost, 0.2 * 20);
    EXPECT_NEAR(cost, dijkstra_oracle(wall, {5, 5}, traversable_optimistic)[wall.index({5, 25})], kTol);

    GridMap box(30, 30);
    for (int i = 10; i <= 14; ++i) {
        box.set(10, i, CellState::Occupied);
        box.set(14, i, CellState::Occupied);
        box.set(i, 10, CellState::Occupied);
        box.set(i, 14, CellState::Occupied);
    }
    EXPECT_THROW(optimistic_cost(unpredicted(box), {0, 0}, {12, 12}), Unreachable);
}

TEST(OptimisticCost, NeverExceedsNavCost) {
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
        const GridMap m = random_map(rng, 32, 32, 0.6, 0.2);
        std::vector<CellIndex> free;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.bytes()[i] == 255) free.push_back(m.cell_at(i));
        for (int q = 0; q < 5; ++q) {
            const CellIndex a = free[rng.below(free.size())], b = free[rng.below(free.size())];
            double nav;
            try {
                nav = nav_cost(m, a, b);
            } catch (const Unreachable&) {
                continue;
            }
            EXPECT_LE(optimistic_cost(unpredicted(m), a, b), nav + kTol);
        }
    }
}

TEST(Inflation, GrowsObstacles) {
    GridMap m(11, 11, 0.2, {0, 0}, CellState::Free);
    m.set(5, 5, CellState::Occupied);
    EXPECT_EQ(inflate_obstacles(m, 0), m);
    const GridMap g = inflate_obstacles(m, 2);
    EXPECT_EQ(count_cells(g, CellState::Occupied), 13u);  // lattice points in a radius-2 disc
    EXPECT_EQ(g.at(5, 7), CellState::Occupied);
    EXPECT_EQ(g.at(6, 7), CellState::Free);
    PlannerOptions opt;
    opt.inflation_cells = 1;
    EXPECT_GT(nav_cost(m, {5, 0}, {5, 10}, opt), nav_cost(m, {5, 0}, {5, 10}));
}
