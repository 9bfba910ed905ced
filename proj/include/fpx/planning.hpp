#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>
#include <vector>

#include "fpx/error.hpp"
#include "fpx/grid.hpp"
#include "fpx/prediction.hpp"

namespace fpx {

inline constexpr double kSqrt2 = std::numbers::sqrt2;

// Path length kept as exact step counts. Since sqrt(2) is irrational two
// paths have the same length only if they have the same counts, which makes
// costs bit-identical across search strategies.
struct StepCount {
    int axial = 0;
    int diagonal = 0;

    double cells() const noexcept { return axial + diagonal * kSqrt2; }
    friend bool operator==(const StepCount&, const StepCount&) = default;
};

struct PathResult {
    double cost = 0.0;  // m
    StepCount steps;
    std::vector<CellIndex> cells;  // start .. goal
};

inline bool traversable_free(CellState s) noexcept { return s == CellState::Free; }
inline bool traversable_optimistic(CellState s) noexcept { return s != CellState::Occupied; }

namespace detail {

// Applies the motion model: 8-connected, a diagonal step is refused only when
// both axial cells it squeezes between are blocked.
template <class Ok, class Visit>
void for_each_move(const GridMap& map, CellIndex c, Ok&& ok, Visit&& visit) {
    for (const CellIndex d : kNeighbors8) {
        const CellIndex n{c.row + d.row, c.col + d.col};
        if (!map.in_bounds(n) || !ok(n)) continue;
        const bool diagonal = d.row != 0 && d.col != 0;
        if (diagonal) {
            const CellIndex a{c.row + d.row, c.col}, b{c.row, c.col + d.col};
            if (!ok(a) && !ok(b)) continue;
        }
        visit(n, diagonal);
    }
}

inline StepCount add_step(StepCount s, bool diagonal) noexcept {
    if (diagonal) ++s.diagonal;
    else ++s.axial;
    return s;
}

}  // namespace detail

// Grows Occupied cells by `radius` cells (Euclidean); a no-op for radius 0.
inline GridMap inflate_obstacles(const GridMap& map, int radius) {
    if (radius <= 0) return map;
    GridMap out = map;
    for (int r = 0; r < map.height(); ++r)
        for (int c = 0; c < map.width(); ++c) {
            if (map.at(r, c) != CellState::Occupied) continue;
            for (int dr = -radius; dr <= radius; ++dr)
                for (int dc = -radius; dc <= radius; ++dc)
                    if (dr * dr + dc * dc <= radius * radius && out.in_bounds(r + dr, c + dc))
                        out.set(r + dr, c + dc, CellState::Occupied);
        }
    return out;
}

// A* with the octile heuristic; open-list ties broken by (f, row, col).
template <class Traversable>
PathResult shortest_path(const GridMap& map, CellIndex start, CellIndex goal, Traversable&& traversable) {
    if (!map.in_bounds(start) || !map.in_bounds(goal)) throw ParamError("path endpoints out of bounds");
    if (!traversable(map.at(start))) throw ParamError("path start is not traversable");
    const auto ok = [&](CellIndex c) { return traversable(map.at(c)); };
    const auto heuristic = [&](CellIndex c) {
        const int dr = std::abs(c.row - goal.row), dc = std::abs(c.col - goal.col);
        return (std::max(dr, dc) - std::min(dr, dc)) + std::min(dr, dc) * kSqrt2;
    };

    constexpr int kNone = -1;
    std::vector<StepCount> g(map.size());
    std::vector<char> known(map.size(), 0), closed(map.size(), 0);
    std::vector<int> parent(map.size(), kNone);
    using Entry = std::tuple<double, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

    known[map.index(start)] = 1;
    open.emplace(heuristic(start), start.row, start.col);
    std::size_t expanded = 0;
    while (!open.empty()) {
        const auto [f, row, col] = open.top();
        open.pop();
        const CellIndex cur{row, col};
        const std::size_t ci = map.index(cur);
        if (closed[ci]) continue;
        closed[ci] = 1;
        ++expanded;
        if (cur == goal) {
            PathResult out;
            out.steps = g[ci];
            out.cost = g[ci].cells() * map.resolution();
            for (int i = static_cast<int>(ci); i != kNone; i = parent[i]) out.cells.push_back(map.cell_at(i));
            std::reverse(out.cells.begin(), out.cells.end());
            return out;
        }
        detail::for_each_move(map, cur, ok, [&](CellIndex n, bool diagonal) {
            const std::size_t ni = map.index(n);
            if (closed[ni]) return;
            const StepCount cand = detail::add_step(g[ci], diagonal);
            if (known[ni] && g[ni].cells() <= cand.cells()) return;
            known[ni] = 1;
            g[ni] = cand;
            parent[ni] = static_cast<int>(ci);
            open.emplace(cand.cells() + heuristic(n), n.row, n.col);
        });
    }
    throw Unreachable(expanded);
}

// Single-source costs (m) to every cell; +inf where unreachable. Uses the
// same motion model and step accounting as shortest_path.
template <class Traversable>
std::vector<double> cost_field(const GridMap& map, CellIndex source, Traversable&& traversable) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> out(map.size(), kInf);
    if (!map.in_bounds(source) || !traversable(map.at(source))) return out;
    const auto ok = [&](CellIndex c) { return traversable(map.at(c)); };
    std::vector<StepCount> g(map.size());
    std::vector<char> known(map.size(), 0), closed(map.size(), 0);
    using Entry = std::tuple<double, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    known[map.index(source)] = 1;
    open.emplace(0.0, source.row, source.col);
    while (!open.empty()) {
        const auto [d, row, col] = open.top();
        open.pop();
        const std::size_t ci = map.index({row, col});
        if (closed[ci]) continue;
        closed[ci] = 1;
        out[ci] = g[ci].cells() * map.resolution();
        detail::for_each_move(map, {row, col}, ok, [&](CellIndex n, bool diagonal) {
            const std::size_t ni = map.index(n);
            if (closed[ni]) return;
            const StepCount cand = detail::add_step(g[ci], diagonal);
            if (known[ni] && g[ni].cells() <= cand.cells()) return;
            known[ni] = 1;
            g[ni] = cand;
            open.emplace(cand.cells(), n.row, n.col);
        });
    }
    return out;
}

struct PlannerOptions {
    int inflation_cells = 0;
};

// Exploration-time cost: only observed Free cells may be crossed.
inline double nav_cost(const GridMap& observed, CellIndex a, CellIndex b, const PlannerOptions& opt = {}) {
    if (a == b) return 0.0;
    return shortest_path(inflate_obstacles(observed, opt.inflation_cells), a, b, traversable_free).cost;
}

// Optimistic estimate: Unknown counts as traversable, Occupied (observed or
// predicted) blocks.
inline double optimistic_cost(const PredictedMap& predicted, CellIndex a, CellIndex b, const PlannerOptions& opt = {}) {
    if (a == b) return 0.0;
    const GridMap& m = predicted.map;
    if (!m.in_bounds(a) || m.at(a) == CellState::Occupied) throw Unreachable(0);
    return shortest_path(inflate_obstacles(m, opt.inflation_cells), a, b, traversable_optimistic).cost;
}

}  // namespace fpx
