#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fpx/grid.hpp"

namespace fpx {

struct FrontierCluster {
    std::vector<CellIndex> cells;  // sorted by (row, col)
    CellIndex representative;
    std::size_t size() const noexcept { return cells.size(); }

    friend bool operator==(const FrontierCluster&, const FrontierCluster&) = default;
};

inline constexpr int kWindowHalfWidth = 60;  // 12 m at 0.2 m/cell
inline constexpr int kWindowSide = 2 * kWindowHalfWidth;

struct LocalWindow {
    GridMap window;
    CellIndex center;  // representative in source-map coordinates
};

// Free cell with at least one 4-adjacent Unknown cell.
inline bool is_frontier_cell(const GridMap& map, CellIndex c) noexcept {
    if (map.at(c) != CellState::Free) return false;
    for (const CellIndex d : kNeighbors4) {
        const CellIndex n{c.row + d.row, c.col + d.col};
        if (map.in_bounds(n) && map.at(n) == CellState::Unknown) return true;
    }
    return false;
}

// All frontier cells, grouped 8-connected. Clusters smaller than
// min_cluster_size are dropped. The representative is the member nearest the
// cluster centroid; output is sorted by representative.
inline std::vector<FrontierCluster> detect_frontiers(const GridMap& observed, int min_cluster_size = 3) {
    const auto [labels, count] = label_components(
        observed.width(), observed.height(), [&](CellIndex c) { return is_frontier_cell(observed, c); }, 8);

    std::vector<FrontierCluster> clusters(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] > 0) clusters[static_cast<std::size_t>(labels[i] - 1)].cells.push_back(observed.cell_at(i));

    std::vector<FrontierCluster> out;
    for (auto& cl : clusters) {
        if (static_cast<int>(cl.cells.size()) < min_cluster_size) continue;
        double mr = 0, mc = 0;
        for (const CellIndex c : cl.cells) {
            mr += c.row;
            mc += c.col;
        }
        mr /= static_cast<double>(cl.cells.size());
        mc /= static_cast<double>(cl.cells.size());
        double best = std::numeric_limits<double>::infinity();
        for (const CellIndex c : cl.cells) {  // cells are row-major, so ties keep the smallest
            const double d = (c.row - mr) * (c.row - mr) + (c.col - mc) * (c.col - mc);
            if (d < best) {
                best = d;
                cl.representative = c;
            }
        }
        out.push_back(std::move(cl));
    }
    std::sort(out.begin(), out.end(),
              [](const FrontierCluster& a, const FrontierCluster& b) { return a.representative < b.representative; });
    return out;
}

// Square local map of half-width range/resolution cells around the cluster
// representative, padded with Unknown.
inline LocalWindow extract_window(const GridMap& observed, const FrontierCluster& f, double range = 12.0) {
    const int half = static_cast<int>(std::lround(range / observed.resolution()));
    return {clone_region(observed, f.representative, half), f.representative};
}

}  // namespace fpx
