#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fpx/error.hpp"

namespace fpx {

// Symmetric cost matrix; node 0 is the fixed start of an open tour.
using CostMatrix = std::vector<std::vector<double>>;

inline double open_tour_cost(const CostMatrix& c, const std::vector<int>& order) {
    double total = 0.0;
    int prev = 0;
    for (const int n : order) {
        total += c[prev][n];
        prev = n;
    }
    return total;
}

// Exhaustive search over visiting orders of nodes 1..n-1. Orders are tried
// lexicographically and only a strictly cheaper one replaces the incumbent.
inline std::vector<int> tsp_exact(const CostMatrix& c) {
    std::vector<int> order(c.size() > 0 ? c.size() - 1 : 0);
    std::iota(order.begin(), order.end(), 1);
    std::vector<int> best = order;
    double best_cost = open_tour_cost(c, order);
    while (std::next_permutation(order.begin(), order.end())) {
        const double cost = open_tour_cost(c, order);
        if (cost < best_cost - 1e-12) {
            best_cost = cost;
            best = order;
        }
    }
    return best;
}

namespace detail {

// Nearest neighbour from node 0 with a forced first hop; lowest index wins ties.
inline std::vector<int> nearest_neighbour(const CostMatrix& c, int first) {
    const int n = static_cast<int>(c.size());
    std::vector<int> path{0, first};
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    used[0] = used[first] = 1;
    for (int step = 2; step < n; ++step) {
        int best = -1;
        for (int j = 1; j < n; ++j)
            if (!used[j] && (best < 0 || c[path.back()][j] < c[path.back()][best])) best = j;
        used[best] = 1;
        path.push_back(best);
    }
    return path;
}

// Segment reversals until none shortens the open path. path[0] is the start
// and stays put; reversing path[i..j] swaps edges (i-1, i) and (j, j+1), the
// latter absent when j is the last node.
inline void two_opt(const CostMatrix& c, std::vector<int>& path) {
    const int n = static_cast<int>(path.size());
    for (bool improved = true; improved;) {
        improved = false;
        for (int i = 1; i + 1 < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const int a = path[i - 1], b = path[i], d = path[j];
                double before = c[a][b], after = c[a][d];
                if (j + 1 < n) {
                    before += c[d][path[j + 1]];
                    after += c[b][path[j + 1]];
                }
                if (after < before - 1e-12) {
                    std::reverse(path.begin() + i, path.begin() + j + 1);
                    improved = true;
                }
            }
    }
}

}  // namespace detail

// Nearest-neighbour tours seeded with every possible first hop, each
// improved by 2-opt; the cheapest wins (earliest first hop on ties).
inline std::vector<int> tsp_heuristic(const CostMatrix& c) {
    const int n = static_cast<int>(c.size());
    if (n <= 1) return {};
    std::vector<int> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int first = 1; first < n; ++first) {
        std::vector<int> path = detail::nearest_neighbour(c, first);
        detail::two_opt(c, path);
        const std::vector<int> order(path.begin() + 1, path.end());
        const double cost = open_tour_cost(c, order);
        if (cost < best_cost - 1e-12) {
            best_cost = cost;
            best = order;
        }
    }
    return best;
}

inline constexpr int kTspExactLimit = 8;  // visiting nodes, start excluded

inline std::vector<int> solve_open_tsp(const CostMatrix& c) {
    if (c.size() <= 1) return {};
    return static_cast<int>(c.size()) - 1 <= kTspExactLimit ? tsp_exact(c) : tsp_heuristic(c);
}

}  // namespace fpx
