#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "fpx/error.hpp"
#include "fpx/grid.hpp"

namespace fpx {

struct LidarConfig {
    double range = 12.0;  // m
    int rays = 360;       // per revolution
};

struct RobotState {
    WorldPoint pose;
    double traveled = 0.0;  // m
};

struct RayResult {
    std::optional<CellIndex> hit;    // first Occupied truth cell, if in bounds
    bool hit_boundary = false;       // ray left the map (boundary counts as Occupied)
    std::vector<CellIndex> traversed;  // non-Occupied cells crossed before stopping
};

// Grid traversal in the style of Amanatides & Woo. When the ray passes exactly
// through a cell corner, the two side cells are checked as well so a ray can
// never slip diagonally between two touching wall cells.
inline RayResult cast_ray(const GridMap& truth, WorldPoint from, double angle, double range) {
    RayResult out;
    CellIndex cell = world_to_cell(truth, from);
    const double res = truth.resolution();
    const double dx = std::cos(angle), dy = std::sin(angle);
    const double u = (from.x - truth.origin().x) / res, v = (from.y - truth.origin().y) / res;

    const int step_c = dx > 0 ? 1 : -1, step_r = dy > 0 ? 1 : -1;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const double delta_u = std::abs(dx) < 1e-12 ? kInf : res / std::abs(dx);
    const double delta_v = std::abs(dy) < 1e-12 ? kInf : res / std::abs(dy);
    double t_u = std::abs(dx) < 1e-12 ? kInf : ((dx > 0 ? (cell.col + 1 - u) : (u - cell.col)) * res / std::abs(dx));
    double t_v = std::abs(dy) < 1e-12 ? kInf : ((dy > 0 ? (cell.row + 1 - v) : (v - cell.row)) * res / std::abs(dy));

    const auto blocked = [&](CellIndex c) { return !truth.in_bounds(c) || truth.at(c) == CellState::Occupied; };
    const auto stop_at = [&](CellIndex c) {
        if (truth.in_bounds(c)) out.hit = c;
        else out.hit_boundary = true;
    };

    if (truth.at(cell) == CellState::Occupied) {
        out.hit = cell;
        return out;
    }
    out.traversed.push_back(cell);
    for (;;) {
        const double t = std::min(t_u, t_v);
        if (t > range) return out;
        CellIndex next = cell;
        if (std::abs(t_u - t_v) <= 1e-12 * std::max(1.0, t)) {
            const CellIndex side_c{cell.row, cell.col + step_c};
            const CellIndex side_r{cell.row + step_r, cell.col};
            if (blocked(side_c) || blocked(side_r)) {
                stop_at(blocked(side_c) ? side_c : side_r);
                return out;
            }
            next = {cell.row + step_r, cell.col + step_c};
            t_u += delta_u;
            t_v += delta_v;
        } else if (t_u < t_v) {
            next.col += step_c;
            t_u += delta_u;
        } else {
            next.row += step_r;
            t_v += delta_v;
        }
        if (blocked(next)) {
            stop_at(next);
            return out;
        }
        cell = next;
        out.traversed.push_back(cell);
    }
}

// One LiDAR sweep from the robot pose. Returns how many observed cells
// changed. Truth-Unknown cells (outside the building) are opaque and never
// written, so the observed map stays sound.
inline std::size_t sense(const GridMap& truth, GridMap& observed, const RobotState& robot, const LidarConfig& cfg = {}) {
    if (!truth.same_geometry(observed)) throw InvalidMap("observed map geometry differs from truth");
    if (!(cfg.range > 0) || cfg.rays < 8) throw ParamError("lidar needs range > 0 and >= 8 rays");
    const CellIndex at = world_to_cell(truth, robot.pose);
    if (truth.at(at) == CellState::Occupied) throw InvalidPose("robot pose lies on an occupied cell");

    std::size_t changed = 0;
    const auto mark = [&](CellIndex c, CellState s) {
        const CellState cur = observed.at(c);
        if (cur == s || cur == CellState::Occupied) return;  // Occupied wins
        observed.set(c, s);
        ++changed;
    };
    for (int k = 0; k < cfg.rays; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / cfg.rays;
        const RayResult ray = cast_ray(truth, robot.pose, angle, cfg.range);
        bool opaque = false;
        for (const CellIndex c : ray.traversed) {
            if (truth.at(c) != CellState::Free) {
                opaque = true;
                break;
            }
            mark(c, CellState::Free);
        }
        if (!opaque && ray.hit) mark(*ray.hit, CellState::Occupied);
    }
    return changed;
}

}  // namespace fpx
