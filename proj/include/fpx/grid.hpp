#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "fpx/error.hpp"

namespace fpx {

// Tri-state occupancy. The byte values are the on-disk encoding.
enum class CellState : std::uint8_t { Occupied = 0, Unknown = 100, Free = 255 };

constexpr bool is_valid_cell_byte(std::uint8_t b) noexcept { return b == 0 || b == 100 || b == 255; }

inline const char* to_string(CellState s) noexcept {
    switch (s) {
        case CellState::Occupied: return "occupied";
        case CellState::Unknown: return "unknown";
        case CellState::Free: return "free";
    }
    return "?";
}

struct CellIndex {
    int row = 0;
    int col = 0;

    friend constexpr bool operator==(const CellIndex&, const CellIndex&) = default;
    friend constexpr auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

inline constexpr double kDefaultResolution = 0.2;

inline constexpr std::array<CellIndex, 4> kNeighbors4{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
inline constexpr std::array<CellIndex, 8> kNeighbors8{
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

// Rectangular tri-state occupancy grid. Storage is row-major with row 0 at
// the minimum-y edge; origin is the world position of the (0,0) corner.
class GridMap {
public:
    GridMap() : GridMap(1, 1) {}

    GridMap(int width, int height, double resolution = kDefaultResolution, WorldPoint origin = {},
            CellState fill = CellState::Unknown)
        : width_(width), height_(height), resolution_(resolution), origin_(origin) {
        if (width < 1 || height < 1) throw InvalidMap("map dimensions must be at least 1x1");
        if (!(resolution > 0.0) || !std::isfinite(resolution)) throw InvalidMap("resolution must be positive");
        cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                      static_cast<std::uint8_t>(fill));
    }

    // Adopts raw bytes; throws InvalidMap on size mismatch or a non-tri-state byte.
    static GridMap from_bytes(int width, int height, std::vector<std::uint8_t> bytes,
                              double resolution = kDefaultResolution, WorldPoint origin = {}) {
        GridMap m(width, height, resolution, origin);
        if (bytes.size() != m.cells_.size()) throw InvalidMap("cell buffer length does not match width*height");
        for (std::uint8_t b : bytes)
            if (!is_valid_cell_byte(b)) throw InvalidMap("invalid cell byte " + std::to_string(b));
        m.cells_ = std::move(bytes);
        return m;
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double resolution() const noexcept { return resolution_; }
    WorldPoint origin() const noexcept { return origin_; }
    std::size_t size() const noexcept { return cells_.size(); }

    bool in_bounds(int row, int col) const noexcept { return row >= 0 && col >= 0 && row < height_ && col < width_; }
    bool in_bounds(CellIndex c) const noexcept { return in_bounds(c.row, c.col); }

    std::size_t index(CellIndex c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.col);
    }
    CellIndex cell_at(std::size_t i) const noexcept {
        return {static_cast<int>(i / static_cast<std::size_t>(width_)), static_cast<int>(i % static_cast<std::size_t>(width_))};
    }

    CellState at(CellIndex c) const noexcept { return static_cast<CellState>(cells_[index(c)]); }
    CellState at(int row, int col) const noexcept { return at(CellIndex{row, col}); }
    void set(CellIndex c, CellState s) noexcept { cells_[index(c)] = static_cast<std::uint8_t>(s); }
    void set(int row, int col, CellState s) noexcept { set(CellIndex{row, col}, s); }

    void fill(CellState s) { std::fill(cells_.begin(), cells_.end(), static_cast<std::uint8_t>(s)); }

    const std::vector<std::uint8_t>& bytes() const noexcept { return cells_; }

    bool same_geometry(const GridMap& o) const noexcept {
        return width_ == o.width_ && height_ == o.height_ && resolution_ == o.resolution_ && origin_ == o.origin_;
    }

    friend bool operator==(const GridMap&, const GridMap&) = default;

private:
    int width_;
    int height_;
    double resolution_;
    WorldPoint origin_;
    std::vector<std::uint8_t> cells_;
};

// Floor semantics; a small epsilon absorbs representation error for points
// that sit exactly on a cell edge (1.0/0.2 must land in column 5).
inline CellIndex world_to_cell(const GridMap& map, WorldPoint p) {
    constexpr double kEdgeEps = 1e-9;
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw OutOfBounds(p.x, p.y);
    const double u = (p.x - map.origin().x) / map.resolution();
    const double v = (p.y - map.origin().y) / map.resolution();
    const int col = static_cast<int>(std::floor(u + kEdgeEps));
    const int row = static_cast<int>(std::floor(v + kEdgeEps));
    if (u < -kEdgeEps || v < -kEdgeEps || !map.in_bounds(row, col)) throw OutOfBounds(p.x, p.y);
    return {row, col};
}

// World position of the cell center.
inline WorldPoint cell_to_world(const GridMap& map, CellIndex c) noexcept {
    return {map.origin().x + (c.col + 0.5) * map.resolution(), map.origin().y + (c.row + 0.5) * map.resolution()};
}

inline std::size_t count_cells(const GridMap& map, CellState state) noexcept {
    const auto b = static_cast<std::uint8_t>(state);
    return static_cast<std::size_t>(std::count(map.bytes().begin(), map.bytes().end(), b));
}

// Maximal connected region of passable cells containing seed, sorted by
// (row, col). Connectivity is 4 or 8.
template <class Passable>
std::vector<CellIndex> flood_fill(const GridMap& map, CellIndex seed, Passable&& passable, int connectivity = 4) {
    if (connectivity != 4 && connectivity != 8) throw ParamError("connectivity must be 4 or 8");
    if (!map.in_bounds(seed)) throw EmptyRegion("flood fill seed is out of bounds");
    if (!passable(map.at(seed))) throw EmptyRegion("flood fill seed is not passable");

    std::vector<char> seen(map.size(), 0);
    std::vector<CellIndex> out;
    std::deque<CellIndex> queue{seed};
    seen[map.index(seed)] = 1;
    const auto visit = [&](const auto& offsets) {
        while (!queue.empty()) {
            const CellIndex c = queue.front();
            queue.pop_front();
            out.push_back(c);
            for (const CellIndex d : offsets) {
                const CellIndex n{c.row + d.row, c.col + d.col};
                if (!map.in_bounds(n)) continue;
                const std::size_t i = map.index(n);
                if (seen[i] || !passable(map.at(n))) continue;
                seen[i] = 1;
                queue.push_back(n);
            }
        }
    };
    if (connectivity == 4)
        visit(kNeighbors4);
    else
        visit(kNeighbors8);
    std::sort(out.begin(), out.end());
    return out;
}

inline auto is_state(CellState s) {
    return [s](CellState c) { return c == s; };
}

// (2*half_width)^2 window whose cell (half_width, half_width) is `center`.
// Cells falling outside the source are Unknown; world coordinates are kept.
inline GridMap clone_region(const GridMap& map, CellIndex center, int half_width) {
    if (half_width < 1) throw ParamError("half_width must be >= 1");
    const int side = 2 * half_width;
    const int row0 = center.row - half_width;
    const int col0 = center.col - half_width;
    const WorldPoint origin{map.origin().x + col0 * map.resolution(), map.origin().y + row0 * map.resolution()};
    GridMap out(side, side, map.resolution(), origin, CellState::Unknown);
    for (int r = 0; r < side; ++r) {
        const int sr = row0 + r;
        if (sr < 0 || sr >= map.height()) continue;
        for (int c = 0; c < side; ++c) {
            const int sc = col0 + c;
            if (sc < 0 || sc >= map.width()) continue;
            out.set(r, c, map.at(sr, sc));
        }
    }
    return out;
}

// Connected components of cells selected by `member`; labels start at 1 in
// row-major discovery order, 0 marks non-members.
template <class Member>
std::pair<std::vector<int>, int> label_components(int width, int height, Member&& member, int connectivity) {
    std::vector<int> labels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
    int next = 0;
    std::deque<CellIndex> queue;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * width + c;
            if (labels[i] != 0 || !member(CellIndex{r, c})) continue;
            ++next;
            labels[i] = next;
            queue.push_back({r, c});
            while (!queue.empty()) {
                const CellIndex cur = queue.front();
                queue.pop_front();
                for (int k = 0; k < 8; ++k) {
                    const CellIndex d = kNeighbors8[k];
                    if (connectivity == 4 && d.row != 0 && d.col != 0) continue;
                    const CellIndex n{cur.row + d.row, cur.col + d.col};
                    if (n.row < 0 || n.col < 0 || n.row >= height || n.col >= width) continue;
                    const std::size_t j = static_cast<std::size_t>(n.row) * width + n.col;
                    if (labels[j] != 0 || !member(n)) continue;
                    labels[j] = next;
                    queue.push_back(n);
                }
            }
        }
    }
    return {std::move(labels), next};
}

}  // namespace fpx
