#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fpx/error.hpp"
#include "fpx/grid.hpp"

namespace fpx {

// Per-cell Euclidean distance, in cells, to the nearest blocking cell.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
    double at(CellIndex c) const { return at(c.row, c.col); }
};

namespace detail {

// Felzenszwalb-Huttenlocher lower envelope of parabolas, in place. Inputs are
// squared distances (0 or +inf on entry for the first pass); all arithmetic
// stays on integers representable in a double, so the result is exact.
inline void edt_1d(std::vector<double>& f, std::vector<int>& v, std::vector<double>& z, std::vector<double>& d) {
    const int n = static_cast<int>(f.size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        const auto meet = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p); };
        double s = meet(v[k]);
        while (s <= z[k]) s = meet(v[--k]);  // z[0] is -inf, so k stays >= 0
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), kInf);
    } else {
        int j = 0;
        for (int q = 0; q < n; ++q) {
            while (z[j + 1] < q) ++j;
            const double dq = double(q - v[j]);
            d[q] = dq * dq + f[v[j]];
        }
    }
    f.swap(d);
}

}  // namespace detail

// Exact Euclidean distance transform. Occupied and Unknown cells are
// obstacles, and so is everything outside the map.
inline DistanceField distance_transform(const GridMap& map) {
    const int W = map.width() + 2, H = map.height() + 2;  // one-cell obstacle border
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> g(static_cast<std::size_t>(W) * H, 0.0);
    for (int r = 0; r < map.height(); ++r)
        for (int c = 0; c < map.width(); ++c)
            if (map.at(r, c) == CellState::Free) g[static_cast<std::size_t>(r + 1) * W + (c + 1)] = kInf;

    const int n = std::max(W, H);
    std::vector<double> f, d;
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1);
    f.reserve(n);
    d.reserve(n);
    for (int c = 0; c < W; ++c) {
        f.assign(H, 0.0);
        d.assign(H, 0.0);
        for (int r = 0; r < H; ++r) f[r] = g[static_cast<std::size_t>(r) * W + c];
        detail::edt_1d(f, v, z, d);
        for (int r = 0; r < H; ++r) g[static_cast<std::size_t>(r) * W + c] = f[r];
    }
    for (int r = 0; r < H; ++r) {
        f.assign(g.begin() + static_cast<std::ptrdiff_t>(r) * W, g.begin() + static_cast<std::ptrdiff_t>(r + 1) * W);
        d.assign(W, 0.0);
        detail::edt_1d(f, v, z, d);
        std::copy(f.begin(), f.end(), g.begin() + static_cast<std::ptrdiff_t>(r) * W);
    }

    DistanceField out{map.width(), map.height(), std::vector<double>(map.size())};
    for (int r = 0; r < map.height(); ++r)
        for (int c = 0; c < map.width(); ++c)
            out.values[static_cast<std::size_t>(r) * map.width() + c] =
                std::sqrt(g[static_cast<std::size_t>(r + 1) * W + (c + 1)]);
    return out;
}

// ---------------------------------------------------------------------------
// Critical points

struct CriticalPointParams {
    double sigma = 0.5;        // Gaussian pre-smoothing, cells
    double h_saddle = -0.4;    // |H| below this marks a saddle
    double h_max_duu = -0.4;   // D_uu below this (with |H| > 0) marks a maximum
    double d_min = 1.5;        // cells; weaker candidates are wall artifacts
};

struct CriticalPoints {
    std::vector<CellIndex> saddles;
    std::vector<CellIndex> maxima;
};

struct Hessian {
    double duu = 0, dvv = 0, duv = 0;
    double det() const noexcept { return duu * dvv - duv * duv; }
};

// Separable Gaussian blur truncated at 3 sigma, edges clamped.
inline std::vector<double> gaussian_smooth(const DistanceField& D, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (D.width < 2 * radius + 1 || D.height < 2 * radius + 1)
        throw TooSmall("map is smaller than the smoothing kernel");
    if (sigma <= 0) return D.values;
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) sum += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& k : kernel) k /= sum;

    const int W = D.width, H = D.height;
    std::vector<double> tmp(D.values.size()), out(D.values.size());
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * D.at(r, std::clamp(c + i, 0, W - 1));
            tmp[static_cast<std::size_t>(r) * W + c] = acc;
        }
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            double acc = 0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp[static_cast<std::size_t>(std::clamp(r + i, 0, H - 1)) * W + c];
            out[static_cast<std::size_t>(r) * W + c] = acc;
        }
    return out;
}

// Central differences with unit step; u runs along columns, v along rows.
// (row, col) must not touch the border.
inline Hessian hessian_at(const std::vector<double>& s, int width, int row, int col) {
    const auto S = [&](int r, int c) { return s[static_cast<std::size_t>(r) * width + c]; };
    return {S(row, col + 1) - 2 * S(row, col) + S(row, col - 1), S(row + 1, col) - 2 * S(row, col) + S(row - 1, col),
            (S(row + 1, col + 1) - S(row + 1, col - 1) - S(row - 1, col + 1) + S(row - 1, col - 1)) / 4.0};
}

namespace detail {

// Reduces each 8-connected group of candidates to one cell: the best score,
// then nearest to the group centroid, then smallest (row, col).
template <class Score>
std::vector<CellIndex> suppress(int width, int height, const std::vector<char>& is_candidate, Score&& score) {
    const auto [labels, count] = label_components(
        width, height, [&](CellIndex c) { return is_candidate[static_cast<std::size_t>(c.row) * width + c.col] != 0; },
        8);
    std::vector<std::vector<CellIndex>> groups(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] > 0)
            groups[labels[i] - 1].push_back({static_cast<int>(i / width), static_cast<int>(i % width)});
    constexpr double kTieEps = 1e-9;
    std::vector<CellIndex> out;
    for (const auto& g : groups) {
        double mr = 0, mc = 0;
        for (const CellIndex c : g) {
            mr += c.row;
            mc += c.col;
        }
        mr /= static_cast<double>(g.size());
        mc /= static_cast<double>(g.size());
        double best_score = -std::numeric_limits<double>::infinity();
        for (const CellIndex c : g) best_score = std::max(best_score, score(c));
        CellIndex best{};
        double best_d = std::numeric_limits<double>::infinity();
        for (const CellIndex c : g) {
            if (score(c) < best_score - kTieEps) continue;
            const double d = (c.row - mr) * (c.row - mr) + (c.col - mc) * (c.col - mc);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        out.push_back(best);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

inline CriticalPoints detect_critical_points(const DistanceField& D, const CriticalPointParams& p = {}) {
    const std::vector<double> s = gaussian_smooth(D, p.sigma);
    const int W = D.width, H = D.height;
    std::vector<char> saddle(s.size(), 0), maximum(s.size(), 0);
    std::vector<double> det(s.size(), 0.0);
    for (int r = 1; r + 1 < H; ++r)
        for (int c = 1; c + 1 < W; ++c) {
            if (D.at(r, c) < p.d_min) continue;
            const Hessian h = hessian_at(s, W, r, c);
            const std::size_t i = static_cast<std::size_t>(r) * W + c;
            det[i] = h.det();
            if (det[i] < p.h_saddle) saddle[i] = 1;
            else if (det[i] > 0 && h.duu < p.h_max_duu) maximum[i] = 1;
        }
    CriticalPoints out;
    out.saddles = detail::suppress(W, H, saddle, [&](CellIndex c) { return -det[static_cast<std::size_t>(c.row) * W + c.col]; });
    out.maxima = detail::suppress(W, H, maximum, [&](CellIndex c) { return D.at(c); });
    return out;
}

// ---------------------------------------------------------------------------
// Segmentation and room adjacency

inline constexpr int kNoPath = std::numeric_limits<int>::max();

// Label map S: 0 unassigned, -i door i, +j room j. adjacency is rooms x rooms.
struct RoomGraph {
    int width = 0;
    int height = 0;
    double resolution = kDefaultResolution;
    std::vector<int> seg;
    std::vector<char> passable;  // Free cells of the source map
    std::vector<std::vector<char>> adjacency;
    std::vector<std::vector<std::pair<int, int>>> door_links;  // per door: adjacent room pairs
    int rooms = 0;
    int doors = 0;

    int label(CellIndex c) const { return seg[static_cast<std::size_t>(c.row) * width + c.col]; }
    bool adjacent(int a, int b) const { return adjacency[a - 1][b - 1] != 0; }
    std::size_t room_cells(int id) const {
        return static_cast<std::size_t>(std::count(seg.begin(), seg.end(), id));
    }
};

inline constexpr int kOrphanRoomMinCells = 25;  // 1 m^2 at 0.2 m

// Doors are carved around saddles (L1 radius below door_radius), merged into
// unique door ids, rooms are flood-filled from maxima, leftover sizable free
// regions become rooms, and two rooms are adjacent when one door touches both.
inline RoomGraph build_room_graph(const GridMap& map, const CriticalPoints& cp, double door_radius = 0.6) {
    RoomGraph g;
    g.width = map.width();
    g.height = map.height();
    g.resolution = map.resolution();
    g.seg.assign(map.size(), 0);
    g.passable.assign(map.size(), 0);
    for (std::size_t i = 0; i < map.size(); ++i)
        g.passable[i] = map.bytes()[i] == static_cast<std::uint8_t>(CellState::Free);
    if (std::find(g.passable.begin(), g.passable.end(), 1) == g.passable.end())
        throw EmptyGraph("map has no free cells");

    const auto idx = [&](CellIndex c) { return map.index(c); };

    // 1. door marks
    const int reach = static_cast<int>(std::ceil(door_radius / map.resolution() - 1e-6)) - 1;
    for (const CellIndex p : cp.saddles)
        for (int dr = -reach; dr <= reach; ++dr)
            for (int dc = -(reach - std::abs(dr)); dc <= reach - std::abs(dr); ++dc) {
                const CellIndex c{p.row + dr, p.col + dc};
                if (map.in_bounds(c) && g.passable[idx(c)]) g.seg[idx(c)] = -1;
            }

    // 2. unique door ids
    const auto [door_labels, door_count] =
        label_components(g.width, g.height, [&](CellIndex c) { return g.seg[idx(c)] == -1; }, 8);
    for (std::size_t i = 0; i < g.seg.size(); ++i)
        if (door_labels[i] > 0) g.seg[i] = -door_labels[i];
    g.doors = door_count;

    // 3. rooms from maxima, 4. orphan sweep
    const auto fill_room = [&](CellIndex seed, int label) {
        std::vector<CellIndex> cells;
        std::deque<CellIndex> q{seed};
        g.seg[idx(seed)] = label;
        while (!q.empty()) {
            const CellIndex c = q.front();
            q.pop_front();
            cells.push_back(c);
            for (const CellIndex d : kNeighbors4) {
                const CellIndex n{c.row + d.row, c.col + d.col};
                if (!map.in_bounds(n) || !g.passable[idx(n)] || g.seg[idx(n)] != 0) continue;
                g.seg[idx(n)] = label;
                q.push_back(n);
            }
        }
        return cells;
    };
    int next = 1;
    for (const CellIndex p : cp.maxima) {
        if (!map.in_bounds(p) || !g.passable[idx(p)] || g.seg[idx(p)] != 0) continue;
        fill_room(p, next++);
    }
    constexpr int kScratch = std::numeric_limits<int>::min();
    for (std::size_t i = 0; i < g.seg.size(); ++i) {
        if (!g.passable[i] || g.seg[i] != 0) continue;
        const auto cells = fill_room(map.cell_at(i), kScratch);
        const int label = static_cast<int>(cells.size()) >= kOrphanRoomMinCells ? next++ : kScratch;
        for (const CellIndex c : cells) g.seg[idx(c)] = label;
    }
    for (int& s : g.seg)
        if (s == kScratch) s = 0;
    g.rooms = next - 1;
    if (g.rooms == 0) throw EmptyGraph("no room could be segmented");

    // 5. adjacency through doors
    g.adjacency.assign(g.rooms, std::vector<char>(g.rooms, 0));
    std::vector<std::set<int>> touching(g.doors + 1);
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c) {
            const int s = g.seg[idx({r, c})];
            if (s >= 0) continue;
            for (const CellIndex d : kNeighbors8) {
                const CellIndex n{r + d.row, c + d.col};
                if (map.in_bounds(n) && g.seg[idx(n)] > 0) touching[-s].insert(g.seg[idx(n)]);
            }
        }
    g.door_links.assign(g.doors, {});
    for (int door = 1; door <= g.doors; ++door) {
        const std::vector<int> rooms(touching[door].begin(), touching[door].end());
        for (std::size_t a = 0; a < rooms.size(); ++a)
            for (std::size_t b = a + 1; b < rooms.size(); ++b) {
                g.adjacency[rooms[a] - 1][rooms[b] - 1] = g.adjacency[rooms[b] - 1][rooms[a] - 1] = 1;
                g.door_links[door - 1].push_back({rooms[a], rooms[b]});
            }
    }
    return g;
}

// The room a cell belongs to; unlabeled cells take the nearest room reached
// by BFS over free cells (smaller id on ties), or failing that the nearest
// labeled cell in straight-line distance.
inline int room_of(const RoomGraph& g, CellIndex cell) {
    if (g.rooms == 0) throw NoRooms("room graph has no rooms");
    const auto idx = [&](CellIndex c) { return static_cast<std::size_t>(c.row) * g.width + c.col; };
    const auto inside = [&](CellIndex c) { return c.row >= 0 && c.col >= 0 && c.row < g.height && c.col < g.width; };
    if (!inside(cell)) throw OutOfBounds(cell.col, cell.row);
    if (g.seg[idx(cell)] > 0) return g.seg[idx(cell)];

    std::vector<char> seen(g.seg.size(), 0);
    std::vector<CellIndex> layer{cell};
    seen[idx(cell)] = 1;
    while (!layer.empty()) {
        int best = 0;
        std::vector<CellIndex> next;
        for (const CellIndex c : layer)
            for (const CellIndex d : kNeighbors4) {
                const CellIndex n{c.row + d.row, c.col + d.col};
                if (!inside(n) || seen[idx(n)] || !g.passable[idx(n)]) continue;
                seen[idx(n)] = 1;
                const int s = g.seg[idx(n)];
                if (s > 0 && (best == 0 || s < best)) best = s;
                next.push_back(n);
            }
        if (best > 0) return best;
        layer = std::move(next);
    }

    int best = 0;
    long best_d = std::numeric_limits<long>::max();
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c) {
            const int s = g.seg[idx({r, c})];
            if (s <= 0) continue;
            const long d = long(r - cell.row) * (r - cell.row) + long(c - cell.col) * (c - cell.col);
            if (d < best_d || (d == best_d && s < best)) {
                best_d = d;
                best = s;
            }
        }
    return best;
}

// Hop count between rooms over the adjacency matrix; kNoPath if disconnected.
inline int topo_distance(const RoomGraph& g, int a, int b) {
    if (a < 1 || a > g.rooms || b < 1 || b > g.rooms)
        throw BadRoomId("room id out of range: " + std::to_string(a) + ", " + std::to_string(b));
    if (a == b) return 0;
    std::vector<int> dist(g.rooms + 1, -1);
    std::deque<int> q{a};
    dist[a] = 0;
    while (!q.empty()) {
        const int u = q.front();
        q.pop_front();
        for (int v = 1; v <= g.rooms; ++v) {
            if (dist[v] >= 0 || !g.adjacent(u, v)) continue;
            dist[v] = dist[u] + 1;
            if (v == b) return dist[v];
            q.push_back(v);
        }
    }
    return kNoPath;
}

// ---------------------------------------------------------------------------
// Export

inline std::string to_dot(const RoomGraph& g) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "graph rooms {\n";
    const double cell_area = g.resolution * g.resolution;
    for (int r = 1; r <= g.rooms; ++r)
        os << "  R" << r << " [label=\"R" << r << " area=" << static_cast<double>(g.room_cells(r)) * cell_area
           << "\"];\n";
    for (int d = 1; d <= g.doors; ++d)
        for (const auto& [a, b] : g.door_links[d - 1]) os << "  R" << a << " -- R" << b << " [label=\"D" << d << "\"];\n";
    os << "}\n";
    return os.str();
}

// Segmentation as row-major run-length pairs [label, count].
inline nlohmann::json segmentation_to_json(const RoomGraph& g) {
    nlohmann::json rle = nlohmann::json::array();
    for (std::size_t i = 0; i < g.seg.size();) {
        std::size_t j = i;
        while (j < g.seg.size() && g.seg[j] == g.seg[i]) ++j;
        rle.push_back({g.seg[i], j - i});
        i = j;
    }
    nlohmann::json adj = nlohmann::json::array();
    for (const auto& row : g.adjacency) {
        nlohmann::json r = nlohmann::json::array();
        for (char v : row) r.push_back(v ? 1 : 0);
        adj.push_back(r);
    }
    return {{"width", g.width}, {"height", g.height}, {"resolution", g.resolution}, {"rooms", g.rooms},
            {"doors", g.doors}, {"adjacency", adj}, {"rle", rle}};
}

struct Segmentation {
    int width = 0;
    int height = 0;
    int rooms = 0;
    int doors = 0;
    std::vector<int> seg;
    std::vector<std::vector<char>> adjacency;
};

inline Segmentation segmentation_from_json(const nlohmann::json& j) {
    Segmentation s;
    try {
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        s.rooms = j.at("rooms").get<int>();
        s.doors = j.at("doors").get<int>();
        for (const auto& run : j.at("rle")) s.seg.insert(s.seg.end(), run.at(1).get<std::size_t>(), run.at(0).get<int>());
        for (const auto& row : j.at("adjacency")) {
            std::vector<char> r;
            for (const auto& v : row) r.push_back(static_cast<char>(v.get<int>()));
            s.adjacency.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("segmentation JSON: ") + e.what());
    }
    if (s.seg.size() != static_cast<std::size_t>(s.width) * s.height) throw SchemaError("segmentation RLE length mismatch");
    return s;
}

// Distance transform, critical points and room graph in one call.
inline RoomGraph segment_map(const GridMap& map, const CriticalPointParams& params = {}, double door_radius = 0.6) {
    return build_room_graph(map, detect_critical_points(distance_transform(map), params), door_radius);
}

}  // namespace fpx
