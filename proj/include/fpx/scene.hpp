#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fpx/error.hpp"
#include "fpx/grid.hpp"
#include "fpx/rng.hpp"

namespace fpx {

enum class SegmentKind { Wall, Door, Window };

inline const char* to_string(SegmentKind k) noexcept {
    switch (k) {
        case SegmentKind::Wall: return "wall";
        case SegmentKind::Door: return "door";
        case SegmentKind::Window: return "window";
    }
    return "?";
}

struct WallSegment {
    WorldPoint start;
    WorldPoint end;
    SegmentKind kind = SegmentKind::Wall;

    friend bool operator==(const WallSegment&, const WallSegment&) = default;
};

struct Bounds {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;

    bool contains(WorldPoint p) const noexcept { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    friend bool operator==(const Bounds&, const Bounds&) = default;
};

// What a scene file carries: geometry only, no rasters.
struct SceneDescription {
    Bounds bounds;
    WorldPoint interior_seed;
    std::vector<WallSegment> segments;
};

struct Scene {
    Bounds bounds;
    std::vector<WallSegment> segments;
    WorldPoint interior_seed;
    GridMap floorplan;  // walls Occupied, interior Free, exterior Unknown
    GridMap cluttered;  // floorplan plus obstacles
    double free_area = 0.0;  // m^2 of Free cells in floorplan
};

struct ClutterParams {
    double density = 0.02;  // obstacles per m^2 of free area
    double min_size = 0.2;
    double max_size = 1.0;
    double clearance = 0.4;
    bool rectangles = true;
    bool discs = true;
};

struct ClutterResult {
    GridMap map;
    int requested = 0;
    int placed = 0;
    int failed = 0;  // obstacles dropped after exhausting retries
};

inline constexpr double kWallThickness = 0.1;
inline constexpr double kJoinTolerance = 0.4;

// ---------------------------------------------------------------------------
// Scene JSON

namespace detail {

inline WorldPoint parse_point(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError(field + ": expected [x, y]");
    WorldPoint p{j[0].get<double>(), j[1].get<double>()};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw SchemaError(field + ": non-finite coordinate");
    return p;
}

}  // namespace detail

inline SceneDescription parse_scene_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("scene JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("scene JSON: top level must be an object");

    SceneDescription out;
    if (!doc.contains("interior_seed")) throw SchemaError("scene JSON: missing field 'interior_seed'");
    out.interior_seed = detail::parse_point(doc["interior_seed"], "interior_seed");

    if (!doc.contains("bounds")) throw SchemaError("scene JSON: missing field 'bounds'");
    const auto& b = doc["bounds"];
    if (!b.is_array() || b.size() != 4) throw SchemaError("bounds: expected [xmin, ymin, xmax, ymax]");
    for (const auto& v : b)
        if (!v.is_number() || !std::isfinite(v.get<double>())) throw SchemaError("bounds: non-numeric entry");
    out.bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    if (!(out.bounds.xmax > out.bounds.xmin) || !(out.bounds.ymax > out.bounds.ymin))
        throw SchemaError("bounds: empty extent");

    if (!doc.contains("segments") || !doc["segments"].is_array())
        throw SchemaError("scene JSON: missing array 'segments'");
    const auto& segs = doc["segments"];
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string where = "segments[" + std::to_string(i) + "]";
        const auto& s = segs[i];
        if (!s.is_object()) throw SchemaError(where + ": expected an object");
        if (!s.contains("kind") || !s["kind"].is_string()) throw SchemaError(where + ".kind: missing");
        const std::string kind = s["kind"].get<std::string>();
        WallSegment seg;
        if (kind == "wall")
            seg.kind = SegmentKind::Wall;
        else if (kind == "door")
            seg.kind = SegmentKind::Door;
        else if (kind == "window")
            seg.kind = SegmentKind::Window;
        else
            throw SchemaError(where + ".kind: unknown kind '" + kind + "'");
        if (!s.contains("p1")) throw SchemaError(where + ".p1: missing");
        if (!s.contains("p2")) throw SchemaError(where + ".p2: missing");
        seg.start = detail::parse_point(s["p1"], where + ".p1");
        seg.end = detail::parse_point(s["p2"], where + ".p2");
        if (seg.start == seg.end) throw SchemaError(where + ": zero-length segment");
        out.segments.push_back(seg);
    }
    return out;
}

inline SceneDescription parse_scene_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open scene file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_scene_json(text);
}

inline nlohmann::json scene_to_json(const SceneDescription& d) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : d.segments)
        segs.push_back({{"kind", to_string(s.kind)}, {"p1", {s.start.x, s.start.y}}, {"p2", {s.end.x, s.end.y}}});
    return {{"bounds", {d.bounds.xmin, d.bounds.ymin, d.bounds.xmax, d.bounds.ymax}},
            {"interior_seed", {d.interior_seed.x, d.interior_seed.y}},
            {"segments", segs}};
}

inline void write_scene_file(const std::string& path, const SceneDescription& d) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << scene_to_json(d).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Geometry

inline double point_segment_distance(WorldPoint p, WorldPoint a, WorldPoint b) noexcept {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

// Bridges Wall endpoints that lie closer than tol (and are not already
// coincident or connected). Input segments are returned unchanged, bridges
// appended in deterministic pair order.
inline std::vector<WallSegment> join_endpoints(const std::vector<WallSegment>& segments, double tol = kJoinTolerance) {
    if (tol < 0) throw ParamError("join tolerance must be non-negative");
    using Key = std::tuple<double, double, double, double>;
    const auto key = [](WorldPoint a, WorldPoint b) {
        if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
        return Key{a.x, a.y, b.x, b.y};
    };
    std::set<Key> connected;
    for (const auto& s : segments) connected.insert(key(s.start, s.end));

    struct End {
        WorldPoint p;
        std::size_t seg;
    };
    std::vector<End> ends;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].kind != SegmentKind::Wall) continue;
        ends.push_back({segments[i].start, i});
        ends.push_back({segments[i].end, i});
    }

    std::vector<WallSegment> out = segments;
    for (std::size_t i = 0; i < ends.size(); ++i) {
        for (std::size_t j = i + 1; j < ends.size(); ++j) {
            if (ends[i].seg == ends[j].seg) continue;
            const WorldPoint a = ends[i].p, b = ends[j].p;
            const double d = std::hypot(a.x - b.x, a.y - b.y);
            if (d <= 0.0 || d >= tol) continue;
            if (!connected.insert(key(a, b)).second) continue;
            out.push_back({a, b, SegmentKind::Wall});
        }
    }
    return out;
}

inline GridMap make_grid_for_bounds(const Bounds& bounds, double resolution, CellState fill = CellState::Unknown) {
    const int w = static_cast<int>(std::ceil((bounds.xmax - bounds.xmin) / resolution - 1e-9));
    const int h = static_cast<int>(std::ceil((bounds.ymax - bounds.ymin) / resolution - 1e-9));
    return GridMap(std::max(w, 1), std::max(h, 1), resolution, {bounds.xmin, bounds.ymin}, fill);
}

// Distance between segment ab and the closed axis-aligned box [lo, hi].
inline double segment_box_distance(WorldPoint a, WorldPoint b, WorldPoint lo, WorldPoint hi) noexcept {
    // Liang-Barsky clip: zero if the segment enters the box.
    double t0 = 0.0, t1 = 1.0;
    const double d[2] = {b.x - a.x, b.y - a.y};
    const double p0[2] = {a.x, a.y}, mn[2] = {lo.x, lo.y}, mx[2] = {hi.x, hi.y};
    bool hits = true;
    for (int k = 0; k < 2 && hits; ++k) {
        if (d[k] == 0.0) {
            hits = p0[k] >= mn[k] && p0[k] <= mx[k];
            continue;
        }
        double ta = (mn[k] - p0[k]) / d[k], tb = (mx[k] - p0[k]) / d[k];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        hits = t0 <= t1;
    }
    if (hits) return 0.0;
    const auto point_box = [&](WorldPoint p) {
        return std::hypot(std::max({lo.x - p.x, 0.0, p.x - hi.x}), std::max({lo.y - p.y, 0.0, p.y - hi.y}));
    };
    double best = std::min(point_box(a), point_box(b));
    for (const WorldPoint c : {lo, hi, WorldPoint{lo.x, hi.y}, WorldPoint{hi.x, lo.y}})
        best = std::min(best, point_segment_distance(c, a, b));
    return best;
}

// Marks every cell whose square meets the wall dilated to wall_thickness.
// Any cell the segment crosses is marked, and a coarse wall cell always
// contains a marked cell of a finer grid.
inline void rasterize_walls(GridMap& map, const std::vector<WallSegment>& segments, double wall_thickness) {
    const double res = map.resolution();
    const double radius = 0.5 * wall_thickness + 1e-9;
    for (const auto& s : segments) {
        if (s.kind != SegmentKind::Wall) continue;
        const double x0 = std::min(s.start.x, s.end.x) - radius, x1 = std::max(s.start.x, s.end.x) + radius;
        const double y0 = std::min(s.start.y, s.end.y) - radius, y1 = std::max(s.start.y, s.end.y) + radius;
        const int c0 = std::max(0, static_cast<int>(std::floor((x0 - map.origin().x) / res)));
        const int c1 = std::min(map.width() - 1, static_cast<int>(std::floor((x1 - map.origin().x) / res)));
        const int r0 = std::max(0, static_cast<int>(std::floor((y0 - map.origin().y) / res)));
        const int r1 = std::min(map.height() - 1, static_cast<int>(std::floor((y1 - map.origin().y) / res)));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) {
                const WorldPoint lo{map.origin().x + c * res, map.origin().y + r * res};
                const WorldPoint hi{lo.x + res, lo.y + res};
                if (segment_box_distance(s.start, s.end, lo, hi) <= radius) map.set(r, c, CellState::Occupied);
            }
    }
}

// Walls become Occupied, the 4-connected non-wall region around
// interior_seed becomes Free, everything else stays Unknown.
inline GridMap rasterize(const std::vector<WallSegment>& segments, const Bounds& bounds, WorldPoint interior_seed,
                         double resolution = kDefaultResolution, double wall_thickness = kWallThickness) {
    GridMap map = make_grid_for_bounds(bounds, resolution);
    rasterize_walls(map, segments, wall_thickness);
    const CellIndex seed = world_to_cell(map, interior_seed);
    if (map.at(seed) == CellState::Occupied) throw SeedOnWall("interior seed lies on a wall cell");
    for (const CellIndex c : flood_fill(map, seed, is_state(CellState::Unknown), 4)) map.set(c, CellState::Free);
    return map;
}

inline Scene build_scene(const SceneDescription& desc, double resolution = kDefaultResolution,
                         double wall_thickness = kWallThickness) {
    Scene s;
    s.bounds = desc.bounds;
    s.segments = join_endpoints(desc.segments);
    s.interior_seed = desc.interior_seed;
    s.floorplan = rasterize(s.segments, desc.bounds, desc.interior_seed, resolution, wall_thickness);
    s.cluttered = s.floorplan;
    s.free_area = static_cast<double>(count_cells(s.floorplan, CellState::Free)) * resolution * resolution;
    return s;
}

inline SceneDescription describe(const Scene& s) { return {s.bounds, s.interior_seed, s.segments}; }

// ---------------------------------------------------------------------------
// Clutter

inline int count_components(const GridMap& map, CellState state) {
    return label_components(map.width(), map.height(), [&](CellIndex c) { return map.at(c) == state; }, 4).second;
}

// Places round(density * free_area) random obstacles on Free cells. A
// placement is retried (up to 100 times) if it overlaps non-Free cells,
// comes within `clearance` of an Occupied cell, or splits the Free region.
inline ClutterResult inject_clutter(const Scene& scene, const ClutterParams& params, std::uint64_t seed) {
    if (!(params.min_size > 0) || params.min_size > params.max_size) throw ParamError("clutter sizes must satisfy 0 < min <= max");
    if (params.density < 0 || params.clearance < 0) throw ParamError("clutter density and clearance must be >= 0");
    if (!params.rectangles && !params.discs) throw ParamError("clutter needs at least one shape");

    ClutterResult out{scene.cluttered, 0, 0, 0};
    GridMap& map = out.map;
    const double res = map.resolution();
    out.requested = static_cast<int>(std::lround(params.density * scene.free_area));
    if (out.requested == 0) return out;
    if (count_cells(map, CellState::Free) == 0) throw ParamError("scene has no free cells");

    Rng rng(seed);
    const int clear_cells = static_cast<int>(std::ceil(params.clearance / res - 1e-9));
    const int base_components = count_components(map, CellState::Free);

    for (int n = 0; n < out.requested; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            std::vector<std::size_t> free_cells;
            for (std::size_t i = 0; i < map.size(); ++i)
                if (map.bytes()[i] == static_cast<std::uint8_t>(CellState::Free)) free_cells.push_back(i);
            if (free_cells.empty()) break;
            const CellIndex center = map.cell_at(free_cells[rng.below(free_cells.size())]);

            const bool disc = params.discs && (!params.rectangles || rng.below(2) == 0);
            const double w = rng.uniform_real(params.min_size, params.max_size);
            const double h = disc ? w : rng.uniform_real(params.min_size, params.max_size);
            const int span = static_cast<int>(std::ceil(std::max(w, h) / (2 * res))) + 1;

            std::vector<CellIndex> cells;
            bool ok = true;
            for (int dr = -span; dr <= span && ok; ++dr) {
                for (int dc = -span; dc <= span && ok; ++dc) {
                    const double ox = dc * res, oy = dr * res;
                    const bool inside = disc ? std::hypot(ox, oy) <= 0.5 * w + 1e-9
                                             : std::abs(ox) <= 0.5 * w + 1e-9 && std::abs(oy) <= 0.5 * h + 1e-9;
                    if (!inside) continue;
                    const CellIndex c{center.row + dr, center.col + dc};
                    if (!map.in_bounds(c) || map.at(c) != CellState::Free) ok = false;
                    else cells.push_back(c);
                }
            }
            if (!ok || cells.empty()) continue;

            // Clearance measured cell-center to cell-center.
            for (const CellIndex c : cells) {
                for (int dr = -clear_cells; dr <= clear_cells && ok; ++dr)
                    for (int dc = -clear_cells; dc <= clear_cells && ok; ++dc) {
                        if (std::hypot(dr, dc) * res >= params.clearance - 1e-9 && (dr != 0 || dc != 0)) continue;
                        const CellIndex q{c.row + dr, c.col + dc};
                        if (map.in_bounds(q) && map.at(q) == CellState::Occupied) ok = false;
                    }
                if (!ok) break;
            }
            if (!ok) continue;

            GridMap trial = map;
            for (const CellIndex c : cells) trial.set(c, CellState::Occupied);
            if (count_components(trial, CellState::Free) > base_components) continue;
            map = std::move(trial);
            placed = true;
        }
        if (placed) ++out.placed;
        else ++out.failed;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic floor plans

struct SizeRange {
    double min = 4.0;
    double max = 6.0;
};

// rooms_x by rooms_y grid of rectangular rooms sharing walls. Every shared
// wall carries one door opening. Room sides are multiples of the grid
// resolution and walls sit on cell centers.
inline Scene generate_synthetic_floorplan(std::uint64_t seed, int rooms_x, int rooms_y, SizeRange room_size = {},
                                          double door_width = 0.9, double resolution = kDefaultResolution) {
    if (rooms_x < 1 || rooms_y < 1) throw ParamError("rooms_x and rooms_y must be >= 1");
    if (room_size.min < 3 * kWallThickness) throw ParamError("room size below three wall thicknesses");
    if (room_size.max < room_size.min) throw ParamError("room size range is inverted");
    if (!(door_width > 0)) throw ParamError("door width must be positive");
    constexpr double kDoorMargin = 0.8;  // door edge to room corner
    if (room_size.min < door_width + 2 * kDoorMargin) throw ParamError("rooms too small to hold a door");

    Rng rng(derive_seed(seed, {0x5CE7E}));
    const auto sample_cells = [&] {
        const long long lo = static_cast<long long>(std::ceil(room_size.min / resolution - 1e-9));
        const long long hi = std::max(lo, static_cast<long long>(std::floor(room_size.max / resolution + 1e-9)));
        return static_cast<int>(rng.uniform_int(lo, hi));
    };
    std::vector<int> xs{0}, ys{0};  // wall positions in cells
    for (int i = 0; i < rooms_x; ++i) xs.push_back(xs.back() + sample_cells());
    for (int j = 0; j < rooms_y; ++j) ys.push_back(ys.back() + sample_cells());
    const auto at = [&](int cells) { return cells * resolution; };

    SceneDescription d;
    const double W = at(xs.back()), H = at(ys.back());
    const double margin = 5.5 * resolution;  // puts walls on cell centers
    d.bounds = {-margin, -margin, W + margin, H + margin};
    d.interior_seed = {at(xs[0] + xs[1]) / 2.0 + 0.5 * resolution, at(ys[0] + ys[1]) / 2.0 + 0.5 * resolution};

    d.segments.push_back({{0, 0}, {W, 0}, SegmentKind::Wall});
    d.segments.push_back({{W, 0}, {W, H}, SegmentKind::Wall});
    d.segments.push_back({{W, H}, {0, H}, SegmentKind::Wall});
    d.segments.push_back({{0, H}, {0, 0}, SegmentKind::Wall});

    const int margin_cells = static_cast<int>(std::ceil(kDoorMargin / resolution - 1e-9));
    const int door_cells = static_cast<int>(std::ceil(door_width / resolution - 1e-9));
    // Splits the wall lo..hi (in cells along `along`) at a random door.
    const auto wall_with_door = [&](int lo, int hi, auto&& point) {
        const int first = lo + margin_cells;
        const int last = std::max(first, hi - margin_cells - door_cells);
        const double g0 = at(static_cast<int>(rng.uniform_int(first, last)));
        const double g1 = g0 + door_width;
        d.segments.push_back({point(at(lo)), point(g0), SegmentKind::Wall});
        d.segments.push_back({point(g0), point(g1), SegmentKind::Door});
        d.segments.push_back({point(g1), point(at(hi)), SegmentKind::Wall});
    };
    for (int i = 1; i < rooms_x; ++i)
        for (int j = 0; j < rooms_y; ++j)
            wall_with_door(ys[j], ys[j + 1], [&](double y) { return WorldPoint{at(xs[i]), y}; });
    for (int j = 1; j < rooms_y; ++j)
        for (int i = 0; i < rooms_x; ++i)
            wall_with_door(xs[i], xs[i + 1], [&](double x) { return WorldPoint{x, at(ys[j])}; });

    return build_scene(d, resolution);
}

// Scene-size buckets used when aggregating experiments.
inline std::string scene_class(double free_area) {
    if (free_area < 200.0) return "small";
    if (free_area <= 600.0) return "middle";
    return "large";
}

}  // namespace fpx
