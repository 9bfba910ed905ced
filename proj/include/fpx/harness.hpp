#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fpx/error.hpp"
#include "fpx/frontier.hpp"
#include "fpx/grid.hpp"
#include "fpx/pgm.hpp"
#include "fpx/prediction.hpp"
#include "fpx/rng.hpp"
#include "fpx/scene.hpp"
#include "fpx/strategy.hpp"

namespace fpx {

// ---------------------------------------------------------------------------
// Experiment specification

// A scene is either a file or a generator invocation.
struct SceneSource {
    std::string file;
    int rooms_x = 0;
    int rooms_y = 0;
    std::uint64_t seed = 0;
    SizeRange room_size;
    double door_width = 0.9;

    bool generated() const noexcept { return file.empty(); }
    std::string name() const {
        if (!generated()) return std::filesystem::path(file).stem().string();
        return "gen_" + std::to_string(rooms_x) + "x" + std::to_string(rooms_y) + "_s" + std::to_string(seed);
    }
};

struct ExperimentSpec {
    std::vector<SceneSource> scenes;
    std::optional<ClutterParams> clutter;
    std::vector<Strategy> strategies;
    PredictorEndpoint predictor;
    int repeats = 1;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = hardware concurrency
    ExploreConfig explore;
};

inline std::pair<int, int> parse_rooms(const std::string& s) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument("");
        std::size_t a = 0, b = 0;
        const int rx = std::stoi(s.substr(0, x), &a), ry = std::stoi(s.substr(x + 1), &b);
        if (a != x || b != s.size() - x - 1 || rx < 1 || ry < 1) throw std::invalid_argument("");
        return {rx, ry};
    } catch (const std::logic_error&) {
        throw ParamError("rooms must look like NxM with N, M >= 1, got '" + s + "'");
    }
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("experiment spec: missing '") + key + "'");
    return j.at(key);
}

}  // namespace detail

// Missing keys keep their defaults.
inline ExploreConfig parse_explore_config(const nlohmann::json& e) {
    try {
        ExploreConfig c;
        if (!e.is_object()) throw SchemaError("explore config must be a JSON object");
        c.k = e.value("k", c.k);
        c.lambda = e.value("lambda", c.lambda);
        c.gain_radius = e.value("gain_radius", c.gain_radius);
        c.sense_every = e.value("sense_every", c.sense_every);
        c.step_cap = e.value("step_cap", c.step_cap);
        c.min_cluster = e.value("min_cluster", c.min_cluster);
        c.lidar.range = e.value("lidar_range", c.lidar.range);
        c.lidar.rays = e.value("lidar_rays", c.lidar.rays);
        c.planner.inflation_cells = e.value("inflation_cells", c.planner.inflation_cells);
        c.timing = e.value("timing", c.timing);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(std::string("explore config: ") + ex.what());
    }
}

// Relative scene file paths are resolved against base_dir.
inline ExperimentSpec parse_experiment_spec(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    try {
        ExperimentSpec spec;
        if (!j.is_object()) throw SchemaError("experiment spec must be a JSON object");
        for (const auto& s : detail::require(j, "scenes")) {
            SceneSource src;
            if (s.contains("file")) {
                std::filesystem::path p = s.at("file").get<std::string>();
                if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
                src.file = p.string();
            } else if (s.contains("generate")) {
                const auto& g = s.at("generate");
                std::tie(src.rooms_x, src.rooms_y) = parse_rooms(detail::require(g, "rooms").get<std::string>());
                src.seed = g.value("seed", std::uint64_t{0});
                src.room_size.min = g.value("room_min", src.room_size.min);
                src.room_size.max = g.value("room_max", src.room_size.max);
                src.door_width = g.value("door_width", src.door_width);
            } else {
                throw SchemaError("experiment spec: each scene needs 'file' or 'generate'");
            }
            spec.scenes.push_back(src);
        }
        if (spec.scenes.empty()) throw SchemaError("experiment spec: 'scenes' is empty");
        if (j.contains("clutter")) {
            ClutterParams c;
            const auto& cj = j.at("clutter");
            c.density = cj.value("density", c.density);
            c.min_size = cj.value("min_size", c.min_size);
            c.max_size = cj.value("max_size", c.max_size);
            c.clearance = cj.value("clearance", c.clearance);
            spec.clutter = c;
        }
        for (const auto& s : detail::require(j, "strategies")) spec.strategies.push_back(parse_strategy(s.get<std::string>()));
        if (spec.strategies.empty()) throw SchemaError("experiment spec: 'strategies' is empty");
        spec.predictor = PredictorEndpoint::parse(j.value("predictor", std::string("null")));
        spec.repeats = j.value("repeats", 1);
        if (spec.repeats < 1) throw SchemaError("experiment spec: repeats must be >= 1");
        spec.output_dir = j.value("output_dir", spec.output_dir);
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.workers = j.value("workers", 0);
        if (spec.workers < 0) throw SchemaError("experiment spec: workers must be >= 0");
        if (j.contains("explore")) spec.explore = parse_explore_config(j.at("explore"));
        spec.explore.validate();
        for (const auto& s : spec.scenes)
            if (!s.generated() && !std::filesystem::exists(s.file)) throw SchemaError("experiment spec: scene file not found: " + s.file);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("experiment spec: ") + e.what());
    }
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return parse_experiment_spec(j, std::filesystem::path(path).parent_path());
}

inline Scene load_scene(const SceneSource& src) {
    if (!src.generated()) return build_scene(parse_scene_file(src.file));
    return generate_synthetic_floorplan(src.seed, src.rooms_x, src.rooms_y, src.room_size, src.door_width);
}

// ---------------------------------------------------------------------------
// CSV tables

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw IoError("CSV has no column '" + name + "'");
    }
    const std::string& at(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(f, line)) throw IoError(path + ": empty CSV");
    t.header = detail::split_csv_line(line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        t.rows.push_back(detail::split_csv_line(line));
        if (t.rows.back().size() != t.header.size()) throw IoError(path + ": ragged CSV row");
    }
    return t;
}

namespace detail {

// Keeps free text from breaking the comma-separated layout.
inline std::string csv_text(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Batch runs

struct RunRow {
    std::string run_id;
    std::string scene;
    std::string scene_class;
    Strategy strategy = Strategy::NBV;
    int repeat = 0;
    std::uint64_t seed = 0;
    std::string status;  // a Termination name, or "error"
    double path_length = 0;
    double coverage = 0;
    std::size_t decisions = 0;
    std::string error;
};

struct AggregateRow {
    std::string scene_class;
    Strategy strategy = Strategy::NBV;
    std::size_t runs = 0;
    double mean_path = 0;
    double std_path = 0;  // sample standard deviation, 0 for a single run
    double mean_coverage = 0;
};

struct BatchResult {
    std::vector<RunRow> runs;
    std::vector<AggregateRow> aggregate;
    std::size_t failed = 0;

    // A batch fails when more than 10% of its runs raised.
    bool ok() const noexcept { return failed * 10 <= runs.size(); }
};

inline constexpr const char* kRunsCsvHeader =
    "run_id,scene,scene_class,strategy,repeat,seed,status,path_length_m,coverage_pct,decisions,error";
inline constexpr const char* kAggregateCsvHeader = "scene_class,strategy,runs,mean_path_m,std_path_m,mean_coverage_pct";

// Mean and sample std of path length per (scene class, strategy) over the
// runs that did not raise. Rows are ordered by class name, then by the
// order of strategies in `order`.
inline std::vector<AggregateRow> aggregate_runs(const std::vector<RunRow>& runs, const std::vector<Strategy>& order) {
    std::map<std::pair<std::string, std::size_t>, std::vector<const RunRow*>> groups;
    for (const auto& r : runs) {
        if (r.status == "error") continue;
        const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), r.strategy) - order.begin());
        groups[{r.scene_class, pos}].push_back(&r);
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, rows] : groups) {
        AggregateRow a;
        a.scene_class = key.first;
        a.strategy = rows.front()->strategy;
        a.runs = rows.size();
        for (const RunRow* r : rows) {
            a.mean_path += r->path_length;
            a.mean_coverage += r->coverage;
        }
        a.mean_path /= static_cast<double>(a.runs);
        a.mean_coverage /= static_cast<double>(a.runs);
        if (a.runs > 1) {
            double ss = 0;
            for (const RunRow* r : rows) ss += (r->path_length - a.mean_path) * (r->path_length - a.mean_path);
            a.std_path = std::sqrt(ss / static_cast<double>(a.runs - 1));
        }
        out.push_back(a);
    }
    return out;
}

inline void write_runs_csv(const std::string& path, const std::vector<RunRow>& runs) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << kRunsCsvHeader << '\n';
    for (const auto& r : runs)
        f << r.run_id << ',' << r.scene << ',' << r.scene_class << ',' << to_string(r.strategy) << ',' << r.repeat << ','
          << r.seed << ',' << r.status << ',' << detail::format_double(r.path_length) << ',' << detail::format_double(r.coverage) << ','
          << r.decisions << ',' << detail::csv_text(r.error) << '\n';
}

inline void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << kAggregateCsvHeader << '\n';
    for (const auto& a : rows)
        f << a.scene_class << ',' << to_string(a.strategy) << ',' << a.runs << ',' << detail::format_double(a.mean_path) << ','
          << detail::format_double(a.std_path) << ',' << detail::format_double(a.mean_coverage) << '\n';
}

// Per-run seed; shared by every strategy so they start from the same pose.
inline std::uint64_t run_seed(std::uint64_t global, std::size_t scene_index, int repeat) {
    return derive_seed(global, {scene_index, static_cast<std::uint64_t>(repeat)});
}

// Runs scenes x strategies x repeats on a bounded worker pool and writes
// runs/<id>.csv, maps/<id>.pgm, runs.csv and aggregate.csv under
// spec.output_dir. A run that raises is recorded and the batch goes on.
inline BatchResult run_batch(const ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    const fs::path out = spec.output_dir;
    fs::create_directories(out / "runs");
    fs::create_directories(out / "maps");

    std::vector<Scene> scenes;
    for (std::size_t i = 0; i < spec.scenes.size(); ++i) {
        Scene s = load_scene(spec.scenes[i]);
        if (spec.clutter) s.cluttered = inject_clutter(s, *spec.clutter, derive_seed(spec.seed, {0xC1u, i})).map;
        scenes.push_back(std::move(s));
    }

    BatchResult result;
    for (std::size_t i = 0; i < spec.scenes.size(); ++i)
        for (const Strategy st : spec.strategies)
            for (int r = 0; r < spec.repeats; ++r) {
                RunRow row;
                row.scene = spec.scenes[i].name();
                row.run_id = "s" + std::to_string(i) + "_" + to_string(st) + "_r" + std::to_string(r);
                row.scene_class = scene_class(scenes[i].free_area);
                row.strategy = st;
                row.repeat = r;
                row.seed = run_seed(spec.seed, i, r);
                result.runs.push_back(row);
            }
    std::vector<std::size_t> scene_of;
    for (std::size_t i = 0; i < spec.scenes.size(); ++i)
        scene_of.insert(scene_of.end(), spec.strategies.size() * static_cast<std::size_t>(spec.repeats), i);

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < result.runs.size();) {
            RunRow& row = result.runs[j];
            try {
                const Scene& scene = scenes[scene_of[j]];
                const auto predictor = make_predictor(spec.predictor, scene.floorplan);
                RunLog log = run_exploration(scene, row.strategy, *predictor, spec.explore, row.seed);
                log.run_id = row.run_id;
                write_run_csv((out / "runs" / (row.run_id + ".csv")).string(), log);
                write_pgm((out / "maps" / (row.run_id + ".pgm")).string(), log.final_map);
                row.status = to_string(log.termination);
                row.path_length = log.path_length;
                row.coverage = log.coverage;
                row.decisions = log.decisions.size();
            } catch (const std::exception& e) {
                row.status = "error";
                row.error = e.what();
            }
        }
    };
    std::size_t n_workers = spec.workers > 0 ? static_cast<std::size_t>(spec.workers)
                                             : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min(n_workers, result.runs.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (const auto& r : result.runs) result.failed += r.status == "error";
    result.aggregate = aggregate_runs(result.runs, spec.strategies);
    write_runs_csv((out / "runs.csv").string(), result.runs);
    write_aggregate_csv((out / "aggregate.csv").string(), result.aggregate);
    return result;
}

// ---------------------------------------------------------------------------
// Training data

struct DatasetReport {
    std::size_t samples = 0;
    std::vector<std::pair<std::string, std::size_t>> shortfall;  // scene, samples missing
};

// For each scene, explores the cluttered map with NBV and at every decision
// writes the window around the chosen frontier (x), the floor plan window
// masked to x's observed cells (denoised) and the full floor plan window
// (completed) under out_dir/<scene>/<step>_*.pgm, plus one line per sample
// in out_dir/index.jsonl.
inline DatasetReport make_dataset(const std::vector<std::pair<std::string, Scene>>& scenes, std::size_t samples_per_scene,
                                  std::uint64_t seed, const std::string& out_dir, const ExploreConfig& cfg = {}) {
    namespace fs = std::filesystem;
    if (samples_per_scene == 0) throw ParamError("samples per scene must be >= 1");
    fs::create_directories(out_dir);
    std::ofstream index(fs::path(out_dir) / "index.jsonl", std::ios::binary);
    if (!index) throw IoError("cannot write " + out_dir + "/index.jsonl");

    DatasetReport report;
    NullPredictor null_predictor;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const auto& [name, scene] = scenes[i];
        const fs::path dir = fs::path(out_dir) / name;
        fs::create_directories(dir);
        std::size_t emitted = 0;
        std::set<long> steps;
        const DecisionHook hook = [&](const GridMap& observed, const FrontierCluster& f, long step) {
            if (!steps.insert(step).second) return true;  // same pose as the previous sample
            const LocalWindow x = extract_window(observed, f, kWindowHalfWidth * observed.resolution());
            const GridMap completed = clone_region(scene.floorplan, f.representative, kWindowHalfWidth);
            GridMap denoised = completed;
            for (std::size_t k = 0; k < denoised.size(); ++k)
                if (x.window.bytes()[k] == static_cast<std::uint8_t>(CellState::Unknown))
                    denoised.set(denoised.cell_at(k), CellState::Unknown);
            const std::string stem = std::to_string(step);
            write_pgm((dir / (stem + "_x.pgm")).string(), x.window);
            write_pgm((dir / (stem + "_denoised.pgm")).string(), denoised);
            write_pgm((dir / (stem + "_completed.pgm")).string(), completed);
            nlohmann::json rec = {{"scene", name},
                                  {"step", step},
                                  {"frontier", {f.representative.row, f.representative.col}},
                                  {"x", name + "/" + stem + "_x.pgm"},
                                  {"denoised", name + "/" + stem + "_denoised.pgm"},
                                  {"completed", name + "/" + stem + "_completed.pgm"}};
            index << rec.dump() << '\n';
            ++emitted;
            return emitted < samples_per_scene;
        };
        run_exploration(scene, Strategy::NBV, null_predictor, cfg, derive_seed(seed, {i}), {}, hook);
        report.samples += emitted;
        if (emitted < samples_per_scene) report.shortfall.emplace_back(name, samples_per_scene - emitted);
    }
    return report;
}

struct DatasetRecord {
    std::string scene;
    long step = 0;
    CellIndex frontier;
    std::string x, denoised, completed;  // paths relative to the dataset root
};

inline std::vector<DatasetRecord> read_dataset_index(const std::string& out_dir) {
    const std::string path = (std::filesystem::path(out_dir) / "index.jsonl").string();
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::vector<DatasetRecord> out;
    std::string line;
    try {
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("scene").get<std::string>(), j.at("step").get<long>(),
                           {j.at("frontier").at(0).get<int>(), j.at("frontier").at(1).get<int>()},
                           j.at("x").get<std::string>(), j.at("denoised").get<std::string>(),
                           j.at("completed").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scripted navigation scenario

struct NavigationScenario {
    SceneDescription description;
    WorldPoint start;
    WorldPoint target;
};

// A row of rooms along the south side and a corridor along the north. The
// start room's east door opens onto a chain of rooms pointing straight at
// the target that ends in a solid wall; the only way through is the north
// door, the corridor, and the target room's north door. A policy that
// trusts unknown space walks into the chain.
inline NavigationScenario navigation_scenario() {
    std::vector<WallSegment> w;
    const auto wall = [&](double x0, double y0, double x1, double y1) { w.push_back({{x0, y0}, {x1, y1}, SegmentKind::Wall}); };
    const auto hwall = [&](double y, double x0, double x1, std::vector<double> doors) {
        double x = x0;
        for (const double d : doors) {
            wall(x, y, d - 0.5, y);
            x = d + 0.5;
        }
        wall(x, y, x1, y);
    };
    const auto vwall = [&](double x, double y0, double y1, std::vector<double> doors) {
        double y = y0;
        for (const double d : doors) {
            wall(x, y, x, d - 0.5);
            y = d + 0.5;
        }
        wall(x, y, x, y1);
    };
    // Coordinates sit on cell centers so walls are one cell thick.
    const double x_max = 30.1, y_max = 9.1, y_mid = 6.1;
    hwall(0.1, 0.1, x_max, {});
    hwall(y_max, 0.1, x_max, {});
    vwall(0.1, 0.1, y_max, {});
    vwall(x_max, 0.1, y_max, {});
    hwall(y_mid, 0.1, x_max, {3.1, 27.1});
    vwall(6.1, 0.1, y_mid, {3.1});
    vwall(12.1, 0.1, y_mid, {3.1});
    vwall(18.1, 0.1, y_mid, {3.1});
    vwall(24.1, 0.1, y_mid, {});
    return {{{-0.5, -0.5, x_max + 0.5, y_max + 0.5}, {2.1, 2.1}, w}, {3.1, 3.1}, {27.1, 3.1}};
}

}  // namespace fpx
