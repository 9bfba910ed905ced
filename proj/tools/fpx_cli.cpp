#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fpx/harness.hpp"
#include "fpx/pgm.hpp"
#include "fpx/prediction.hpp"
#include "fpx/protocol.hpp"
#include "fpx/scene.hpp"
#include "fpx/strategy.hpp"
#include "fpx/topology.hpp"

namespace fs = std::filesystem;

namespace {

// Invalid user input discovered after flag parsing; reported like a usage error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    std::string config;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--config", c.config, "JSON config (experiment spec or explore parameters)")->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, out_help);
}

fpx::WorldPoint parse_point(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument("");
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::logic_error&) {
        throw UsageError("expected a point as x,y, got '" + s + "'");
    }
}

// Explore parameters from --config: either an experiment spec (its
// "explore" block) or a bare parameter object.
fpx::ExploreConfig explore_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream f(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw fpx::SchemaError(path + ": " + e.what());
    }
    if (j.is_object() && j.contains("explore")) return fpx::parse_explore_config(j.at("explore"));
    if (j.is_object() && j.contains("scenes")) return {};
    return fpx::parse_explore_config(j);
}

fpx::Scene load_scene_with_clutter(const std::string& path, double clutter, std::uint64_t seed) {
    fpx::Scene s = fpx::build_scene(fpx::parse_scene_file(path));
    if (clutter > 0) {
        fpx::ClutterParams p;
        p.density = clutter;
        s.cluttered = fpx::inject_clutter(s, p, fpx::derive_seed(seed, {0xC1u})).map;
    }
    return s;
}

fs::path out_dir(const std::string& out) {
    const fs::path p = out.empty() ? fs::path(".") : fs::path(out);
    fs::create_directories(p);
    return p;
}

void print_summary(const fpx::RunLog& log, const fs::path& csv, const fs::path& pgm) {
    std::cout << log.strategy << ": status=" << fpx::to_string(log.termination)
              << " path_m=" << fpx::detail::format_double(log.path_length) << " coverage_pct=" << fpx::detail::format_double(log.coverage)
              << " decisions=" << log.decisions.size() << '\n'
              << "wrote " << csv.string() << '\n'
              << "wrote " << pgm.string() << '\n';
}

// A deterministic tri-state window used to probe a predictor.
fpx::protocol::Frame probe_request() {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(fpx::kWindowSide) * fpx::kWindowSide);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const std::size_t r = i / fpx::kWindowSide, c = i % fpx::kWindowSide;
        const auto s = (r == 0 || c == 0) ? fpx::CellState::Occupied : (c < fpx::kWindowHalfWidth ? fpx::CellState::Free : fpx::CellState::Unknown);
        bytes[i] = static_cast<std::uint8_t>(s);
    }
    return fpx::protocol::make_request(fpx::kWindowSide, fpx::kWindowSide, std::move(bytes));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frontier exploration with map prediction: scenes, exploration runs, batches and datasets"};
    app.require_subcommand(1);

    // generate-scene
    Common gen_c;
    std::string gen_rooms;
    fpx::SizeRange gen_size;
    double gen_door = 0.9;
    auto* gen = app.add_subcommand("generate-scene", "Generate a synthetic floor plan (scene JSON + PGM)");
    add_common(gen, gen_c, "Scene JSON path (PGM written alongside)");
    gen->add_option("--rooms", gen_rooms, "Room grid as NxM")->required();
    gen->add_option("--room-min", gen_size.min, "Minimum room side (m)");
    gen->add_option("--room-max", gen_size.max, "Maximum room side (m)");
    gen->add_option("--door-width", gen_door, "Door width (m)");

    // explore
    Common ex_c;
    std::string ex_scene, ex_strategy = "p2", ex_predictor = "oracle", ex_start;
    double ex_clutter = 0;
    auto* ex = app.add_subcommand("explore", "Explore one scene with one strategy");
    add_common(ex, ex_c, "Output directory");
    ex->add_option("--scene", ex_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
    ex->add_option("--strategy", ex_strategy, "nbv, tsp, p2 or nopre");
    ex->add_option("--predictor", ex_predictor, "null, oracle or external:host:port");
    ex->add_option("--clutter", ex_clutter, "Clutter density (obstacles per m^2), 0 for none");
    ex->add_option("--start", ex_start, "Start pose x,y (default: random free cell from the seed)");

    // navigate
    Common nav_c;
    std::string nav_scene, nav_policy = "predicted", nav_predictor = "oracle", nav_start, nav_target;
    auto* nav = app.add_subcommand("navigate", "Navigate to a target through unknown space");
    add_common(nav, nav_c, "Output directory");
    nav->add_option("--scene", nav_scene, "Scene JSON (default: built-in scripted scenario)")->check(CLI::ExistingFile);
    nav->add_option("--policy", nav_policy, "predicted or greedy");
    nav->add_option("--predictor", nav_predictor, "null, oracle or external:host:port");
    nav->add_option("--start", nav_start, "Start x,y (required with --scene)");
    nav->add_option("--target", nav_target, "Target x,y (required with --scene)");

    // batch
    Common batch_c;
    std::optional<std::uint64_t> batch_seed;
    auto* batch = app.add_subcommand("batch", "Run an experiment spec (scenes x strategies x repeats)");
    batch->add_option("--config", batch_c.config, "Experiment spec JSON")->required()->check(CLI::ExistingFile);
    batch->add_option("--seed", batch_seed, "Override the spec's global seed");
    batch->add_option("--out", batch_c.out, "Override the spec's output directory");

    // segment
    Common seg_c;
    std::string seg_map, seg_scene;
    double seg_door_radius = 0.6;
    auto* seg = app.add_subcommand("segment", "Segment a map into rooms; write DOT and JSON");
    add_common(seg, seg_c, "Output directory");
    auto* seg_map_opt = seg->add_option("--map", seg_map, "Map PGM")->check(CLI::ExistingFile);
    auto* seg_scene_opt = seg->add_option("--scene", seg_scene, "Scene JSON (its floor plan is segmented)")->check(CLI::ExistingFile);
    seg_map_opt->excludes(seg_scene_opt);
    seg->add_option("--door-radius", seg_door_radius, "Door mark radius (m)");

    // make-dataset
    Common ds_c;
    std::vector<std::string> ds_scenes;
    std::string ds_rooms = "3x2";
    int ds_generate = 0;
    std::size_t ds_samples = 10;
    double ds_clutter = 0.02;
    auto* ds = app.add_subcommand("make-dataset", "Emit training triplets from virtual NBV exploration");
    add_common(ds, ds_c, "Dataset directory");
    ds->add_option("--scene", ds_scenes, "Scene JSON (repeatable)")->check(CLI::ExistingFile);
    ds->add_option("--generate", ds_generate, "Number of synthetic scenes to generate");
    ds->add_option("--rooms", ds_rooms, "Room grid for generated scenes, NxM");
    ds->add_option("--samples", ds_samples, "Samples per scene");
    ds->add_option("--clutter", ds_clutter, "Clutter density, 0 for none");

    // predictor-check
    std::string pc_addr;
    int pc_timeout = 5000;
    auto* pc = app.add_subcommand("predictor-check", "Round-trip one request through a predictor endpoint");
    pc->add_option("--addr", pc_addr, "host:port")->required();
    pc->add_option("--timeout-ms", pc_timeout, "Socket timeout");

    // echo-server
    std::uint16_t es_port = 0;
    std::string es_bind = "127.0.0.1";
    auto* es = app.add_subcommand("echo-server", "Serve the predictor protocol, echoing each request");
    es->add_option("--port", es_port, "Port (0 picks one)");
    es->add_option("--bind", es_bind, "Bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    }

    try {
        if (*gen) {
            const auto [rx, ry] = fpx::parse_rooms(gen_rooms);
            if (gen_c.out.empty()) throw UsageError("generate-scene needs --out");
            const fpx::Scene s = fpx::generate_synthetic_floorplan(gen_c.seed, rx, ry, gen_size, gen_door);
            const fs::path json = gen_c.out;
            if (json.has_parent_path()) fs::create_directories(json.parent_path());
            fs::path pgm = json;
            pgm.replace_extension(".pgm");
            fpx::write_scene_file(json.string(), fpx::describe(s));
            fpx::write_pgm(pgm.string(), s.floorplan);
            std::cout << "scene " << rx << "x" << ry << " free_area_m2=" << fpx::detail::format_double(s.free_area)
                      << " class=" << fpx::scene_class(s.free_area) << '\n'
                      << "wrote " << json.string() << '\n'
                      << "wrote " << pgm.string() << '\n';
        } else if (*ex) {
            const fpx::Strategy strategy = fpx::parse_strategy(ex_strategy);
            const auto endpoint = fpx::PredictorEndpoint::parse(ex_predictor);
            const fpx::ExploreConfig cfg = explore_config(ex_c.config);
            const fpx::Scene scene = load_scene_with_clutter(ex_scene, ex_clutter, ex_c.seed);
            std::optional<fpx::WorldPoint> start;
            if (!ex_start.empty()) start = parse_point(ex_start);
            const auto predictor = fpx::make_predictor(endpoint, scene.floorplan);
            fpx::RunLog log = fpx::run_exploration(scene, strategy, *predictor, cfg, ex_c.seed, start);
            log.run_id = fs::path(ex_scene).stem().string() + "_" + ex_strategy + "_s" + std::to_string(ex_c.seed);
            const fs::path dir = out_dir(ex_c.out);
            fpx::write_run_csv((dir / (log.run_id + ".csv")).string(), log);
            fpx::write_pgm((dir / (log.run_id + ".pgm")).string(), log.final_map);
            print_summary(log, dir / (log.run_id + ".csv"), dir / (log.run_id + ".pgm"));
        } else if (*nav) {
            const fpx::NavPolicy policy = fpx::parse_nav_policy(nav_policy);
            const auto endpoint = fpx::PredictorEndpoint::parse(nav_predictor);
            const fpx::ExploreConfig cfg = explore_config(nav_c.config);
            fpx::NavigationScenario sc = fpx::navigation_scenario();
            std::string name = "scripted";
            if (!nav_scene.empty()) {
                if (nav_start.empty() || nav_target.empty()) throw UsageError("--scene needs --start and --target");
                sc.description = fpx::parse_scene_file(nav_scene);
                name = fs::path(nav_scene).stem().string();
            }
            if (!nav_start.empty()) sc.start = parse_point(nav_start);
            if (!nav_target.empty()) sc.target = parse_point(nav_target);
            const fpx::Scene scene = fpx::build_scene(sc.description);
            const auto predictor = fpx::make_predictor(endpoint, scene.floorplan);
            fpx::RunLog log = fpx::run_navigation(scene, policy, *predictor, sc.start, sc.target, cfg);
            log.run_id = name + "_nav_" + nav_policy;
            const fs::path dir = out_dir(nav_c.out);
            fpx::write_run_csv((dir / (log.run_id + ".csv")).string(), log);
            fpx::write_pgm((dir / (log.run_id + ".pgm")).string(), log.final_map);
            print_summary(log, dir / (log.run_id + ".csv"), dir / (log.run_id + ".pgm"));
        } else if (*batch) {
            fpx::ExperimentSpec spec = fpx::load_experiment_spec(batch_c.config);
            if (batch_seed) spec.seed = *batch_seed;
            if (!batch_c.out.empty()) spec.output_dir = batch_c.out;
            const fpx::BatchResult r = fpx::run_batch(spec);
            for (const auto& run : r.runs)
                if (run.status == "error") std::cerr << "run " << run.run_id << " failed: " << run.error << '\n';
            std::cout << "runs=" << r.runs.size() << " failed=" << r.failed << " aggregate_rows=" << r.aggregate.size()
                      << '\n'
                      << "wrote " << (fs::path(spec.output_dir) / "runs.csv").string() << '\n'
                      << "wrote " << (fs::path(spec.output_dir) / "aggregate.csv").string() << '\n';
            if (!r.ok()) {
                std::cerr << "error: more than 10% of runs failed\n";
                return 2;
            }
        } else if (*seg) {
            if (seg_map.empty() && seg_scene.empty()) throw UsageError("segment needs --map or --scene");
            const fpx::GridMap map =
                seg_map.empty() ? fpx::build_scene(fpx::parse_scene_file(seg_scene)).floorplan : fpx::read_pgm(seg_map);
            const fpx::RoomGraph g = fpx::segment_map(map, {}, seg_door_radius);
            const fs::path dir = out_dir(seg_c.out);
            std::ofstream(dir / "graph.dot") << fpx::to_dot(g);
            std::ofstream(dir / "segmentation.json") << fpx::segmentation_to_json(g).dump() << '\n';
            std::cout << "rooms=" << g.rooms << '\n'
                      << "wrote " << (dir / "graph.dot").string() << '\n'
                      << "wrote " << (dir / "segmentation.json").string() << '\n';
        } else if (*ds) {
            if (ds_scenes.empty() && ds_generate <= 0) throw UsageError("make-dataset needs --scene or --generate N");
            const fpx::ExploreConfig cfg = explore_config(ds_c.config);
            std::vector<std::pair<std::string, fpx::Scene>> scenes;
            for (const auto& p : ds_scenes)
                scenes.emplace_back(fs::path(p).stem().string(), load_scene_with_clutter(p, ds_clutter, ds_c.seed + scenes.size()));
            const auto [rx, ry] = fpx::parse_rooms(ds_rooms);
            for (int i = 0; i < ds_generate; ++i) {
                const std::uint64_t s = fpx::derive_seed(ds_c.seed, {0x5CE7Eu, static_cast<std::uint64_t>(i)});
                fpx::Scene scene = fpx::generate_synthetic_floorplan(s, rx, ry);
                if (ds_clutter > 0) {
                    fpx::ClutterParams p;
                    p.density = ds_clutter;
                    scene.cluttered = fpx::inject_clutter(scene, p, fpx::derive_seed(s, {0xC1u})).map;
                }
                scenes.emplace_back("gen" + std::to_string(i), std::move(scene));
            }
            const fs::path dir = ds_c.out.empty() ? fs::path("ds") : fs::path(ds_c.out);
            const fpx::DatasetReport rep = fpx::make_dataset(scenes, ds_samples, ds_c.seed, dir.string(), cfg);
            for (const auto& [name, missing] : rep.shortfall)
                std::cerr << "warning: scene " << name << " finished " << missing << " samples short of the quota\n";
            std::cout << "samples=" << rep.samples << '\n' << "wrote " << (dir / "index.jsonl").string() << '\n';
        } else if (*pc) {
            const fpx::protocol::Frame req = probe_request();
            fpx::protocol::Client client(pc_addr, pc_timeout);
            const auto t0 = std::chrono::steady_clock::now();
            const fpx::protocol::Frame reply = client.round_trip(req);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            if (reply.type == fpx::protocol::MessageType::Error) throw fpx::PredictorUnavailable("predictor error: " + reply.message());
            if (reply.type != fpx::protocol::MessageType::Response || reply.width != req.width || reply.height != req.height ||
                reply.payload.size() != req.payload.size())
                throw fpx::PredictorUnavailable("predictor reply has the wrong shape");
            std::cout << "round-trip OK " << pc_addr << ' ' << reply.width << 'x' << reply.height << ' '
                      << fpx::detail::format_double(ms) << " ms" << (reply.payload == req.payload ? " (echo)" : "") << '\n';
        } else if (*es) {
            fpx::protocol::EchoServer server(es_port, es_bind);
            std::cout << "listening on " << es_bind << ':' << server.port() << std::endl;
            server.wait();
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const fpx::ParamError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
