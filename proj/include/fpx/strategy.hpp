#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fpx/error.hpp"
#include "fpx/frontier.hpp"
#include "fpx/grid.hpp"
#include "fpx/pgm.hpp"
#include "fpx/planning.hpp"
#include "fpx/prediction.hpp"
#include "fpx/rng.hpp"
#include "fpx/scene.hpp"
#include "fpx/sensor.hpp"
#include "fpx/topology.hpp"
#include "fpx/tsp.hpp"

namespace fpx {

enum class Strategy { NBV, TSP, P2, NoPre };

inline const char* to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::NBV: return "nbv";
        case Strategy::TSP: return "tsp";
        case Strategy::P2: return "p2";
        case Strategy::NoPre: return "nopre";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& s) {
    for (const Strategy v : {Strategy::NBV, Strategy::TSP, Strategy::P2, Strategy::NoPre})
        if (s == to_string(v)) return v;
    throw ParamError("unknown strategy '" + s + "' (expected nbv, tsp, p2 or nopre)");
}

enum class NavPolicy { PredictedOptimistic, GreedyOptimistic };

inline const char* to_string(NavPolicy p) noexcept {
    return p == NavPolicy::PredictedOptimistic ? "predicted" : "greedy";
}

inline NavPolicy parse_nav_policy(const std::string& s) {
    if (s == "predicted") return NavPolicy::PredictedOptimistic;
    if (s == "greedy") return NavPolicy::GreedyOptimistic;
    throw ParamError("unknown navigation policy '" + s + "' (expected predicted or greedy)");
}

enum class Termination { Complete, NoReachableFrontier, StepCap, ReachedTarget };

inline const char* to_string(Termination t) noexcept {
    switch (t) {
        case Termination::Complete: return "complete";
        case Termination::NoReachableFrontier: return "no_reachable_frontier";
        case Termination::StepCap: return "step_cap";
        case Termination::ReachedTarget: return "reached_target";
    }
    return "?";
}

inline Termination parse_termination(const std::string& s) {
    for (const Termination t : {Termination::Complete, Termination::NoReachableFrontier, Termination::StepCap,
                                Termination::ReachedTarget})
        if (s == to_string(t)) return t;
    throw IoError("unknown run status '" + s + "'");
}

struct ExploreConfig {
    double k = 0.05;
    double lambda = 1.0;
    double gain_radius = 1.0;  // m
    int sense_every = 1;       // cells moved between sweeps
    long step_cap = 200000;    // cells moved before giving up
    int min_cluster = 3;
    double window_range = 12.0;  // m, prediction window half-width
    LidarConfig lidar;
    PlannerOptions planner;
    CriticalPointParams topology;
    double door_radius = 0.6;
    bool timing = false;  // record wall-clock time (makes logs non-reproducible)

    void validate() const {
        if (!(k > 0)) throw ParamError("k must be > 0");
        if (!(lambda >= 0)) throw ParamError("lambda must be >= 0");
        if (!(gain_radius > 0)) throw ParamError("gain_radius must be > 0");
        if (sense_every < 1) throw ParamError("sense_every must be >= 1");
        if (step_cap < 1) throw ParamError("step_cap must be >= 1");
        if (min_cluster < 1) throw ParamError("min_cluster must be >= 1");
    }
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Terms behind one goal choice. Fields that a policy does not use are NaN.
struct DecisionRecord {
    long step = 0;
    CellIndex chosen;
    double I = kNaN;      // m^2
    double d = kNaN;      // room hops, inf when disconnected
    double C = kNaN;      // m, navigation cost robot -> goal
    double C_hat = kNaN;  // m, optimistic cost goal -> target (navigation)
    double U = kNaN;
    double traveled = 0;  // m, at decision time
    double coverage = 0;  // percent
};

struct StepRecord {
    long step = 0;
    WorldPoint pose;
    double traveled = 0;
    double coverage = 0;  // percent
};

struct RunLog {
    std::string run_id;
    std::string strategy;
    std::vector<DecisionRecord> decisions;
    std::vector<StepRecord> steps;
    Termination termination = Termination::Complete;
    double path_length = 0;  // m
    double coverage = 0;     // percent, final
    double wall_clock_s = 0;
    GridMap final_map;

    bool complete() const noexcept { return termination != Termination::StepCap; }
};

// ---------------------------------------------------------------------------
// Utilities

namespace detail {

template <class Count>
double area_within(const GridMap& map, CellIndex center, double radius, Count&& counts) {
    const double res = map.resolution();
    const int reach = static_cast<int>(std::floor(radius / res + 1e-9));
    std::size_t n = 0;
    for (int dr = -reach; dr <= reach; ++dr)
        for (int dc = -reach; dc <= reach; ++dc) {
            const CellIndex c{center.row + dr, center.col + dc};
            if (!map.in_bounds(c) || std::hypot(dr, dc) * res > radius + 1e-9) continue;
            if (counts(c)) ++n;
        }
    return static_cast<double>(n) * res * res;
}

}  // namespace detail

// Area (m^2) within radius of the representative that is Unknown in the
// observed map and Free in the prediction.
inline double info_gain_predicted(const PredictedMap& predicted, const GridMap& observed, const FrontierCluster& f,
                                  double radius) {
    if (!(radius > 0)) throw ParamError("gain radius must be > 0");
    return detail::area_within(observed, f.representative, radius, [&](CellIndex c) {
        return observed.at(c) == CellState::Unknown && predicted.map.at(c) == CellState::Free;
    });
}

// Unknown area (m^2) within radius of the representative.
inline double info_gain_observed(const GridMap& observed, const FrontierCluster& f, double radius) {
    if (!(radius > 0)) throw ParamError("gain radius must be > 0");
    return detail::area_within(observed, f.representative, radius,
                               [&](CellIndex c) { return observed.at(c) == CellState::Unknown; });
}

// k * I * exp(-lambda * d) - C. A disconnected room (d = inf) contributes no gain.
inline double utility_value(double k, double I, double lambda, double d, double C) {
    const double gain = std::isinf(d) ? 0.0 : k * I * std::exp(-lambda * d);
    return gain - C;
}

// Prediction-guided utility for one frontier. graph may be null when the
// prediction could not be segmented; d is then taken as 0.
inline DecisionRecord utility_p2(const FrontierCluster& f, CellIndex robot, const PredictedMap& predicted,
                                 const GridMap& observed, const RoomGraph* graph, const ExploreConfig& cfg, double C) {
    DecisionRecord r;
    r.chosen = f.representative;
    r.I = info_gain_predicted(predicted, observed, f, cfg.gain_radius);
    r.d = 0.0;
    if (graph != nullptr) {
        const int hops = topo_distance(*graph, room_of(*graph, f.representative), room_of(*graph, robot));
        r.d = hops == kNoPath ? kInfinity : hops;
    }
    r.C = C;
    r.U = utility_value(cfg.k, r.I, cfg.lambda, r.d, C);
    return r;
}

inline DecisionRecord utility_nbv(const FrontierCluster& f, const GridMap& observed, const ExploreConfig& cfg, double C) {
    DecisionRecord r;
    r.chosen = f.representative;
    r.I = info_gain_observed(observed, f, cfg.gain_radius);
    r.C = C;
    r.U = cfg.k * r.I - C;
    return r;
}

// Index of the largest value; the first one wins ties, which for clusters in
// detect_frontiers order is the smallest representative.
inline std::size_t argmax_index(const std::vector<double>& values) {
    if (values.empty()) throw ParamError("argmax of an empty set");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

// First frontier of the cheapest open tour from the robot through every
// reachable frontier. Costs are navigation costs on the observed map.
inline std::size_t goal_tsp(const std::vector<FrontierCluster>& frontiers, CellIndex robot, const GridMap& observed,
                            const PlannerOptions& opt = {}) {
    const GridMap plan = inflate_obstacles(observed, opt.inflation_cells);
    const auto from_robot = cost_field(plan, robot, traversable_free);
    std::vector<std::size_t> reachable;
    for (std::size_t i = 0; i < frontiers.size(); ++i)
        if (std::isfinite(from_robot[plan.index(frontiers[i].representative)])) reachable.push_back(i);
    if (reachable.empty()) throw NoReachableFrontier("no frontier is reachable from the robot");
    if (reachable.size() == 1) return reachable[0];

    const std::size_t n = reachable.size() + 1;
    CostMatrix c(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < reachable.size(); ++a) {
        c[0][a + 1] = c[a + 1][0] = from_robot[plan.index(frontiers[reachable[a]].representative)];
        const auto field = cost_field(plan, frontiers[reachable[a]].representative, traversable_free);
        for (std::size_t b = a + 1; b < reachable.size(); ++b)
            c[a + 1][b + 1] = c[b + 1][a + 1] = field[plan.index(frontiers[reachable[b]].representative)];
    }
    return reachable[static_cast<std::size_t>(solve_open_tsp(c).front() - 1)];
}

// ---------------------------------------------------------------------------
// Simulation loops

namespace detail {

// Robot, observed map and bookkeeping shared by the exploration and
// navigation loops.
class Simulation {
public:
    Simulation(const GridMap& truth, CellIndex start, const ExploreConfig& cfg)
        : truth_(truth), cfg_(cfg), robot_(start),
          observed_(truth.width(), truth.height(), truth.resolution(), truth.origin()) {
        const auto reach = cost_field(truth, start, traversable_free);
        reachable_.assign(truth.size(), 0);
        for (std::size_t i = 0; i < truth.size(); ++i)
            if (std::isfinite(reach[i])) {
                reachable_[i] = 1;
                ++reachable_count_;
            }
    }

    const GridMap& observed() const noexcept { return observed_; }
    CellIndex robot() const noexcept { return robot_; }
    long step() const noexcept { return step_; }
    double traveled() const noexcept { return traveled_; }
    bool capped() const noexcept { return step_ >= cfg_.step_cap; }

    double coverage() const {
        std::size_t seen = 0;
        for (std::size_t i = 0; i < observed_.size(); ++i)
            seen += reachable_[i] && observed_.bytes()[i] == static_cast<std::uint8_t>(CellState::Free);
        return 100.0 * static_cast<double>(seen) / static_cast<double>(reachable_count_);
    }

    std::size_t sense(RunLog& log) {
        const std::size_t changed = fpx::sense(truth_, observed_, {cell_to_world(truth_, robot_), traveled_}, cfg_.lidar);
        log.steps.push_back({step_, cell_to_world(truth_, robot_), traveled_, coverage()});
        return changed;
    }

    // Map used for planning; falls back to the raw map when inflation would
    // swallow the robot.
    GridMap planning_map() const {
        if (cfg_.planner.inflation_cells <= 0) return observed_;
        GridMap m = inflate_obstacles(observed_, cfg_.planner.inflation_cells);
        return m.at(robot_) == CellState::Free ? m : observed_;
    }

    enum class Walk { Arrived, Interrupted, Capped };

    // Follows path (path[0] is the robot cell), sensing every sense_every
    // cells and at the end. interrupt() is asked after each sweep that
    // changed the map, except at the final cell.
    template <class Interrupt>
    Walk walk(const std::vector<CellIndex>& path, RunLog& log, Interrupt&& interrupt) {
        for (std::size_t i = 1; i < path.size(); ++i) {
            if (capped()) return Walk::Capped;
            const bool diagonal = path[i].row != robot_.row && path[i].col != robot_.col;
            traveled_ += truth_.resolution() * (diagonal ? kSqrt2 : 1.0);
            robot_ = path[i];
            ++step_;
            const bool last = i + 1 == path.size();
            if (step_ % cfg_.sense_every != 0 && !last) continue;
            if (sense(log) > 0 && !last && interrupt()) return Walk::Interrupted;
        }
        return Walk::Arrived;
    }

    void decision(RunLog& log, DecisionRecord r) const {
        r.step = step_;
        r.traveled = traveled_;
        r.coverage = log.steps.empty() ? 0.0 : log.steps.back().coverage;
        log.decisions.push_back(r);
    }

    void finish(RunLog& log, Termination t, std::chrono::steady_clock::time_point t0) const {
        log.termination = t;
        log.path_length = traveled_;
        log.coverage = coverage();
        log.final_map = observed_;
        if (cfg_.timing) log.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

private:
    const GridMap& truth_;
    const ExploreConfig& cfg_;
    CellIndex robot_;
    GridMap observed_;
    std::vector<char> reachable_;
    std::size_t reachable_count_ = 0;
    long step_ = 0;
    double traveled_ = 0;
};

inline CellIndex pick_start(const GridMap& truth, std::uint64_t seed, std::optional<WorldPoint> start) {
    if (start) {
        const CellIndex c = world_to_cell(truth, *start);
        if (truth.at(c) != CellState::Free) throw InvalidPose("start pose is not on a free cell");
        return c;
    }
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth.bytes()[i] == static_cast<std::uint8_t>(CellState::Free)) free.push_back(i);
    if (free.empty()) throw InvalidPose("scene has no free cell to start from");
    Rng rng(derive_seed(seed, {0x57A27}));
    return truth.cell_at(free[rng.below(free.size())]);
}

}  // namespace detail

// Called at every exploration decision with the map the choice was made on;
// returning false ends the run (used to cap dataset emission).
using DecisionHook = std::function<bool(const GridMap& observed, const FrontierCluster& chosen, long step)>;

// Frontier exploration of scene.cluttered until no reachable frontier is left.
// The predictor is used by P2 only.
inline RunLog run_exploration(const Scene& scene, Strategy strategy, Predictor& predictor, const ExploreConfig& cfg,
                              std::uint64_t seed, std::optional<WorldPoint> start = {},
                              const DecisionHook& hook = {}) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const GridMap& truth = scene.cluttered;
    detail::Simulation sim(truth, detail::pick_start(truth, seed, start), cfg);
    RunLog log;
    log.strategy = to_string(strategy);
    sim.sense(log);

    NullPredictor null_predictor;
    std::set<CellIndex> blacklist;  // goals reached that stayed frontiers
    for (;;) {
        if (sim.capped()) {
            sim.finish(log, Termination::StepCap, t0);
            return log;
        }
        auto frontiers = detect_frontiers(sim.observed(), cfg.min_cluster);
        std::erase_if(frontiers, [&](const FrontierCluster& f) { return blacklist.contains(f.representative); });
        if (frontiers.empty()) {
            sim.finish(log, Termination::Complete, t0);
            return log;
        }
        const GridMap plan = sim.planning_map();
        const auto field = cost_field(plan, sim.robot(), traversable_free);
        std::vector<std::size_t> reachable;
        for (std::size_t i = 0; i < frontiers.size(); ++i)
            if (std::isfinite(field[plan.index(frontiers[i].representative)])) reachable.push_back(i);
        if (reachable.empty()) {
            sim.finish(log, Termination::NoReachableFrontier, t0);
            return log;
        }

        DecisionRecord choice;
        switch (strategy) {
            case Strategy::NBV: {
                std::vector<DecisionRecord> rs;
                std::vector<double> us;
                for (const std::size_t i : reachable) {
                    rs.push_back(utility_nbv(frontiers[i], sim.observed(), cfg, field[plan.index(frontiers[i].representative)]));
                    us.push_back(rs.back().U);
                }
                choice = rs[argmax_index(us)];
                break;
            }
            case Strategy::TSP: {
                std::vector<FrontierCluster> candidates;
                for (const std::size_t i : reachable) candidates.push_back(frontiers[i]);
                const FrontierCluster& goal = candidates[goal_tsp(candidates, sim.robot(), sim.observed(), cfg.planner)];
                choice.chosen = goal.representative;
                choice.C = field[plan.index(goal.representative)];
                break;
            }
            case Strategy::P2:
            case Strategy::NoPre: {
                Predictor& p = strategy == Strategy::P2 ? predictor : null_predictor;
                const PredictedMap predicted = predict_global(p, sim.observed(), frontiers, cfg.window_range);
                std::optional<RoomGraph> graph;
                try {
                    graph = segment_map(predicted.map, cfg.topology, cfg.door_radius);
                } catch (const EmptyGraph&) {
                } catch (const TooSmall&) {
                }
                std::vector<DecisionRecord> rs;
                std::vector<double> us;
                for (const std::size_t i : reachable) {
                    rs.push_back(utility_p2(frontiers[i], sim.robot(), predicted, sim.observed(), graph ? &*graph : nullptr,
                                            cfg, field[plan.index(frontiers[i].representative)]));
                    us.push_back(rs.back().U);
                }
                choice = rs[argmax_index(us)];
                break;
            }
        }
        sim.decision(log, choice);
        const CellIndex goal = choice.chosen;
        if (hook) {
            const auto it = std::find_if(frontiers.begin(), frontiers.end(),
                                         [&](const FrontierCluster& f) { return f.representative == goal; });
            if (!hook(sim.observed(), *it, sim.step())) {
                sim.finish(log, Termination::Complete, t0);
                return log;
            }
        }
        if (goal == sim.robot()) {
            blacklist.insert(goal);
            continue;
        }
        const PathResult path = shortest_path(plan, sim.robot(), goal, traversable_free);
        const auto walked = sim.walk(path.cells, log, [&] { return !is_frontier_cell(sim.observed(), goal); });
        if (walked == detail::Simulation::Walk::Arrived && is_frontier_cell(sim.observed(), goal)) blacklist.insert(goal);
    }
}

// Drives from start to target through unknown space. Candidates are the
// frontier representatives; each is scored by the observed-map cost to reach
// it plus an optimistic estimate from it to the target, on the predicted map
// (PredictedOptimistic) or the observed map (GreedyOptimistic).
inline RunLog run_navigation(const Scene& scene, NavPolicy policy, Predictor& predictor, WorldPoint start,
                             WorldPoint target, const ExploreConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const GridMap& truth = scene.cluttered;
    const CellIndex s = world_to_cell(truth, start), t = world_to_cell(truth, target);
    if (truth.at(s) != CellState::Free) throw InvalidPose("start pose is not on a free cell");
    if (truth.at(t) != CellState::Free) throw InvalidPose("target is not on a free cell");
    if (!std::isfinite(cost_field(truth, s, traversable_free)[truth.index(t)]))
        throw ParamError("target is not reachable from start in the scene");

    detail::Simulation sim(truth, s, cfg);
    RunLog log;
    log.strategy = to_string(policy);
    sim.sense(log);
    for (;;) {
        if (sim.robot() == t) {
            sim.finish(log, Termination::ReachedTarget, t0);
            return log;
        }
        if (sim.capped()) {
            sim.finish(log, Termination::StepCap, t0);
            return log;
        }
        const GridMap plan = sim.planning_map();
        const auto field = cost_field(plan, sim.robot(), traversable_free);

        DecisionRecord choice;
        if (std::isfinite(field[plan.index(t)])) {
            choice.chosen = t;
            choice.C = field[plan.index(t)];
            choice.C_hat = 0.0;
            choice.U = -choice.C;
        } else {
            const auto frontiers = detect_frontiers(sim.observed(), cfg.min_cluster);
            const PredictedMap predicted = policy == NavPolicy::PredictedOptimistic
                                               ? predict_global(predictor, sim.observed(), frontiers, cfg.window_range)
                                               : unpredicted(sim.observed());
            const GridMap estimate_map = inflate_obstacles(predicted.map, cfg.planner.inflation_cells);
            const auto to_target = cost_field(estimate_map, t, traversable_optimistic);
            std::vector<DecisionRecord> rs;
            std::vector<double> us;
            for (const auto& f : frontiers) {
                const double C = field[plan.index(f.representative)];
                if (!std::isfinite(C)) continue;
                DecisionRecord r;
                r.chosen = f.representative;
                r.C = C;
                r.C_hat = to_target[plan.index(f.representative)];
                r.U = -(r.C + r.C_hat);
                rs.push_back(r);
                us.push_back(std::isfinite(r.U) ? r.U : -1e300 - C);  // sealed estimates rank last, nearest first
            }
            if (rs.empty()) {
                sim.finish(log, Termination::NoReachableFrontier, t0);
                return log;
            }
            choice = rs[argmax_index(us)];
        }
        sim.decision(log, choice);
        const PathResult path = shortest_path(plan, sim.robot(), choice.chosen, traversable_free);
        const auto walked = sim.walk(path.cells, log, [] { return true; });
        if (walked == detail::Simulation::Walk::Capped) continue;
    }
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kRunCsvHeader =
    "run_id,step,strategy,chosen_row,chosen_col,I,d,C,C_hat,U,traveled_m,coverage_pct,decisions,wall_clock_s,status";

namespace detail {

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

inline double csv_parse_number(const std::string& s) {
    if (s.empty()) return kNaN;
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    return parse_double(s);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

// One row per decision, then a summary row with step = "summary".
inline void write_run_csv(std::ostream& os, const RunLog& log) {
    using detail::csv_number;
    os << kRunCsvHeader << '\n';
    for (const auto& d : log.decisions)
        os << log.run_id << ',' << d.step << ',' << log.strategy << ',' << d.chosen.row << ',' << d.chosen.col << ','
           << csv_number(d.I) << ',' << csv_number(d.d) << ',' << csv_number(d.C) << ',' << csv_number(d.C_hat) << ','
           << csv_number(d.U) << ',' << csv_number(d.traveled) << ',' << csv_number(d.coverage) << ",,,\n";
    os << log.run_id << ",summary," << log.strategy << ",,,,,,,," << csv_number(log.path_length) << ','
       << csv_number(log.coverage) << ',' << log.decisions.size() << ',' << csv_number(log.wall_clock_s) << ','
       << to_string(log.termination) << '\n';
}

inline void write_run_csv(const std::string& path, const RunLog& log) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_run_csv(f, log);
}

// Reads back what write_run_csv produced (decisions and summary; per-step
// records and the final map are not part of the CSV).
inline RunLog read_run_csv(std::istream& is) {
    using detail::csv_parse_number;
    std::string line;
    if (!std::getline(is, line) || line != kRunCsvHeader) throw IoError("run CSV: bad header");
    RunLog log;
    bool summary = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 15) throw IoError("run CSV: expected 15 fields, got " + std::to_string(f.size()));
        log.run_id = f[0];
        log.strategy = f[2];
        if (f[1] == "summary") {
            log.path_length = csv_parse_number(f[10]);
            log.coverage = csv_parse_number(f[11]);
            if (std::stoul(f[12]) != log.decisions.size()) throw IoError("run CSV: decision count mismatch");
            log.wall_clock_s = csv_parse_number(f[13]);
            log.termination = parse_termination(f[14]);
            summary = true;
            continue;
        }
        DecisionRecord d;
        d.step = std::stol(f[1]);
        d.chosen = {std::stoi(f[3]), std::stoi(f[4])};
        d.I = csv_parse_number(f[5]);
        d.d = csv_parse_number(f[6]);
        d.C = csv_parse_number(f[7]);
        d.C_hat = csv_parse_number(f[8]);
        d.U = csv_parse_number(f[9]);
        d.traveled = csv_parse_number(f[10]);
        d.coverage = csv_parse_number(f[11]);
        log.decisions.push_back(d);
    }
    if (!summary) throw IoError("run CSV: missing summary row");
    return log;
}

}  // namespace fpx
