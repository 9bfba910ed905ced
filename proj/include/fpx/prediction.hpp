#pragma once

#include <atomic>
#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "fpx/error.hpp"
#include "fpx/frontier.hpp"
#include "fpx/grid.hpp"
#include "fpx/protocol.hpp"

namespace fpx {

// Maps a tri-state local window to a raw completion image of the same size
// (row-major, one byte per cell, 0..255 before thresholding).
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::vector<std::uint8_t> predict(const LocalWindow& window) = 0;
    virtual std::string name() const = 0;
};

class NullPredictor final : public Predictor {
public:
    std::vector<std::uint8_t> predict(const LocalWindow& w) override { return w.window.bytes(); }
    std::string name() const override { return "null"; }
};

// The ground-truth floor plan over the window footprint. Exterior cells come
// out Unknown, exactly as in the floor plan raster.
class OraclePredictor final : public Predictor {
public:
    explicit OraclePredictor(GridMap floorplan) : floorplan_(std::move(floorplan)) {}

    std::vector<std::uint8_t> predict(const LocalWindow& w) override {
        return clone_region(floorplan_, w.center, w.window.width() / 2).bytes();
    }
    std::string name() const override { return "oracle"; }

private:
    GridMap floorplan_;
};

// Out-of-process predictor over the framed protocol. Failures surface as
// PredictorUnavailable; see FallbackPredictor for the degrade-to-null policy.
class ExternalPredictor final : public Predictor {
public:
    explicit ExternalPredictor(std::string addr, int timeout_ms = 5000) : client_(std::move(addr), timeout_ms) {}

    std::vector<std::uint8_t> predict(const LocalWindow& w) override {
        const auto& m = w.window;
        auto reply = client_.round_trip(protocol::make_request(static_cast<std::uint16_t>(m.width()),
                                                               static_cast<std::uint16_t>(m.height()), m.bytes()));
        if (reply.type == protocol::MessageType::Error)
            throw PredictorUnavailable("predictor error: " + reply.message());
        if (reply.type != protocol::MessageType::Response || reply.width != m.width() || reply.height != m.height())
            throw PredictorUnavailable("predictor reply has the wrong shape");
        return std::move(reply.payload);
    }
    std::string name() const override { return "external:" + client_.address(); }

private:
    protocol::Client client_;
};

// Wraps a predictor; any PredictorUnavailable is logged and answered with the
// unchanged window.
class FallbackPredictor final : public Predictor {
public:
    explicit FallbackPredictor(std::unique_ptr<Predictor> inner, std::ostream* log = &std::cerr)
        : inner_(std::move(inner)), log_(log) {}

    std::vector<std::uint8_t> predict(const LocalWindow& w) override {
        try {
            return inner_->predict(w);
        } catch (const PredictorUnavailable& e) {
            if (fallbacks_++ == 0 && log_ != nullptr)
                *log_ << "warning: " << inner_->name() << " unavailable (" << e.what() << "); using null predictor\n";
            return w.window.bytes();
        }
    }
    std::string name() const override { return inner_->name(); }
    std::size_t fallbacks() const noexcept { return fallbacks_; }

private:
    std::unique_ptr<Predictor> inner_;
    std::ostream* log_;
    std::size_t fallbacks_ = 0;
};

enum class PredictorKind { Null, Oracle, External };

struct PredictorEndpoint {
    PredictorKind kind = PredictorKind::Null;
    std::string address;  // External only, host:port

    static PredictorEndpoint parse(const std::string& s) {
        if (s == "null" || s == "none") return {PredictorKind::Null, {}};
        if (s == "oracle") return {PredictorKind::Oracle, {}};
        if (s.rfind("external:", 0) == 0) return {PredictorKind::External, s.substr(9)};
        throw ParamError("unknown predictor '" + s + "' (expected null, oracle or external:host:port)");
    }
    std::string to_string() const {
        switch (kind) {
            case PredictorKind::Null: return "null";
            case PredictorKind::Oracle: return "oracle";
            case PredictorKind::External: return "external:" + address;
        }
        return "?";
    }
};

// The oracle needs the scene floor plan; other kinds ignore it.
inline std::unique_ptr<Predictor> make_predictor(const PredictorEndpoint& ep, const GridMap& floorplan) {
    switch (ep.kind) {
        case PredictorKind::Null: return std::make_unique<NullPredictor>();
        case PredictorKind::Oracle: return std::make_unique<OraclePredictor>(floorplan);
        case PredictorKind::External:
            return std::make_unique<FallbackPredictor>(std::make_unique<ExternalPredictor>(ep.address));
    }
    throw ParamError("bad predictor kind");
}

inline constexpr std::uint8_t kOccupiedBelow = 80;
inline constexpr std::uint8_t kFreeAbove = 120;

inline CellState classify_byte(std::uint8_t b) noexcept {
    if (b < kOccupiedBelow) return CellState::Occupied;
    if (b > kFreeAbove) return CellState::Free;
    return CellState::Unknown;
}

// Raw completion bytes to a tri-state map with the window's geometry.
inline GridMap threshold_classify(const std::vector<std::uint8_t>& raw, const GridMap& geometry) {
    if (raw.size() != geometry.size()) throw AlignmentError("raw prediction size does not match the window");
    GridMap out(geometry.width(), geometry.height(), geometry.resolution(), geometry.origin());
    for (std::size_t i = 0; i < raw.size(); ++i) out.set(out.cell_at(i), classify_byte(raw[i]));
    return out;
}

inline GridMap threshold_classify(const std::vector<std::uint8_t>& raw) {
    return threshold_classify(raw, GridMap(kWindowSide, kWindowSide));
}

enum class Provenance : std::uint8_t { Unknown = 0, Observed = 1, Predicted = 2 };

struct PredictedMap {
    GridMap map;
    std::vector<Provenance> provenance;

    Provenance provenance_at(CellIndex c) const { return provenance[map.index(c)]; }
};

inline PredictedMap unpredicted(const GridMap& observed) {
    PredictedMap out{observed, std::vector<Provenance>(observed.size(), Provenance::Unknown)};
    for (std::size_t i = 0; i < observed.size(); ++i)
        if (observed.bytes()[i] != static_cast<std::uint8_t>(CellState::Unknown)) out.provenance[i] = Provenance::Observed;
    return out;
}

// Writes each local prediction into the cells that are Unknown in `observed`
// and not Unknown in the prediction. Observed cells are never touched; where
// locals overlap the later one wins.
inline PredictedMap merge_local_predictions(const GridMap& observed, const std::vector<FrontierCluster>& clusters,
                                            const std::vector<GridMap>& locals) {
    if (clusters.size() != locals.size()) throw AlignmentError("one local prediction is needed per frontier cluster");
    PredictedMap out = unpredicted(observed);
    for (std::size_t k = 0; k < locals.size(); ++k) {
        const GridMap& local = locals[k];
        if (local.width() != local.height() || local.width() % 2 != 0 || local.resolution() != observed.resolution())
            throw AlignmentError("local prediction " + std::to_string(k) + " is not an even square window");
        const int half = local.width() / 2;
        const CellIndex rep = clusters[k].representative;
        for (int r = 0; r < local.height(); ++r) {
            const int sr = rep.row - half + r;
            if (sr < 0 || sr >= observed.height()) continue;
            for (int c = 0; c < local.width(); ++c) {
                const int sc = rep.col - half + c;
                if (sc < 0 || sc >= observed.width()) continue;
                const CellState p = local.at(r, c);
                if (p == CellState::Unknown || observed.at(sr, sc) != CellState::Unknown) continue;
                out.map.set(sr, sc, p);
                out.provenance[out.map.index({sr, sc})] = Provenance::Predicted;
            }
        }
    }
    return out;
}

// Full pipeline for one observed map: window per frontier, predict,
// threshold, merge.
inline PredictedMap predict_global(Predictor& predictor, const GridMap& observed,
                                   const std::vector<FrontierCluster>& clusters, double range = 12.0) {
    std::vector<GridMap> locals;
    locals.reserve(clusters.size());
    for (const auto& f : clusters) {
        const LocalWindow w = extract_window(observed, f, range);
        locals.push_back(threshold_classify(predictor.predict(w), w.window));
    }
    return merge_local_predictions(observed, clusters, locals);
}

}  // namespace fpx
