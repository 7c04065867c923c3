#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/model/message.hpp"
#include "awareness/raster/glyph.hpp"
#include "awareness/raster/image.hpp"

namespace awareness::gui {

enum class FaultMode { none, transition_blind, stale_subscription, freeze };

std::string_view to_string(FaultMode m);
std::optional<FaultMode> fault_mode_from_string(std::string_view s);

struct FaultWindow {
    std::uint64_t start_ms = 0;
    std::uint64_t end_ms = 0;  ///< exclusive

    friend bool operator==(const FaultWindow&, const FaultWindow&) = default;
};

struct FaultConfig {
    FaultMode mode = FaultMode::none;
    std::optional<FaultWindow> window;  ///< absent: active whenever mode != none

    /// Mode in effect at `now_ms`.
    FaultMode effective(std::uint64_t now_ms) const;
    bool active_at(std::uint64_t now_ms) const { return effective(now_ms) != FaultMode::none; }

    friend bool operator==(const FaultConfig&, const FaultConfig&) = default;
};

nlohmann::json to_json(const FaultConfig& f);
FaultConfig fault_config_from_json(const nlohmann::json& j);

struct ViewConfig {
    int width = 1024;
    int height = 768;
    double meters_per_pixel = 4.0;
    raster::Rect hud_anchor{1024 - 64 - 16, 16, 64, 64};
    std::uint64_t world_seed = 2024;
    int marker_size = 32;
    int waypoint_radius = 3;
};

void validate(const ViewConfig& v);

/// Heading quantized to one of 8 directions, as drawn.
int heading_octant(double heading_deg);

/// Change-detection key of the map branch (quantized pose and waypoints).
std::string map_key(const model::ModelMessage& msg, const ViewConfig& view);
/// Change-detection key of the HUD branch under the fault in effect.
std::string hud_key(const model::ModelMessage& msg, FaultMode effective);
/// Canonical {"hud": ..., "map": ...} key.
std::string render_key(const model::ModelMessage& msg, const FaultConfig& fault, std::uint64_t now_ms,
                       const ViewConfig& view);

struct RenderState {
    ViewConfig view;
    std::optional<model::ModelMessage> last_message;  ///< latest ingested
    /// What the GUI currently shows: map fields and warningMode each come from
    /// the message that last changed that branch's key.
    std::optional<model::ModelMessage> rendered;
    std::string map_key;
    std::string hud_key;
    std::string last_render_key;
    std::uint64_t source_msg_seq = 0;  ///< message that last triggered a render
    std::uint64_t dropped = 0;         ///< out-of-order messages
};

/// Takes a message; returns whether the frame must be redrawn. Messages with
/// seq not above the last ingested one are dropped and counted. During a
/// freeze window nothing is redrawn and branch keys keep their old values.
bool ingest(RenderState& state, const model::ModelMessage& msg, const FaultConfig& fault, std::uint64_t now_ms);

/// Re-evaluates the latest message at a frame tick, so fault windows take and
/// lose effect on time rather than on message arrival.
bool refresh(RenderState& state, const FaultConfig& fault, std::uint64_t now_ms);

/// Pure composition of the rendered message. Throws NoMessage before the first render.
raster::Image render(const RenderState& state);

/// Warning glyph class drawn for a mode, if any.
std::optional<raster::GlyphClass> hud_glyph(int warning_mode);

/// Shame badge in the bottom-left corner.
raster::Rect shame_rect(const ViewConfig& view);
void overlay_shame(raster::Image& frame, const ViewConfig& view);

struct FrameLogEntry {
    std::uint64_t seq = 0;
    std::uint64_t ts_ms = 0;
    std::string path;  ///< relative to the run directory, e.g. frames/000012.png
    int width = 0;
    int height = 0;
    std::uint64_t source_msg_seq = 0;

    friend bool operator==(const FrameLogEntry&, const FrameLogEntry&) = default;
};

nlohmann::json to_json(const FrameLogEntry& e);
FrameLogEntry frame_entry_from_json(const nlohmann::json& j);
std::string frame_path(std::uint64_t seq);

inline constexpr const char* kFramesDir = "frames";
inline constexpr const char* kFramesManifest = "frames.ndjson";

/// Receives every logged frame. `changed` is false when `frame` is the same
/// object as the previous call's.
class FrameSink {
public:
    virtual ~FrameSink() = default;
    virtual void write(const FrameLogEntry& entry, const std::shared_ptr<const raster::Image>& frame, bool changed) = 0;
};

/// Writes frames/NNNNNN.png plus frames.ndjson under a run directory.
class DirectorySink : public FrameSink {
public:
    explicit DirectorySink(std::filesystem::path run_dir);
    void write(const FrameLogEntry& entry, const std::shared_ptr<const raster::Image>& frame, bool changed) override;

private:
    std::filesystem::path dir_;
    std::vector<std::uint8_t> last_png_;
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> manifest_;
};

/// Keeps entries and frames in memory; unchanged frames share storage.
class MemorySink : public FrameSink {
public:
    void write(const FrameLogEntry& entry, const std::shared_ptr<const raster::Image>& frame, bool changed) override;

    std::vector<FrameLogEntry> entries;
    std::vector<std::shared_ptr<const raster::Image>> frames;
};

/// Owns RenderState and produces one frame per tick.
class Renderer {
public:
    explicit Renderer(ViewConfig view = {});

    struct Tick {
        std::shared_ptr<const raster::Image> frame;  ///< null before the first message
        bool changed = false;
        std::uint64_t source_msg_seq = 0;
    };

    /// Ingests `arrivals` (ts <= now_ms, in order), refreshes, redraws if flagged.
    Tick tick(std::span<const model::ModelMessage> arrivals, const FaultConfig& fault, std::uint64_t now_ms);

    const RenderState& state() const { return state_; }

private:
    RenderState state_;
    std::shared_ptr<const raster::Image> frame_;
};

struct RenderLoopConfig {
    double fps = 10.0;
    double duration_s = 60.0;
    std::uint64_t t0_ms = 0;  ///< simulation time of the first tick
};

/// Ticks at t0 + k*1000/fps for tick_count(duration, fps) ticks, feeding
/// messages with ts <= tick (messages sorted by ts). Ticks before anything is
/// rendered are not logged; frame seq counts logged frames from 0.
std::vector<FrameLogEntry> run_render_loop(std::span<const model::ModelMessage> messages, const RenderLoopConfig& cfg,
                                           const FaultConfig& fault, const ViewConfig& view, FrameSink& sink);

/// Reads frames.ndjson from a run directory. Throws MissingArtifact when absent.
std::vector<FrameLogEntry> read_frame_log(const std::filesystem::path& run_dir);

}  // namespace awareness::gui
