#include "awareness/gui/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/model/scenario.hpp"
#include "awareness/raster/png_io.hpp"
#include "awareness/raster/tiles.hpp"

namespace awareness::gui {

using model::ModelMessage;
using raster::Image;
using raster::Rect;

std::string_view to_string(FaultMode m)
{
    switch (m) {
    case FaultMode::none:
        return "none";
    case FaultMode::transition_blind:
        return "transition_blind";
    case FaultMode::stale_subscription:
        return "stale_subscription";
    case FaultMode::freeze:
        return "freeze";
    }
    return "none";
}

std::optional<FaultMode> fault_mode_from_string(std::string_view s)
{
    for (auto m : {FaultMode::none, FaultMode::transition_blind, FaultMode::stale_subscription, FaultMode::freeze}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    return std::nullopt;
}

FaultMode FaultConfig::effective(std::uint64_t now_ms) const
{
    if (mode == FaultMode::none) {
        return FaultMode::none;
    }
    if (window && (now_ms < window->start_ms || now_ms >= window->end_ms)) {
        return FaultMode::none;
    }
    return mode;
}

nlohmann::json to_json(const FaultConfig& f)
{
    nlohmann::json j{{"mode", to_string(f.mode)}, {"window", nullptr}};
    if (f.window) {
        j["window"] = {f.window->start_ms, f.window->end_ms};
    }
    return j;
}

FaultConfig fault_config_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw InvalidConfig("fault config must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "mode" && key != "window") {
            throw InvalidConfig("unknown key '" + key + "' in fault config");
        }
    }
    FaultConfig f;
    try {
        const auto mode = fault_mode_from_string(j.value("mode", std::string("none")));
        if (!mode) {
            throw InvalidConfig("unknown fault mode " + j.at("mode").dump());
        }
        f.mode = *mode;
        if (auto it = j.find("window"); it != j.end() && !it->is_null()) {
            f.window = FaultWindow{it->at(0).get<std::uint64_t>(), it->at(1).get<std::uint64_t>()};
            if (f.window->end_ms <= f.window->start_ms) {
                throw InvalidConfig("fault window must end after it starts");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(e.what());
    }
    return f;
}

void validate(const ViewConfig& v)
{
    if (v.width < 1 || v.height < 1 || !(v.meters_per_pixel > 0.0)) {
        throw InvalidConfig("viewport needs positive size and scale");
    }
    if (v.hud_anchor.x < 0 || v.hud_anchor.y < 0 || v.hud_anchor.right() > v.width ||
        v.hud_anchor.bottom() > v.height || v.hud_anchor.w < 8 || v.hud_anchor.h < 8) {
        throw InvalidConfig("hud_anchor must lie inside the viewport");
    }
    if (v.marker_size < 4 || v.marker_size > std::min(v.width, v.height) || v.waypoint_radius < 0) {
        throw InvalidConfig("marker and waypoint sizes out of range");
    }
}

int heading_octant(double heading_deg)
{
    const long q = std::lround(heading_deg / 45.0);
    return static_cast<int>(((q % 8) + 8) % 8);
}

namespace {

nlohmann::json map_tree(const ModelMessage& msg, const ViewConfig& view)
{
    const auto c = raster::to_world_px(msg.drone.pos, view.meters_per_pixel);
    nlohmann::json wps = nlohmann::json::array();
    for (const auto& p : msg.waypoints) {
        const auto w = raster::to_world_px(p, view.meters_per_pixel);
        wps.push_back({w.x, w.y});
    }
    return {{"center", {c.x, c.y}}, {"heading", heading_octant(msg.drone.heading_deg)}, {"waypoints", std::move(wps)}};
}

nlohmann::json hud_tree(const ModelMessage& msg, FaultMode effective)
{
    switch (effective) {
    case FaultMode::transition_blind:
        // Caution and danger collapse to one key value.
        return msg.warning_mode == 0 ? nlohmann::json{{"warningMode", 0}} : nlohmann::json{{"warningMode", "W"}};
    case FaultMode::stale_subscription:
        return nlohmann::json::object();
    default:
        return {{"warningMode", msg.warning_mode}};
    }
}

bool update(RenderState& s, const ModelMessage& msg, FaultMode effective)
{
    if (effective == FaultMode::freeze && s.rendered) {
        return false;
    }
    const auto mk = model::canonicalize(map_tree(msg, s.view)).text;
    const auto hk = model::canonicalize(hud_tree(msg, effective)).text;
    const bool map_changed = !s.rendered || mk != s.map_key;
    const bool hud_changed = !s.rendered || hk != s.hud_key;
    if (!map_changed && !hud_changed) {
        return false;
    }
    ModelMessage shown = s.rendered ? *s.rendered : msg;
    if (map_changed) {
        shown.seq = msg.seq;
        shown.ts_ms = msg.ts_ms;
        shown.drone = msg.drone;
        shown.waypoints = msg.waypoints;
    }
    if (hud_changed) {
        shown.warning_mode = msg.warning_mode;
    }
    s.rendered = std::move(shown);
    s.map_key = mk;
    s.hud_key = hk;
    s.last_render_key = model::canonicalize({{"hud", model::parse_json(hk)}, {"map", model::parse_json(mk)}}).text;
    s.source_msg_seq = msg.seq;
    return true;
}

void paint_disc(Image& img, long long cx, long long cy, int r, raster::Rgb c)
{
    for (long long y = cy - r; y <= cy + r; ++y) {
        for (long long x = cx - r; x <= cx + r; ++x) {
            if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) {
                continue;
            }
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= static_cast<long long>(r) * r) {
                img.set(static_cast<int>(x), static_cast<int>(y), c);
            }
        }
    }
}

}  // namespace

std::string map_key(const ModelMessage& msg, const ViewConfig& view)
{
    return model::canonicalize(map_tree(msg, view)).text;
}

std::string hud_key(const ModelMessage& msg, FaultMode effective)
{
    return model::canonicalize(hud_tree(msg, effective)).text;
}

std::string render_key(const ModelMessage& msg, const FaultConfig& fault, std::uint64_t now_ms, const ViewConfig& view)
{
    return model::canonicalize({{"hud", hud_tree(msg, fault.effective(now_ms))}, {"map", map_tree(msg, view)}}).text;
}

bool ingest(RenderState& state, const ModelMessage& msg, const FaultConfig& fault, std::uint64_t now_ms)
{
    if (state.last_message && msg.seq <= state.last_message->seq) {
        ++state.dropped;
        return false;
    }
    state.last_message = msg;
    return update(state, msg, fault.effective(now_ms));
}

bool refresh(RenderState& state, const FaultConfig& fault, std::uint64_t now_ms)
{
    if (!state.last_message) {
        return false;
    }
    return update(state, *state.last_message, fault.effective(now_ms));
}

std::optional<raster::GlyphClass> hud_glyph(int warning_mode)
{
    switch (warning_mode) {
    case 1:
        return raster::GlyphClass::caution;
    case 2:
        return raster::GlyphClass::danger;
    default:
        return std::nullopt;
    }
}

Image render(const RenderState& state)
{
    if (!state.rendered) {
        throw NoMessage("nothing rendered yet");
    }
    const auto& v = state.view;
    const auto& msg = *state.rendered;
    const auto c = raster::to_world_px(msg.drone.pos, v.meters_per_pixel);
    const raster::WorldPx origin{c.x - v.width / 2, c.y - v.height / 2};
    Image img = raster::tile_background_px({raster::Style::runtime, v.world_seed}, origin, v.width, v.height);
    for (const auto& p : msg.waypoints) {
        const auto w = raster::to_world_px(p, v.meters_per_pixel);
        paint_disc(img, w.x - origin.x, w.y - origin.y, v.waypoint_radius, {255, 255, 255});
    }
    raster::paint_drone_marker(img,
                               {v.width / 2 - v.marker_size / 2, v.height / 2 - v.marker_size / 2, v.marker_size,
                                v.marker_size},
                               45.0 * heading_octant(msg.drone.heading_deg));
    if (const auto g = hud_glyph(msg.warning_mode)) {
        raster::paint_glyph(img, *g, v.hud_anchor);
    }
    return img;
}

Rect shame_rect(const ViewConfig& view)
{
    const int s = view.hud_anchor.w;
    return {16, view.height - 16 - s, s, s};
}

void overlay_shame(Image& frame, const ViewConfig& view)
{
    raster::paint_glyph(frame, raster::GlyphClass::shame, shame_rect(view));
}

// ---------------------------------------------------------------- frame log

std::string frame_path(std::uint64_t seq)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s/%06llu.png", kFramesDir, static_cast<unsigned long long>(seq));
    return buf;
}

nlohmann::json to_json(const FrameLogEntry& e)
{
    return {{"seq", e.seq},          {"ts_ms", e.ts_ms},   {"path", e.path},
            {"width", e.width},      {"height", e.height}, {"source_msg_seq", e.source_msg_seq}};
}

FrameLogEntry frame_entry_from_json(const nlohmann::json& j)
{
    try {
        return {j.at("seq").get<std::uint64_t>(),   j.at("ts_ms").get<std::uint64_t>(),
                j.at("path").get<std::string>(),    j.at("width").get<int>(),
                j.at("height").get<int>(),          j.at("source_msg_seq").get<std::uint64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("malformed frame log entry: ") + e.what());
    }
}

DirectorySink::DirectorySink(std::filesystem::path run_dir) : dir_(std::move(run_dir)), manifest_(nullptr, &std::fclose)
{
    std::error_code ec;
    std::filesystem::create_directories(dir_ / kFramesDir, ec);
    if (ec) {
        throw IoError("cannot create " + (dir_ / kFramesDir).string() + ": " + ec.message());
    }
    manifest_.reset(std::fopen((dir_ / kFramesManifest).c_str(), "wb"));
    if (!manifest_) {
        throw IoError("cannot open " + (dir_ / kFramesManifest).string());
    }
}

void DirectorySink::write(const FrameLogEntry& entry, const std::shared_ptr<const Image>& frame, bool changed)
{
    if (changed || last_png_.empty()) {
        last_png_ = raster::encode_png(*frame);
    }
    raster::write_file(dir_ / entry.path, last_png_);
    const auto line = model::canonicalize(to_json(entry)).text + "\n";
    if (std::fwrite(line.data(), 1, line.size(), manifest_.get()) != line.size() || std::fflush(manifest_.get()) != 0) {
        throw IoError("write failed: " + (dir_ / kFramesManifest).string());
    }
}

void MemorySink::write(const FrameLogEntry& entry, const std::shared_ptr<const Image>& frame, bool)
{
    entries.push_back(entry);
    frames.push_back(frame);
}

Renderer::Renderer(ViewConfig view)
{
    validate(view);
    state_.view = view;
}

Renderer::Tick Renderer::tick(std::span<const ModelMessage> arrivals, const FaultConfig& fault, std::uint64_t now_ms)
{
    bool dirty = false;
    for (const auto& m : arrivals) {
        dirty |= ingest(state_, m, fault, now_ms);
    }
    dirty |= refresh(state_, fault, now_ms);
    bool changed = false;
    if (state_.rendered && (dirty || !frame_)) {
        frame_ = std::make_shared<const Image>(render(state_));
        changed = true;
    }
    return {frame_, changed, state_.source_msg_seq};
}

std::vector<FrameLogEntry> run_render_loop(std::span<const ModelMessage> messages, const RenderLoopConfig& cfg,
                                           const FaultConfig& fault, const ViewConfig& view, FrameSink& sink)
{
    if (!(cfg.fps > 0.0) || !(cfg.duration_s > 0.0)) {
        throw InvalidConfig("render loop needs positive fps and duration");
    }
    for (std::size_t i = 1; i < messages.size(); ++i) {
        if (messages[i].ts_ms < messages[i - 1].ts_ms) {
            throw UnsortedLog("message stream not sorted by ts_ms");
        }
    }
    Renderer renderer(view);
    std::vector<FrameLogEntry> log;
    std::size_t next = 0;
    const auto n = model::tick_count(cfg.duration_s, cfg.fps);
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::uint64_t now = cfg.t0_ms + model::tick_ts_ms(k, cfg.fps);
        const std::size_t begin = next;
        while (next < messages.size() && messages[next].ts_ms <= now) {
            ++next;
        }
        const auto t = renderer.tick(messages.subspan(begin, next - begin), fault, now);
        if (!t.frame) {
            continue;
        }
        FrameLogEntry e{log.size(), now, frame_path(log.size()), view.width, view.height, t.source_msg_seq};
        sink.write(e, t.frame, t.changed);
        log.push_back(std::move(e));
    }
    return log;
}

std::vector<FrameLogEntry> read_frame_log(const std::filesystem::path& run_dir)
{
    std::ifstream in(run_dir / kFramesManifest, std::ios::binary);
    if (!in) {
        throw MissingArtifact("frame log " + (run_dir / kFramesManifest).string());
    }
    std::vector<FrameLogEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(frame_entry_from_json(model::parse_json(line)));
        }
    }
    return out;
}

}  // namespace awareness::gui
