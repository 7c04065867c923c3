#include <doctest.h>

#include <filesystem>

#include "awareness/error.hpp"
#include "awareness/gui/renderer.hpp"
#include "awareness/model/scenario.hpp"
#include "awareness/raster/png_io.hpp"
#include "support/image_oracles.hpp"

using namespace awareness;
using namespace awareness::gui;
using model::ModelMessage;

namespace {

ModelMessage message(std::uint64_t seq, int mode, double lat = 40.715, double heading = 90.0)
{
    ModelMessage m;
    m.seq = seq;
    m.ts_ms = seq * 200;
    m.drone = {{lat, -74.0}, 120.0, heading};
    m.warning_mode = mode;
    m.waypoints = {{40.716, -74.001}, {40.714, -73.999}};
    return m;
}

const std::vector<ModelMessage>& fixture_messages()
{
    static const auto msgs = model::gen_scenario(model::ScenarioConfig{});
    return msgs;
}

/// Mode of the latest message with ts <= ts_ms (brute force).
int truth_mode_at(const std::vector<ModelMessage>& msgs, std::uint64_t ts_ms)
{
    int mode = -1;
    for (const auto& m : msgs) {
        if (m.ts_ms <= ts_ms) {
            mode = m.warning_mode;
        }
    }
    return mode;
}

std::filesystem::path fresh_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / "awareness_test_gui" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("render_key examples")
{
    const ViewConfig view;
    const FaultConfig none, blind{FaultMode::transition_blind, {}}, stale{FaultMode::stale_subscription, {}};
    CHECK(render_key(message(1, 1), none, 0, view) != render_key(message(1, 2), none, 0, view));
    CHECK(render_key(message(1, 1), blind, 0, view) == render_key(message(1, 2), blind, 0, view));
    CHECK(render_key(message(1, 0), blind, 0, view) != render_key(message(1, 1), blind, 0, view));
    CHECK(render_key(message(1, 0), stale, 0, view) == render_key(message(1, 2), stale, 0, view));
    // Pose changes always change the key.
    CHECK(render_key(message(1, 1, 40.715), blind, 0, view) != render_key(message(1, 1, 40.716), blind, 0, view));
    // Outside its window the fault has no effect.
    const FaultConfig windowed{FaultMode::transition_blind, FaultWindow{1000, 2000}};
    CHECK(render_key(message(1, 1), windowed, 2000, view) != render_key(message(1, 2), windowed, 2000, view));
    CHECK(render_key(message(1, 1), windowed, 1000, view) == render_key(message(1, 2), windowed, 1000, view));
}

TEST_CASE("ingest examples")
{
    const FaultConfig none, blind{FaultMode::transition_blind, {}};
    RenderState s;
    CHECK(ingest(s, message(1, 0), none, 0));
    CHECK_FALSE(ingest(s, message(2, 0), none, 0));  // same content, next seq
    CHECK(ingest(s, message(3, 1), none, 0));
    CHECK(ingest(s, message(4, 2), none, 0));

    RenderState b;
    CHECK(ingest(b, message(1, 1), blind, 0));
    CHECK_FALSE(ingest(b, message(2, 2), blind, 0));
    CHECK(b.rendered->warning_mode == 1);
    CHECK(b.last_message->warning_mode == 2);

    // Out of order and duplicate seqs are dropped and counted.
    CHECK_FALSE(ingest(s, message(4, 0), none, 0));
    CHECK_FALSE(ingest(s, message(2, 0), none, 0));
    CHECK(s.dropped == 2);
    CHECK(s.last_message->seq == 4);
}

TEST_CASE("freeze suppresses redraws only inside its window and refresh catches up")
{
    const FaultConfig freeze{FaultMode::freeze, FaultWindow{1000, 2000}};
    RenderState s;
    CHECK(ingest(s, message(1, 0), freeze, 0));
    CHECK_FALSE(ingest(s, message(2, 2), freeze, 1200));
    CHECK(s.rendered->warning_mode == 0);
    CHECK_FALSE(refresh(s, freeze, 1800));
    CHECK(refresh(s, freeze, 2000));
    CHECK(s.rendered->warning_mode == 2);
}

TEST_CASE("render puts the rendered mode's glyph at the HUD anchor")
{
    const ViewConfig view;
    for (int mode : {0, 1, 2}) {
        RenderState s;
        s.view = view;
        ingest(s, message(1, mode), {}, 0);
        const auto frame = render(s);
        CHECK(frame.width() == 1024);
        CHECK(frame.height() == 768);
        CHECK(testsupport::hud_mode_oracle(frame, view.hud_anchor) == mode);
        const auto crop = frame.crop(view.hud_anchor);
        const raster::Image white(64, 64, {255, 255, 255});
        const double c = testsupport::zncc(crop, testsupport::glyph_over(white, raster::GlyphClass::caution));
        const double d = testsupport::zncc(crop, testsupport::glyph_over(white, raster::GlyphClass::danger));
        if (mode == 0) {
            CHECK(c < 0.5);
            CHECK(d < 0.5);
        } else {
            CHECK((mode == 1 ? c : d) > 0.9);
        }
        CHECK(raster::encode_png(frame) == raster::encode_png(render(s)));
    }
    CHECK_THROWS_AS(render(RenderState{}), NoMessage);
}

TEST_CASE("faultless loop: every frame shows the mode of the latest preceding message")
{
    const auto& msgs = fixture_messages();
    MemorySink sink;
    const auto log = run_render_loop(msgs, {1.0, 200.0, 0}, {}, {}, sink);
    REQUIRE(log.size() == 200);
    int transitions = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(testsupport::hud_mode_oracle(*sink.frames[i], ViewConfig{}.hud_anchor) == truth_mode_at(msgs, log[i].ts_ms));
        if (i > 0) {
            CHECK(log[i].ts_ms > log[i - 1].ts_ms);
            CHECK(log[i].source_msg_seq >= log[i - 1].source_msg_seq);
            transitions += truth_mode_at(msgs, log[i].ts_ms) != truth_mode_at(msgs, log[i - 1].ts_ms);
        }
    }
    CHECK(transitions >= 4);
}

TEST_CASE("transition_blind surfaces stale HUD frames and stays inside its window")
{
    const auto& msgs = fixture_messages();
    // Fixture: caution from 29.8 s, danger from 41.6 s.
    const FaultConfig fault{FaultMode::transition_blind, FaultWindow{35000, 50000}};
    MemorySink sink;
    const auto log = run_render_loop(msgs, {2.0, 70.0, 0}, fault, {}, sink);
    int stale_inside = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const int shown = testsupport::hud_mode_oracle(*sink.frames[i], ViewConfig{}.hud_anchor);
        const int truth = truth_mode_at(msgs, log[i].ts_ms);
        if (fault.active_at(log[i].ts_ms)) {
            stale_inside += shown != truth;
            if (shown != truth) {
                CHECK(shown == 1);
                CHECK(truth == 2);
            }
        } else {
            CHECK(shown == truth);
        }
    }
    CHECK(stale_inside > 0);
}

TEST_CASE("stale_subscription misses a 0 to 1 transition")
{
    const auto& msgs = fixture_messages();
    const FaultConfig fault{FaultMode::stale_subscription, FaultWindow{25000, 35000}};
    MemorySink sink;
    const auto log = run_render_loop(msgs, {1.0, 40.0, 20000}, fault, {}, sink);
    int stale = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const int shown = testsupport::hud_mode_oracle(*sink.frames[i], ViewConfig{}.hud_anchor);
        const int truth = truth_mode_at(msgs, log[i].ts_ms);
        stale += shown != truth;
        if (!fault.active_at(log[i].ts_ms)) {
            CHECK(shown == truth);
        }
    }
    CHECK(stale > 0);
}

TEST_CASE("fps 1 with one message logs exactly duration_s frames")
{
    const std::vector msgs{message(0, 1)};
    MemorySink sink;
    const auto log = run_render_loop(msgs, {1.0, 12.0, 0}, {}, {}, sink);
    CHECK(log.size() == 12);
    CHECK(sink.frames.front() == sink.frames.back());  // never redrawn
    CHECK(log.back().ts_ms == 11000);
}

TEST_CASE("ticks before the first message are not logged; unsorted streams are rejected")
{
    std::vector msgs{message(5, 0)};  // ts 1000
    MemorySink sink;
    const auto log = run_render_loop(msgs, {2.0, 3.0, 0}, {}, {}, sink);
    REQUIRE(log.size() == 4);
    CHECK(log.front().ts_ms == 1000);
    CHECK(log.front().seq == 0);
    msgs.push_back(message(1, 0));
    CHECK_THROWS_AS(run_render_loop(msgs, {2.0, 3.0, 0}, {}, {}, sink), UnsortedLog);
}

TEST_CASE("directory sink writes PNGs and a manifest that round trip")
{
    const auto& msgs = fixture_messages();
    const auto dir = fresh_dir("run");
    MemorySink mem;
    {
        DirectorySink sink(dir);
        run_render_loop(msgs, {5.0, 3.0, 40000}, {}, {}, sink);
    }
    const auto log = run_render_loop(msgs, {5.0, 3.0, 40000}, {}, {}, mem);
    const auto read = read_frame_log(dir);
    REQUIRE(read == log);
    for (std::size_t i = 0; i < read.size(); ++i) {
        CHECK(raster::read_png(dir / read[i].path) == *mem.frames[i]);
    }
    CHECK(read[3].path == "frames/000003.png");
    CHECK_THROWS_AS(read_frame_log(fresh_dir("none")), MissingArtifact);
}

TEST_CASE("fault config JSON")
{
    const FaultConfig f{FaultMode::transition_blind, FaultWindow{10, 20}};
    CHECK(fault_config_from_json(to_json(f)) == f);
    CHECK(fault_config_from_json(to_json(FaultConfig{})) == FaultConfig{});
    CHECK_THROWS_AS(fault_config_from_json(nlohmann::json{{"mode", "melt"}}), InvalidConfig);
    CHECK_THROWS_AS(fault_config_from_json(nlohmann::json{{"mode", "freeze"}, {"window", {5, 5}}}), InvalidConfig);
    CHECK_THROWS_AS(fault_config_from_json(nlohmann::json{{"mode", "freeze"}, {"extra", 1}}), InvalidConfig);
}

TEST_CASE("shame overlay sits bottom-left, away from the HUD")
{
    const ViewConfig view;
    RenderState s;
    s.view = view;
    ingest(s, message(1, 2), {}, 0);
    auto frame = render(s);
    const auto clean = frame;
    overlay_shame(frame, view);
    const auto r = shame_rect(view);
    CHECK(r.x < view.width / 2);
    CHECK(r.y > view.height / 2);
    CHECK(frame.crop(view.hud_anchor) == clean.crop(view.hud_anchor));
    CHECK(frame.at(r.x + 2, r.y + 2) == raster::kShameMagenta);
}
