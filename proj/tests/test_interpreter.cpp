#include <doctest.h>

#include "awareness/error.hpp"
#include "awareness/gui/renderer.hpp"
#include "awareness/interp/interpreter.hpp"
#include "awareness/model/filter.hpp"
#include "awareness/model/scenario.hpp"
#include "awareness/rng.hpp"
#include "support/fixtures.hpp"

using namespace awareness;
using namespace awareness::interp;
using raster::GlyphClass;

namespace {

raster::Image render_message(const model::ModelMessage& m)
{
    gui::RenderState s;
    gui::ingest(s, m, {}, m.ts_ms);
    return gui::render(s);
}

/// Evenly spaced fixture messages of each mode.
std::vector<model::ModelMessage> suite_sample(std::size_t per_mode)
{
    const auto msgs = model::gen_scenario(model::ScenarioConfig{});
    std::vector<model::ModelMessage> by_mode[3];
    for (const auto& m : msgs) {
        by_mode[m.warning_mode].push_back(m);
    }
    std::vector<model::ModelMessage> out;
    for (auto& v : by_mode) {
        REQUIRE(v.size() >= per_mode);
        for (std::size_t i = 0; i < per_mode; ++i) {
            out.push_back(v[i * v.size() / per_mode]);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("frames rendered from each mode interpret back to that mode")
{
    const auto& det = testsupport::trained_detector();
    const auto mapping = AffordanceMapping::for_detector(det.config());
    for (const auto& m : suite_sample(1)) {
        const auto perceived = interpret(render_message(m), det, mapping);
        CHECK(perceived.tree == nlohmann::json{{"warningMode", m.warning_mode}});
        CHECK(perceived.provenance.size() == (m.warning_mode == 0 ? 0u : 1u));
    }
}

TEST_CASE("round-trip awareness under the warning-mode filter over a fixture sample")
{
    const auto& det = testsupport::trained_detector();
    const auto mapping = AffordanceMapping::for_detector(det.config());
    const auto f = model::FilterSpec::warning_mode();
    for (const auto& m : suite_sample(8)) {
        const auto frame = render_message(m);
        const auto perceived = interpret(frame, det, mapping);
        CHECK(model::apply_filter(f, perceived.tree) == model::apply_filter(f, model::to_json(m)));
        // Pure.
        CHECK(interpret(frame, det, mapping).tree == perceived.tree);
    }
}

TEST_CASE("perceived_mode picks the best warning detection at or above min_score")
{
    AffordanceMapping m;
    m.min_score = 0.6;
    CHECK(perceived_mode({}, m) == 0);
    const std::vector<detect::Detection> d{{GlyphClass::caution, {0, 0, 5, 5}, 0.7},
                                           {GlyphClass::danger, {9, 0, 5, 5}, 0.8},
                                           {GlyphClass::shame, {20, 0, 5, 5}, 0.99}};
    CHECK(perceived_mode(d, m) == 2);
    m.min_score = 0.75;
    CHECK(perceived_mode(std::span(d).first(1), m) == 0);
    // Equal scores: leftmost wins.
    const std::vector<detect::Detection> tie{{GlyphClass::danger, {9, 0, 5, 5}, 0.8},
                                             {GlyphClass::caution, {3, 0, 5, 5}, 0.8}};
    CHECK(perceived_mode(tie, m) == 1);
}

TEST_CASE("raising min_score never switches between nonzero modes")
{
    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<detect::Detection> dets;
        const int n = static_cast<int>(rng.uniform_int(0, 6));
        for (int i = 0; i < n; ++i) {
            dets.push_back({rng.bit() ? GlyphClass::caution : GlyphClass::danger,
                            {static_cast<int>(rng.uniform_int(0, 50)), static_cast<int>(rng.uniform_int(0, 50)), 8, 8},
                            rng.uniform(0.0, 1.0)});
        }
        AffordanceMapping lo, hi;
        lo.min_score = rng.uniform(0.0, 1.0);
        hi.min_score = rng.uniform(lo.min_score, 1.0);
        const int a = perceived_mode(dets, lo), b = perceived_mode(dets, hi);
        CHECK((b == 0 || b == a));
    }
}

TEST_CASE("mapping validation")
{
    AffordanceMapping m;
    CHECK_NOTHROW(validate(m));
    m.danger_mode = 1;
    CHECK_THROWS_AS(validate(m), InvalidConfig);
    m = {};
    m.absence_mode = 2;
    CHECK_THROWS_AS(validate(m), InvalidConfig);
}
