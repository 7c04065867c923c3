#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/model/filter.hpp"
#include "awareness/model/scenario.hpp"
#include "support/random_tree.hpp"

using namespace awareness;
using namespace awareness::model;
using nlohmann::json;

TEST_CASE("canonicalize sorts keys and strips whitespace")
{
    CHECK(canonicalize(json::parse(R"({"b":1,"a":2})")).text == R"({"a":2,"b":1})");
    CHECK(canonicalize(json::object()).text == "{}");
    CHECK(canonicalize(json::parse(R"( { "x" : [ 1 , 2.5 , "s" , null , true ] } )")).text ==
          R"({"x":[1,2.5,"s",null,true]})");
}

TEST_CASE("canonical numbers: integral values bare, others shortest round-trip")
{
    CHECK(canonicalize(json(2.0)).text == "2");
    CHECK(canonicalize(json(-0.0)).text == "0");
    CHECK(canonicalize(json(0.1)).text == "0.1");
    CHECK(canonicalize(json(40.7128)).text == "40.7128");
    CHECK(canonicalize(json(1e300)).text == "1e+300");
    CHECK(canonicalize(json(std::uint64_t{18446744073709551615ULL})).text == "18446744073709551615");
    // 2.0 and 2 are the same canonical number.
    CHECK(canonicalize(json::parse("2.0")) == canonicalize(json::parse("2")));
}

TEST_CASE("canonicalize rejects non-finite numbers")
{
    json t = {{"a", {1, std::numeric_limits<double>::quiet_NaN()}}};
    CHECK_THROWS_AS(canonicalize(t), NonFiniteNumber);
    CHECK_THROWS_AS(canonicalize(json(std::numeric_limits<double>::infinity())), NonFiniteNumber);
}

TEST_CASE("canonicalize is idempotent over seeded random trees")
{
    Rng rng(20240611);
    for (int i = 0; i < 1000; ++i) {
        const json t = testsupport::random_tree(rng);
        const auto once = canonicalize(t);
        const auto twice = canonicalize(parse_json(once.text));
        REQUIRE(once == twice);
        // parse(output) is structurally equal to the input tree
        CHECK(canonicalize(json::parse(once.text)) == once);
    }
}

TEST_CASE("canonicalize is insensitive to key order")
{
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        json t = testsupport::random_object_tree(rng);
        // Rebuild the text with keys in reverse order via ordered_json.
        std::function<nlohmann::ordered_json(const json&)> reverse = [&](const json& j) {
            if (!j.is_object()) {
                return nlohmann::ordered_json(j);
            }
            nlohmann::ordered_json o = nlohmann::ordered_json::object();
            std::vector<std::string> keys;
            for (const auto& [k, _] : j.items()) {
                keys.push_back(k);
            }
            std::reverse(keys.begin(), keys.end());
            for (const auto& k : keys) {
                o[k] = reverse(j[k]);
            }
            return o;
        };
        const std::string permuted = reverse(t).dump(2);
        CHECK(canonicalize(json::parse(permuted)) == canonicalize(t));
    }
}

TEST_CASE("parse_json reports malformed text as DecodeError")
{
    CHECK_THROWS_AS(parse_json("{\"a\":"), DecodeError);
}

TEST_CASE("FilterSpec validation")
{
    CHECK_THROWS_AS(FilterSpec(std::vector<std::string>{}), InvalidConfig);
    CHECK_THROWS_AS(FilterSpec{"drone..alt_m"}, InvalidConfig);
    CHECK_THROWS_AS(FilterSpec{".x"}, InvalidConfig);
    FilterSpec f{"b", "a", "b"};
    CHECK(f.paths() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("apply_filter projects the warning mode")
{
    ScenarioConfig cfg;
    cfg.duration_s = 1;
    auto msg = gen_scenario(cfg).front();
    msg.warning_mode = 2;
    CHECK(apply_filter(FilterSpec::warning_mode(), to_json(msg)).text == R"({"warningMode":2})");
    CHECK(apply_filter(FilterSpec{"drone.alt_m"}, json{{"warningMode", 1}}).text == "{}");
    CHECK(apply_filter(FilterSpec{"drone.pos.lat", "seq"}, to_json(msg)).text ==
          canonicalize(json{{"drone", {{"pos", {{"lat", msg.drone.pos.lat}}}}}, {"seq", msg.seq}}).text);
    // A path through a non-object is absent, not an error.
    CHECK(apply_filter(FilterSpec{"a.b"}, json{{"a", 3}}).text == "{}");
    CHECK(apply_filter(FilterSpec{"a"}, json::array({1, 2})).text == "{}");
}

TEST_CASE("apply_filter is an idempotent, monotone projection")
{
    Rng rng(4242);
    const std::vector<std::string> candidates = {"a", "b", "a.b", "a.c", "b.a.d", "c.c", "d", "a.b.c"};
    for (int i = 0; i < 500; ++i) {
        const json t = testsupport::random_object_tree(rng);
        std::vector<std::string> paths;
        for (const auto& c : candidates) {
            if (rng.uniform() < 0.3) {
                paths.push_back(c);
            }
        }
        if (paths.empty()) {
            paths.push_back("a");
        }
        const FilterSpec f(paths);
        const json once = project(f, t);
        CHECK(apply_filter(f, once) == apply_filter(f, t));

        // Adding a path never removes a previously present leaf.
        auto more = paths;
        more.push_back(candidates[rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1)]);
        const json bigger = project(FilterSpec(more), t).flatten();
        if (once.empty()) {
            continue;
        }
        const json flat = once.flatten();
        for (const auto& leaf : flat.items()) {
            REQUIRE(bigger.contains(leaf.key()));
            CHECK(bigger[leaf.key()] == leaf.value());
        }
    }
}

TEST_CASE("warning_mode_at edge cases")
{
    const HazardZone z{{40.71, -74.0}, 200.0, 1.5};
    const std::vector<HazardZone> zones{z};
    CHECK(warning_mode_at(z.center, zones) == 2);
    CHECK(warning_mode_at(destination(z.center, 90.0, 5000.0), zones) == 0);
    CHECK(warning_mode_at(z.center, {}) == 0);
}

TEST_CASE("radial sweep crosses 2->1->0 exactly once at the ring radii")
{
    const HazardZone z{{40.715, -73.99}, 180.0, 1.5};
    const std::vector<HazardZone> zones{z};
    for (double bearing : {0.0, 45.0, 133.0, 270.0}) {
        std::vector<int> modes;
        for (int d = 0; d <= 600; ++d) {
            modes.push_back(warning_mode_at(destination(z.center, bearing, d), zones));
        }
        CHECK(std::is_sorted(modes.rbegin(), modes.rend()));  // non-increasing outward
        int changes = 0;
        for (std::size_t i = 1; i < modes.size(); ++i) {
            if (modes[i] != modes[i - 1]) {
                ++changes;
                const double r = static_cast<double>(i);
                if (modes[i] == 1) {
                    CHECK(std::fabs(r - 180.0) <= 1.0);
                } else {
                    CHECK(std::fabs(r - 270.0) <= 1.0);
                }
            }
        }
        CHECK(changes == 2);
    }
}

TEST_CASE("gen_scenario determinism and stream invariants")
{
    ScenarioConfig cfg;
    cfg.duration_s = 120;
    cfg.seed = 99;
    const auto a = gen_scenario(cfg);
    const auto b = gen_scenario(cfg);
    REQUIRE(a.size() == 600);
    std::string text_a, text_b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        text_a += message_line(a[i]) + "\n";
        text_b += message_line(b[i]) + "\n";
    }
    CHECK(text_a == text_b);

    const auto zones = gen_zones(cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ts_ms == i * 200);
        if (i > 0) {
            CHECK(a[i].seq > a[i - 1].seq);
        }
        CHECK(a[i].warning_mode == warning_mode_at(a[i].drone.pos, zones));
        CHECK(a[i].drone.heading_deg >= 0.0);
        CHECK(a[i].drone.heading_deg < 360.0);
        CHECK_NOTHROW(validate(a[i]));
    }

    // Consecutive positions are speed / rate apart except at waypoint corners.
    const double step = haversine_m(a[10].drone.pos, a[11].drone.pos);
    CHECK(step == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("gen_scenario without zones is always nominal")
{
    ScenarioConfig cfg;
    cfg.n_zones = 0;
    cfg.duration_s = 60;
    for (const auto& m : gen_scenario(cfg)) {
        CHECK(m.warning_mode == 0);
    }
}

TEST_CASE("fixture seed exhibits direct caution<->danger transitions")
{
    // Default config (seed 5): caution 29.8 s, danger 41.6 s, caution again 79.2 s.
    ScenarioConfig cfg;
    const auto msgs = gen_scenario(cfg);
    int up = 0, down = 0;
    for (std::size_t i = 1; i < msgs.size(); ++i) {
        up += msgs[i - 1].warning_mode == 1 && msgs[i].warning_mode == 2;
        down += msgs[i - 1].warning_mode == 2 && msgs[i].warning_mode == 1;
    }
    CHECK(up >= 1);
    CHECK(down >= 1);
}

TEST_CASE("gen_scenario rejects invalid configs")
{
    ScenarioConfig cfg;
    cfg.msg_rate_hz = 0;
    CHECK_THROWS_AS(gen_scenario(cfg), InvalidConfig);
    cfg = {};
    cfg.bbox.max.lat = cfg.bbox.min.lat;
    CHECK_THROWS_AS(gen_scenario(cfg), InvalidConfig);
    cfg = {};
    cfg.n_waypoints = 0;
    CHECK_THROWS_AS(gen_scenario(cfg), InvalidConfig);
    cfg = {};
    cfg.caution_factor = 1.0;
    CHECK_THROWS_AS(gen_scenario(cfg), InvalidConfig);
}

TEST_CASE("scenario config JSON round trip and unknown-key rejection")
{
    ScenarioConfig cfg;
    cfg.seed = 17;
    cfg.n_zones = 2;
    const auto back = scenario_from_json(to_json(cfg));
    CHECK(canonicalize(to_json(back)) == canonicalize(to_json(cfg)));
    CHECK(scenario_from_json(json{{"seed", 5}}).seed == 5);
    CHECK_THROWS_AS(scenario_from_json(json{{"sede", 5}}), InvalidConfig);
    CHECK_THROWS_AS(scenario_from_json(json{{"bbox", {{"min", {{"lat", 1}, {"x", 2}}}}}}), InvalidConfig);
    CHECK_THROWS_AS(scenario_from_json(json{{"n_zones", "three"}}), InvalidConfig);
}

TEST_CASE("message log round trip")
{
    ScenarioConfig cfg;
    cfg.duration_s = 10;
    const auto msgs = gen_scenario(cfg);
    const auto path = std::filesystem::temp_directory_path() / "awareness_msglog_test.ndjson";
    write_message_log(path, msgs);
    const auto back = read_message_log(path);
    REQUIRE(back.size() == msgs.size());
    for (std::size_t i = 0; i < msgs.size(); ++i) {
        CHECK(message_line(back[i]) == message_line(msgs[i]));
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_message_log(path), IoError);
}

TEST_CASE("message_from_json rejects broken invariants")
{
    ScenarioConfig cfg;
    cfg.duration_s = 1;
    auto j = to_json(gen_scenario(cfg).front());
    j["warningMode"] = 3;
    CHECK_THROWS_AS(message_from_json(j), InvalidConfig);
    j["warningMode"] = 1;
    j["waypoints"] = json::array();
    CHECK_THROWS_AS(message_from_json(j), InvalidConfig);
}
