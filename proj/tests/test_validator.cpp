#include <doctest.h>
#include <fstream>

#include <cmath>
#include <filesystem>

#include "awareness/error.hpp"
#include "awareness/model/scenario.hpp"
#include "awareness/rng.hpp"
#include "awareness/validate/distinguisher.hpp"
#include "awareness/validate/validator.hpp"
#include "support/fixtures.hpp"

using namespace awareness;
using namespace awareness::validate;
using model::CanonicalJson;
using model::ModelMessage;

namespace {

ModelMessage msg_at(std::uint64_t seq, std::uint64_t ts, int mode = 0)
{
    ModelMessage m;
    m.seq = seq;
    m.ts_ms = ts;
    m.drone = {{40.71, -74.0}, 100.0, 0.0};
    m.warning_mode = mode;
    m.waypoints = {{40.71, -74.0}};
    return m;
}

gui::FrameLogEntry frame_at(std::uint64_t seq, std::uint64_t ts)
{
    return {seq, ts, gui::frame_path(seq), 8, 8, 0};
}

VerdictRecord verdict(std::uint64_t seq, bool pass)
{
    return {seq, seq * 100, {"{}"}, {"{}"}, pass, 0};
}

/// Both roots of (p_hat - p)^2 = z^2 p (1 - p) / n.
Interval wilson_by_quadratic(double k, double n)
{
    const double z2 = kZ95 * kZ95, ph = k / n;
    const double a = 1 + z2 / n, b = -(2 * ph + z2 / n), c = ph * ph;
    const double disc = std::sqrt(std::max(0.0, b * b - 4 * a * c));
    return {(-b - disc) / (2 * a), (-b + disc) / (2 * a)};
}

const CanonicalJson kMode0{R"({"warningMode":0})"}, kMode1{R"({"warningMode":1})"}, kMode2{R"({"warningMode":2})"};

}  // namespace

TEST_CASE("pair_logs examples")
{
    const std::vector msgs{msg_at(0, 0), msg_at(1, 100), msg_at(2, 200)};
    const std::vector frames{frame_at(0, 150)};
    auto p = pair_logs(frames, msgs);
    REQUIRE(p.samples.size() == 1);
    CHECK(p.samples[0].message.ts_ms == 100);
    CHECK(p.samples[0].lag_ms == 50);
    CHECK(p.samples[0].alternates.empty());

    p = pair_logs(std::vector{frame_at(0, 50), frame_at(1, 150)}, std::vector{msg_at(1, 100)});
    CHECK(p.skipped == 1);
    CHECK(p.samples.size() == 1);

    p = pair_logs(frames, msgs, 120);
    REQUIRE(p.samples[0].alternates.size() == 1);
    CHECK(p.samples[0].alternates[0].ts_ms == 100);

    // Equal timestamps: the later message wins.
    p = pair_logs(frames, std::vector{msg_at(0, 100), msg_at(1, 100)});
    CHECK(p.samples[0].message.seq == 1);

    CHECK_THROWS_AS(pair_logs(frames, std::vector{msg_at(0, 100), msg_at(1, 50)}), UnsortedLog);
    CHECK_THROWS_AS(pair_logs(std::vector{frame_at(0, 100), frame_at(1, 50)}, msgs), UnsortedLog);
}

TEST_CASE("pair_logs agrees with a brute-force scan on random logs")
{
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ModelMessage> msgs;
        std::uint64_t ts = rng.uniform_int(0, 300);
        const int n_msgs = static_cast<int>(rng.uniform_int(0, 40));
        for (int i = 0; i < n_msgs; ++i) {
            msgs.push_back(msg_at(static_cast<std::uint64_t>(i), ts));
            ts += rng.uniform_int(0, 150);
        }
        std::vector<gui::FrameLogEntry> frames;
        ts = rng.uniform_int(0, 200);
        const int n_frames = static_cast<int>(rng.uniform_int(0, 40));
        for (int i = 0; i < n_frames; ++i) {
            frames.push_back(frame_at(static_cast<std::uint64_t>(i), ts));
            ts += rng.uniform_int(0, 150);
        }
        const std::uint64_t window = rng.uniform_int(0, 400);
        const auto p = pair_logs(frames, msgs, window);
        std::size_t k = 0, skipped = 0;
        for (const auto& f : frames) {
            const ModelMessage* best = nullptr;
            std::vector<std::uint64_t> alts;
            for (const auto& m : msgs) {
                if (m.ts_ms <= f.ts_ms && (!best || m.ts_ms >= best->ts_ms)) {
                    best = &m;
                }
                if (m.ts_ms <= f.ts_ms && m.ts_ms + window >= f.ts_ms) {
                    alts.push_back(m.seq);
                }
            }
            if (!best) {
                ++skipped;
                continue;
            }
            REQUIRE(k < p.samples.size());
            CHECK(p.samples[k].message.seq == best->seq);
            std::vector<std::uint64_t> got;
            for (const auto& a : p.samples[k].alternates) {
                got.push_back(a.seq);
            }
            CHECK(got == alts);
            ++k;
        }
        CHECK(k == p.samples.size());
        CHECK(skipped == p.skipped);
    }
}

TEST_CASE("judge: equality, absent paths and window monotonicity")
{
    const auto fw = model::FilterSpec::warning_mode();
    const std::vector msgs{msg_at(0, 0, 1), msg_at(1, 100, 2), msg_at(2, 200, 2)};
    const std::vector frames{frame_at(0, 250)};
    const auto p0 = pair_logs(frames, msgs);
    CHECK(judge(p0.samples[0], fw, {{"warningMode", 2}}).pass);
    const auto stale = judge(p0.samples[0], fw, {{"warningMode", 1}});
    CHECK_FALSE(stale.pass);
    CHECK(stale.perceived == kMode1);
    CHECK(stale.actual == kMode2);
    CHECK(judge(p0.samples[0], model::FilterSpec{"drone.nope"}, {{"warningMode", 1}}).pass);

    // Growing the window never turns a pass into a failure.
    Rng rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ModelMessage> ms;
        for (int i = 0; i < 20; ++i) {
            ms.push_back(msg_at(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(i) * 100,
                                static_cast<int>(rng.uniform_int(0, 2))));
        }
        const std::vector f{frame_at(0, rng.uniform_int(0, 2100))};
        const nlohmann::json perceived{{"warningMode", rng.uniform_int(0, 2)}};
        bool passed = false;
        for (std::uint64_t w : {0, 50, 100, 250, 600, 3000}) {
            const bool now = judge(pair_logs(f, ms, w).samples.at(0), fw, perceived).pass;
            CHECK((!passed || now));
            passed = now;
        }
    }
}

TEST_CASE("Wilson interval matches the quadratic roots and contains the estimate")
{
    const auto ci = wilson_interval(0, 500);
    CHECK(ci.lo == 0.0);
    CHECK(ci.hi == doctest::Approx(0.007624).epsilon(1e-3));
    CHECK(ci.hi == doctest::Approx(kZ95 * kZ95 / (500 + kZ95 * kZ95)).epsilon(1e-12));
    Rng rng(33);
    for (int i = 0; i < 1000; ++i) {
        const auto n = static_cast<std::uint64_t>(rng.uniform_int(1, 5000));
        const auto k = static_cast<std::uint64_t>(rng.uniform_int(0, static_cast<std::int64_t>(n)));
        const auto got = wilson_interval(k, n);
        const auto want = wilson_by_quadratic(static_cast<double>(k), static_cast<double>(n));
        CHECK(got.lo == doctest::Approx(std::max(0.0, want.lo)).epsilon(1e-9).scale(1e-12));
        CHECK(got.hi == doctest::Approx(std::min(1.0, want.hi)).epsilon(1e-9).scale(1e-12));
        const double p = static_cast<double>(k) / n;
        CHECK(got.lo <= p);
        CHECK(p <= got.hi);
    }
}

TEST_CASE("estimate_awareness examples")
{
    std::vector<VerdictRecord> ok;
    for (std::uint64_t i = 0; i < 500; ++i) {
        ok.push_back(verdict(i, true));
    }
    auto r = estimate_awareness(ok);
    CHECK(r.epsilon_hat == 0.0);
    CHECK(r.ci95.hi == doctest::Approx(0.007624).epsilon(1e-3));
    CHECK(r.fault_episodes.empty());

    std::vector<VerdictRecord> bad{verdict(0, false), verdict(1, false)};
    CHECK(estimate_awareness(bad).epsilon_hat == 1.0);

    std::vector<VerdictRecord> mixed;
    for (std::uint64_t i = 0; i < 50; ++i) {
        mixed.push_back(verdict(i, !((i >= 10 && i <= 12) || i == 40)));
    }
    r = estimate_awareness(mixed);
    CHECK(r.failures == 4);
    REQUIRE(r.fault_episodes.size() == 2);
    CHECK(r.fault_episodes[0].start_ts_ms == 1000);
    CHECK(r.fault_episodes[0].end_ts_ms == 1200);
    CHECK(r.fault_episodes[0].frames == 3);
    CHECK(r.fault_episodes[1].start_frame_seq == 40);
    CHECK(to_json(r)["fault_episodes"].size() == 2);

    CHECK_THROWS_AS(estimate_awareness({}), EmptyInput);
}

TEST_CASE("verdict log round trip")
{
    const auto path = std::filesystem::temp_directory_path() / "awareness_test_verdicts.ndjson";
    const std::vector v{VerdictRecord{3, 300, kMode1, kMode2, false, 40}, VerdictRecord{4, 400, kMode2, kMode2, true, 0}};
    write_verdicts(path, v);
    CHECK(read_verdicts(path) == v);
    CHECK_THROWS_AS(read_verdicts("/nonexistent/v.ndjson"), MissingArtifact);
}

TEST_CASE("offline validation of rendered runs: faultless passes, transition_blind fails stale")
{
    const auto& det = testsupport::trained_detector();
    const auto mapping = interp::AffordanceMapping::for_detector(det.config());
    const auto fw = model::FilterSpec::warning_mode();
    const auto msgs = model::gen_scenario(model::ScenarioConfig{});
    const auto root = std::filesystem::temp_directory_path() / "awareness_test_validate";
    std::filesystem::remove_all(root);

    // Fixture danger onset at 41.6 s.
    const gui::RenderLoopConfig loop{2.0, 8.0, 38000};
    {
        gui::DirectorySink sink(root / "clean");
        gui::run_render_loop(msgs, loop, {}, {}, sink);
    }
    const auto clean = validate_run(root / "clean", msgs, fw, det, mapping);
    CHECK(clean.verdicts.size() == 16);
    CHECK(clean.interpreted <= clean.verdicts.size());
    CHECK(estimate_awareness(clean.verdicts).failures == 0);

    const gui::FaultConfig blind{gui::FaultMode::transition_blind, gui::FaultWindow{39000, 44000}};
    {
        gui::DirectorySink sink(root / "blind");
        gui::run_render_loop(msgs, loop, blind, {}, sink);
    }
    const auto faulty = validate_run(root / "blind", msgs, fw, det, mapping);
    const auto report = estimate_awareness(faulty.verdicts);
    CHECK(report.failures > 0);
    for (const auto& v : faulty.verdicts) {
        if (!v.pass) {
            CHECK(blind.active_at(v.ts_ms));
            CHECK(v.perceived == kMode1);
            CHECK(v.actual == kMode2);
        }
    }
    REQUIRE(report.fault_episodes.size() == 1);
    CHECK(report.fault_episodes[0].start_ts_ms - 41600 <= 500);

    std::filesystem::create_directories(root / "empty");
    { std::ofstream(root / "empty" / gui::kFramesManifest); }
    CHECK_THROWS_AS(validate_run(root / "empty", msgs, fw, det, mapping), EmptyInput);
}

TEST_CASE("distinguishers: random and equality contracts")
{
    const std::vector<ViewPair> equal{{kMode2, kMode2}, {kMode0, kMode0}};
    const auto r = distinguisher_game(equal, v_random, 10000, 1);
    CHECK(r.p_hat >= 0.485);
    CHECK(r.p_hat <= 0.515);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        for (const auto& v : {Distinguisher(v_random), Distinguisher(v_equality),
                              make_v_likelihood(CalibrationTable::from_trace(equal))}) {
            CHECK(distinguisher_game(equal, v, 1000, seed).advantage <= 3.0 / (2.0 * std::sqrt(1000.0)));
        }
    }
    int ones = 0;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        Rng rng(s);
        ones += v_equality(kMode1, kMode1, rng);
    }
    CHECK(ones > 900);
    CHECK(ones < 1100);
    Rng rng(0);
    CHECK(v_equality(kMode2, kMode0, rng) == 0);
    CHECK(v_equality(kMode0, kMode2, rng) == 1);
    // Same seed, same result.
    CHECK(distinguisher_game(equal, v_random, 100, 9).correct == distinguisher_game(equal, v_random, 100, 9).correct);
}

TEST_CASE("v_likelihood: calibration example and missing table")
{
    // Perceived is 0 whenever it differs from real.
    const std::vector<ViewPair> calib{{kMode2, kMode0}, {kMode2, kMode2}, {kMode0, kMode0}, {kMode1, kMode0},
                                      {kMode1, kMode1}};
    const auto table = CalibrationTable::from_trace(calib);
    Rng rng(1);
    CHECK(v_likelihood(kMode0, kMode2, table, rng) == 1);
    CHECK(v_likelihood(kMode2, kMode0, table, rng) == 0);
    CHECK_THROWS_AS(v_likelihood(kMode0, kMode2, CalibrationTable{}, rng), MissingCalibration);
    CHECK_THROWS_AS(make_v_likelihood(CalibrationTable{}), MissingCalibration);
}

TEST_CASE("v_likelihood reaches the Bayes-optimal rate of a skewed joint distribution")
{
    // Joint (real, perceived): mostly equal, stale caution shown for danger.
    std::vector<ViewPair> trace;
    for (int i = 0; i < 60; ++i) {
        trace.push_back({kMode0, kMode0});
    }
    for (int i = 0; i < 20; ++i) {
        trace.push_back({kMode1, kMode1});
    }
    for (int i = 0; i < 12; ++i) {
        trace.push_back({kMode2, kMode2});
    }
    for (int i = 0; i < 6; ++i) {
        trace.push_back({kMode2, kMode1});
    }
    for (int i = 0; i < 2; ++i) {
        trace.push_back({kMode1, kMode2});
    }
    // Oracle: sum over ordered pairs of 0.5 * max(J(a,b), J(b,a)).
    std::map<std::pair<std::string, std::string>, double> joint;
    for (const auto& p : trace) {
        joint[{p.real.text, p.perceived.text}] += 1.0 / static_cast<double>(trace.size());
    }
    const std::string values[] = {kMode0.text, kMode1.text, kMode2.text};
    double optimum = 0.0;
    for (const auto& a : values) {
        for (const auto& b : values) {
            optimum += 0.5 * std::max(joint[{a, b}], joint[{b, a}]);
        }
    }
    CHECK(optimum == doctest::Approx(0.52));  // 0.5 * 0.92 + 2 * 0.5 * 0.06
    const auto r = distinguisher_game(trace, make_v_likelihood(CalibrationTable::from_trace(trace)), 1000, 77);
    CHECK(r.ci95.lo <= optimum);
    CHECK(optimum <= r.ci95.hi);
}
