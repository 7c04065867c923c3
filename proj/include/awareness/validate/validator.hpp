#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/detect/detector.hpp"
#include "awareness/gui/renderer.hpp"
#include "awareness/interp/interpreter.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/model/filter.hpp"
#include "awareness/model/message.hpp"

namespace awareness::validate {

struct PairedSample {
    gui::FrameLogEntry frame;
    model::ModelMessage message;  ///< latest with ts <= frame ts (last one on ties)
    std::uint64_t lag_ms = 0;
    /// With a window: every message with ts in [frame ts - window, frame ts].
    std::vector<model::ModelMessage> alternates;
};

struct Pairing {
    std::vector<PairedSample> samples;
    std::uint64_t skipped = 0;  ///< frames older than every message
};

/// Throws UnsortedLog unless both logs are non-decreasing in ts_ms.
Pairing pair_logs(std::span<const gui::FrameLogEntry> frames, std::span<const model::ModelMessage> messages,
                  std::optional<std::uint64_t> window_ms = std::nullopt);

struct VerdictRecord {
    std::uint64_t frame_seq = 0;
    std::uint64_t ts_ms = 0;
    model::CanonicalJson perceived;
    model::CanonicalJson actual;
    bool pass = false;
    std::uint64_t lag_ms = 0;

    friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

nlohmann::json to_json(const VerdictRecord& v);
VerdictRecord verdict_from_json(const nlohmann::json& j);
void write_verdicts(const std::filesystem::path& path, std::span<const VerdictRecord> verdicts);
std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& path);

/// Verdict for an already interpreted frame: pass when the filtered
/// perception equals the filtered message or any alternate.
VerdictRecord judge(const PairedSample& s, const model::FilterSpec& f, const nlohmann::json& perceived_tree);

/// Reads the frame (relative to `run_dir`), interprets it and judges it.
VerdictRecord validate_pair(const PairedSample& s, const model::FilterSpec& f, const std::filesystem::path& run_dir,
                            const detect::Detector& det, const interp::AffordanceMapping& mapping);

struct OfflineResult {
    std::vector<VerdictRecord> verdicts;
    std::uint64_t skipped = 0;
    std::uint64_t interpreted = 0;  ///< distinct frames actually run through the detector
};

/// Pairs, interprets and judges every frame of a run. Consecutive frames
/// with identical PNG bytes are interpreted once. Throws EmptyInput when
/// the run has no frames.
OfflineResult validate_run(const std::filesystem::path& run_dir, std::span<const model::ModelMessage> messages,
                           const model::FilterSpec& f, const detect::Detector& det,
                           const interp::AffordanceMapping& mapping,
                           std::optional<std::uint64_t> window_ms = std::nullopt);

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for k successes in n trials.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = kZ95);

struct FaultEpisode {
    std::uint64_t start_ts_ms = 0;  ///< first failing frame
    std::uint64_t end_ts_ms = 0;    ///< last failing frame
    std::uint64_t start_frame_seq = 0;
    std::uint64_t end_frame_seq = 0;
    std::uint64_t frames = 0;
};

struct AwarenessReport {
    std::uint64_t n = 0;
    std::uint64_t failures = 0;
    double epsilon_hat = 0.0;
    Interval ci95;
    std::vector<FaultEpisode> fault_episodes;
};

/// Throws EmptyInput on no verdicts.
AwarenessReport estimate_awareness(std::span<const VerdictRecord> verdicts);
nlohmann::json to_json(const AwarenessReport& r);

}  // namespace awareness::validate
