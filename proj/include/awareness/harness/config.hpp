#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "awareness/detect/detector.hpp"
#include "awareness/gui/renderer.hpp"
#include "awareness/model/filter.hpp"
#include "awareness/model/scenario.hpp"
#include "awareness/spec/dataset.hpp"

namespace awareness::harness {

struct Rates {
    double render_fps = 10.0;
    double validate_hz = 1.0;
};

struct NetConfig {
    std::string backend_host = "127.0.0.1";
    std::uint16_t backend_port = 7400;
    std::uint16_t gateway_port = 7401;
};

/// Offline render run: simulated span and start time.
struct RenderRunConfig {
    double duration_s = 60.0;
    std::uint64_t t0_ms = 0;
};

enum class LiveSource { in_process, tcp };

struct LiveConfig {
    double duration_s = 60.0;
    std::uint64_t t0_ms = 0;   ///< in-process source starts here
    double time_scale = 1.0;   ///< simulated ms per wall ms
    LiveSource source = LiveSource::in_process;
    int connect_attempts = 20;
    int connect_backoff_ms = 250;
};

struct HarnessConfig {
    model::ScenarioConfig scenario;  ///< owns msg_rate_hz
    spec::SpecDatasetConfig spec;
    detect::DetectorConfig detector;
    model::FilterSpec filter = model::FilterSpec::warning_mode();
    Rates rates;
    gui::FaultConfig fault;
    gui::ViewConfig view;
    NetConfig net;
    RenderRunConfig render;
    LiveConfig live;
    std::optional<std::uint64_t> window_ms;  ///< pairing tolerance window
    double accuracy_floor = 1.0;
    std::filesystem::path out_dir = "out";
};

/// Throws InvalidConfig on any violated invariant, including the nested configs.
void validate(const HarnessConfig& cfg);

nlohmann::json to_json(const HarnessConfig& cfg);
/// Overlays `j` on the defaults; unknown keys are rejected with InvalidConfig.
/// `rates.msg_rate_hz` and `scenario.msg_rate_hz` must agree when both are given.
HarnessConfig harness_config_from_json(const nlohmann::json& j);
HarnessConfig load_harness_config(const std::filesystem::path& path);

/// Replaces every seed the pipeline draws from (scenario and spec dataset).
void override_seed(HarnessConfig& cfg, std::uint64_t seed);

// Artifact layout under out_dir.
std::filesystem::path spec_dir(const HarnessConfig& cfg);
std::filesystem::path model_dir(const HarnessConfig& cfg);
std::filesystem::path metrics_path(const HarnessConfig& cfg);
std::filesystem::path run_dir(const HarnessConfig& cfg);
std::filesystem::path live_dir(const HarnessConfig& cfg);
std::filesystem::path backend_dir(const HarnessConfig& cfg);

inline constexpr const char* kMessagesFile = "messages.ndjson";
inline constexpr const char* kVerdictsFile = "verdicts.ndjson";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kSplitFile = "split.json";
inline constexpr const char* kLiveVerdictsFile = "live_verdicts.ndjson";

}  // namespace awareness::harness
