#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "awareness/detect/evaluate.hpp"
#include "awareness/harness/config.hpp"
#include "awareness/validate/distinguisher.hpp"
#include "awareness/validate/validator.hpp"

namespace awareness::harness {

inline constexpr double kTrainFraction = 2.0 / 3.0;

struct SpecgenResult {
    spec::SpecDataset dataset;
    std::vector<spec::LabeledImage> train;
    std::vector<spec::LabeledImage> test;
};

/// Dataset, labels and split.json under spec_dir(cfg). The split is seeded with the spec seed.
SpecgenResult cmd_specgen(const HarnessConfig& cfg);

/// Reads the dataset and its split. Throws MissingArtifact when specgen has not run.
SpecgenResult load_split(const HarnessConfig& cfg);

/// Trains on the train split and writes the TemplateSet to model_dir(cfg).
detect::TemplateSet cmd_train(const HarnessConfig& cfg);

/// Throws MissingArtifact when no model has been trained.
detect::Detector load_detector(const HarnessConfig& cfg);

struct EvalResult {
    detect::Metrics metrics;
    bool pass = false;  ///< holdout mode accuracy >= accuracy_floor
};

/// Evaluates on the held-out split and writes metrics.json.
EvalResult cmd_evaldet(const HarnessConfig& cfg);

struct RenderResult {
    std::vector<model::ModelMessage> messages;  ///< as logged
    std::vector<gui::FrameLogEntry> frames;
};

/// Renders a run into run_dir(cfg): frames, frames.ndjson and the message log
/// (every message sent before the run ends). Messages come from the scenario
/// or from `messages_path` when given.
RenderResult cmd_render(const HarnessConfig& cfg, const std::optional<std::filesystem::path>& messages_path = {});

struct ValidateResult {
    validate::OfflineResult offline;
    validate::AwarenessReport report;
    int exit_code = 0;  ///< 0 iff no verdict failed
};

/// Validates a logged run and writes verdicts.ndjson and report.json into `run`.
ValidateResult cmd_validate_offline(const HarnessConfig& cfg, const std::filesystem::path& run,
                                    const std::filesystem::path& messages_path);

/// Real and perceived views of every verdict in a verdict log.
std::vector<validate::ViewPair> trace_from_verdicts(const std::vector<validate::VerdictRecord>& verdicts);

/// Plays the game for v_random, v_equality and v_likelihood (calibrated on
/// `calibration`, or on the trace itself when absent).
std::vector<std::pair<std::string, validate::AdvantageReport>> cmd_distinguish(
    const std::vector<validate::ViewPair>& trace, const std::optional<std::vector<validate::ViewPair>>& calibration,
    std::uint64_t n_trials, std::uint64_t seed);

nlohmann::json advantage_json(const std::vector<std::pair<std::string, validate::AdvantageReport>>& reports);

/// Human-readable report lines including every fault episode.
std::string describe(const validate::AwarenessReport& r);

}  // namespace awareness::harness
