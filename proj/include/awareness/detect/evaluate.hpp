#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "awareness/detect/detector.hpp"
#include "awareness/interp/interpreter.hpp"
#include "awareness/spec/dataset.hpp"

namespace awareness::detect {

struct ClassMetrics {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    std::optional<double> precision;  ///< absent when tp + fp = 0
    std::optional<double> recall;     ///< absent when tp + fn = 0
};

struct Metrics {
    ClassMetrics caution;
    ClassMetrics danger;
    int frames = 0;
    int correct_frames = 0;
    std::optional<double> mode_accuracy;  ///< absent for an empty holdout
};

inline constexpr double kMatchIou = 0.5;

/// Detection/truth matching at IoU >= 0.5 (same class, one-to-one, greedy by
/// score) plus frame-level mode accuracy under the interpreter rule.
Metrics evaluate(const Detector& det, std::span<const spec::LabeledImage> holdout,
                 const std::filesystem::path& base_dir, const interp::AffordanceMapping& mapping);

nlohmann::json to_json(const Metrics& m);

}  // namespace awareness::detect
