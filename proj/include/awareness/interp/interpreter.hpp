#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/detect/detector.hpp"

namespace awareness::interp {

struct AffordanceMapping {
    int caution_mode = 1;
    int danger_mode = 2;
    int absence_mode = 0;
    double min_score = 0.6;

    /// Default mapping with min_score taken from the detector threshold.
    static AffordanceMapping for_detector(const detect::DetectorConfig& cfg);
};

/// Throws InvalidConfig unless class modes are distinct and absence_mode is neither.
void validate(const AffordanceMapping& m);

struct SynthesizedModel {
    nlohmann::json tree;                      ///< {"warningMode": m}
    std::vector<detect::Detection> provenance;  ///< the deciding detection, if any
};

/// Mode of the highest-scoring warning detection at or above min_score
/// (ties: leftmost, then topmost); absence_mode when there is none.
int perceived_mode(std::span<const detect::Detection> dets, const AffordanceMapping& m);

SynthesizedModel interpret(const raster::Image& frame, const detect::Detector& det, const AffordanceMapping& m);

}  // namespace awareness::interp
