#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/model/geo.hpp"

namespace awareness::model {

/// Warning condition carried in `warningMode`.
enum class WarningMode : int { nominal = 0, caution = 1, danger = 2 };

struct DroneState {
    GeoPoint pos;
    double alt_m = 0.0;
    double heading_deg = 0.0;  ///< [0, 360)

    friend bool operator==(const DroneState&, const DroneState&) = default;
};

/// One timestamped backend tree.
struct ModelMessage {
    std::uint64_t seq = 0;
    std::uint64_t ts_ms = 0;
    DroneState drone;
    int warning_mode = 0;
    std::vector<GeoPoint> waypoints;

    friend bool operator==(const ModelMessage&, const ModelMessage&) = default;
};

struct HazardZone {
    GeoPoint center;
    double danger_radius_m = 1.0;
    double caution_factor = 1.5;

    double caution_radius_m() const { return danger_radius_m * caution_factor; }
};

nlohmann::json to_json(const GeoPoint& p);
nlohmann::json to_json(const ModelMessage& m);

/// Parses a message tree; throws InvalidConfig on missing fields or broken invariants.
ModelMessage message_from_json(const nlohmann::json& j);

void validate(const ModelMessage& m);
void validate(const HazardZone& z);

}  // namespace awareness::model
