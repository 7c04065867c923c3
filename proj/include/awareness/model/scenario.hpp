#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "awareness/model/message.hpp"

namespace awareness::model {

struct BoundingBox {
    GeoPoint min;
    GeoPoint max;
};

/// Everything that determines a generated message stream.
struct ScenarioConfig {
    BoundingBox bbox{{40.700, -74.020}, {40.730, -73.980}};
    int n_waypoints = 8;
    int n_zones = 5;
    double speed_mps = 15.0;
    double msg_rate_hz = 5.0;
    double duration_s = 600.0;
    std::uint64_t seed = 5;
    double caution_factor = 1.5;
    double danger_radius_min_m = 120.0;
    double danger_radius_max_m = 360.0;
    double alt_m = 120.0;
};

/// Throws InvalidConfig on a violated invariant.
void validate(const ScenarioConfig& cfg);

nlohmann::json to_json(const ScenarioConfig& cfg);

/// Overlays `j` on the defaults. Unknown keys are rejected with InvalidConfig.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// 2 inside any danger radius, else 1 inside any caution radius, else 0.
int warning_mode_at(const GeoPoint& p, std::span<const HazardZone> zones);

/// The hazard zones a config produces (seeded, independent of the route).
std::vector<HazardZone> gen_zones(const ScenarioConfig& cfg);

/// Number of ticks at `rate_hz` strictly before `duration_s`.
std::uint64_t tick_count(double duration_s, double rate_hz);

/// Simulation timestamp of tick `k` at `rate_hz`.
std::uint64_t tick_ts_ms(std::uint64_t k, double rate_hz);

/// Deterministic stream: the drone flies the closed waypoint loop at
/// `speed_mps`, one message per tick, warningMode from the hazard zones.
std::vector<ModelMessage> gen_scenario(const ScenarioConfig& cfg);

// Message log: NDJSON, one canonical message per line.
std::string message_line(const ModelMessage& m);
void write_message_log(const std::filesystem::path& path, std::span<const ModelMessage> msgs);
std::vector<ModelMessage> read_message_log(const std::filesystem::path& path);

}  // namespace awareness::model
