#include "awareness/model/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "awareness/error.hpp"
#include "awareness/model/canonical_json.hpp"
#include "awareness/rng.hpp"

namespace awareness::model {

namespace {

enum Stream : std::uint64_t { kWaypoints = 1, kZones = 2 };

GeoPoint random_point(Rng& rng, const BoundingBox& bbox)
{
    return {rng.uniform(bbox.min.lat, bbox.max.lat), rng.uniform(bbox.min.lon, bbox.max.lon)};
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* what)
{
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) {
            throw InvalidConfig(std::string("unknown key '") + key + "' in " + what);
        }
    }
}

GeoPoint point_or(const nlohmann::json& j, GeoPoint fallback)
{
    reject_unknown(j, {"lat", "lon"}, "point");
    return {j.value("lat", fallback.lat), j.value("lon", fallback.lon)};
}

}  // namespace

void validate(const ScenarioConfig& cfg)
{
    validate(cfg.bbox.min);
    validate(cfg.bbox.max);
    if (!(cfg.bbox.min.lat < cfg.bbox.max.lat) || !(cfg.bbox.min.lon < cfg.bbox.max.lon)) {
        throw InvalidConfig("bbox min must be below max componentwise");
    }
    if (cfg.n_waypoints < 1 || cfg.n_zones < 0) {
        throw InvalidConfig("need n_waypoints >= 1 and n_zones >= 0");
    }
    if (!(cfg.speed_mps > 0.0) || !(cfg.msg_rate_hz > 0.0) || !(cfg.duration_s > 0.0)) {
        throw InvalidConfig("speed, rate and duration must be positive");
    }
    if (!(cfg.caution_factor > 1.0)) {
        throw InvalidConfig("caution_factor must exceed 1");
    }
    if (!(cfg.danger_radius_min_m > 0.0) || cfg.danger_radius_max_m < cfg.danger_radius_min_m) {
        throw InvalidConfig("danger radius range invalid");
    }
    if (!std::isfinite(cfg.alt_m) || cfg.alt_m < 0.0) {
        throw InvalidConfig("alt_m must be >= 0");
    }
}

nlohmann::json to_json(const ScenarioConfig& cfg)
{
    return {
        {"bbox", {{"min", to_json(cfg.bbox.min)}, {"max", to_json(cfg.bbox.max)}}},
        {"n_waypoints", cfg.n_waypoints},
        {"n_zones", cfg.n_zones},
        {"speed_mps", cfg.speed_mps},
        {"msg_rate_hz", cfg.msg_rate_hz},
        {"duration_s", cfg.duration_s},
        {"seed", cfg.seed},
        {"caution_factor", cfg.caution_factor},
        {"danger_radius_m", {cfg.danger_radius_min_m, cfg.danger_radius_max_m}},
        {"alt_m", cfg.alt_m},
    };
}

ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw InvalidConfig("scenario config must be an object");
    }
    reject_unknown(j,
                   {"bbox", "n_waypoints", "n_zones", "speed_mps", "msg_rate_hz", "duration_s",
                    "seed", "caution_factor", "danger_radius_m", "alt_m"},
                   "scenario");
    ScenarioConfig cfg;
    try {
        if (auto it = j.find("bbox"); it != j.end()) {
            reject_unknown(*it, {"min", "max"}, "bbox");
            cfg.bbox.min = point_or(it->value("min", nlohmann::json::object()), cfg.bbox.min);
            cfg.bbox.max = point_or(it->value("max", nlohmann::json::object()), cfg.bbox.max);
        }
        cfg.n_waypoints = j.value("n_waypoints", cfg.n_waypoints);
        cfg.n_zones = j.value("n_zones", cfg.n_zones);
        cfg.speed_mps = j.value("speed_mps", cfg.speed_mps);
        cfg.msg_rate_hz = j.value("msg_rate_hz", cfg.msg_rate_hz);
        cfg.duration_s = j.value("duration_s", cfg.duration_s);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.caution_factor = j.value("caution_factor", cfg.caution_factor);
        if (auto it = j.find("danger_radius_m"); it != j.end()) {
            if (!it->is_array() || it->size() != 2) {
                throw InvalidConfig("danger_radius_m must be [min, max]");
            }
            cfg.danger_radius_min_m = (*it)[0].get<double>();
            cfg.danger_radius_max_m = (*it)[1].get<double>();
        }
        cfg.alt_m = j.value("alt_m", cfg.alt_m);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(e.what());
    }
    validate(cfg);
    return cfg;
}

int warning_mode_at(const GeoPoint& p, std::span<const HazardZone> zones)
{
    int mode = 0;
    for (const auto& z : zones) {
        const double d = haversine_m(p, z.center);
        if (d <= z.danger_radius_m) {
            return 2;
        }
        if (d <= z.caution_radius_m()) {
            mode = 1;
        }
    }
    return mode;
}

std::vector<HazardZone> gen_zones(const ScenarioConfig& cfg)
{
    Rng rng(derive_seed(cfg.seed, kZones));
    std::vector<HazardZone> zones;
    zones.reserve(static_cast<std::size_t>(cfg.n_zones));
    for (int i = 0; i < cfg.n_zones; ++i) {
        HazardZone z;
        z.center = random_point(rng, cfg.bbox);
        z.danger_radius_m = rng.uniform(cfg.danger_radius_min_m, cfg.danger_radius_max_m);
        z.caution_factor = cfg.caution_factor;
        zones.push_back(z);
    }
    return zones;
}

std::uint64_t tick_count(double duration_s, double rate_hz)
{
    return static_cast<std::uint64_t>(std::ceil(duration_s * rate_hz - 1e-9));
}

std::uint64_t tick_ts_ms(std::uint64_t k, double rate_hz)
{
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(k) * 1000.0 / rate_hz));
}

std::vector<ModelMessage> gen_scenario(const ScenarioConfig& cfg)
{
    validate(cfg);
    Rng rng(derive_seed(cfg.seed, kWaypoints));
    std::vector<GeoPoint> waypoints;
    for (int i = 0; i < cfg.n_waypoints; ++i) {
        waypoints.push_back(random_point(rng, cfg.bbox));
    }
    const auto zones = gen_zones(cfg);

    // Closed loop: the last leg returns to the first waypoint.
    const std::size_t n = waypoints.size();
    std::vector<double> leg_start(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        leg_start[i + 1] = leg_start[i] + haversine_m(waypoints[i], waypoints[(i + 1) % n]);
    }
    const double loop_m = leg_start[n];

    const std::uint64_t count = tick_count(cfg.duration_s, cfg.msg_rate_hz);
    std::vector<ModelMessage> out;
    out.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        ModelMessage m;
        m.seq = k;
        m.ts_ms = tick_ts_ms(k, cfg.msg_rate_hz);
        m.drone.alt_m = cfg.alt_m;
        m.waypoints = waypoints;
        if (loop_m <= 0.0) {
            m.drone.pos = waypoints.front();
            m.drone.heading_deg = 0.0;
        } else {
            const double travelled = std::fmod(cfg.speed_mps * static_cast<double>(k) / cfg.msg_rate_hz, loop_m);
            std::size_t leg = 0;
            while (leg + 1 < n && leg_start[leg + 1] <= travelled) {
                ++leg;
            }
            const double leg_len = leg_start[leg + 1] - leg_start[leg];
            const double t = leg_len > 0.0 ? (travelled - leg_start[leg]) / leg_len : 0.0;
            const GeoPoint& next = waypoints[(leg + 1) % n];
            m.drone.pos = lerp(waypoints[leg], next, t);
            m.drone.heading_deg = bearing_deg(m.drone.pos, next);
        }
        m.warning_mode = warning_mode_at(m.drone.pos, zones);
        out.push_back(std::move(m));
    }
    return out;
}

std::string message_line(const ModelMessage& m)
{
    return canonicalize(to_json(m)).text;
}

void write_message_log(const std::filesystem::path& path, std::span<const ModelMessage> msgs)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string());
    }
    for (const auto& m : msgs) {
        out << message_line(m) << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

std::vector<ModelMessage> read_message_log(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<ModelMessage> msgs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        msgs.push_back(message_from_json(parse_json(line)));
    }
    return msgs;
}

}  // namespace awareness::model
