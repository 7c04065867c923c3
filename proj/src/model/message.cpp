#include "awareness/model/message.hpp"

#include <cmath>

#include "awareness/error.hpp"

namespace awareness::model {

namespace {

double number_at(const nlohmann::json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
        throw InvalidConfig(std::string("missing numeric field '") + key + "'");
    }
    return it->get<double>();
}

std::uint64_t unsigned_at(const nlohmann::json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
        throw InvalidConfig(std::string("missing non-negative integer field '") + key + "'");
    }
    return it->get<std::uint64_t>();
}

GeoPoint point_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw InvalidConfig("expected {lat, lon} object");
    }
    GeoPoint p{number_at(j, "lat"), number_at(j, "lon")};
    validate(p);
    return p;
}

}  // namespace

nlohmann::json to_json(const GeoPoint& p)
{
    return {{"lat", p.lat}, {"lon", p.lon}};
}

nlohmann::json to_json(const ModelMessage& m)
{
    nlohmann::json wps = nlohmann::json::array();
    for (const auto& w : m.waypoints) {
        wps.push_back(to_json(w));
    }
    return {
        {"seq", m.seq},
        {"ts_ms", m.ts_ms},
        {"drone",
         {{"pos", to_json(m.drone.pos)},
          {"alt_m", m.drone.alt_m},
          {"heading_deg", m.drone.heading_deg}}},
        {"warningMode", m.warning_mode},
        {"waypoints", std::move(wps)},
    };
}

ModelMessage message_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw InvalidConfig("message must be an object");
    }
    ModelMessage m;
    m.seq = unsigned_at(j, "seq");
    m.ts_ms = unsigned_at(j, "ts_ms");
    auto drone = j.find("drone");
    if (drone == j.end() || !drone->is_object()) {
        throw InvalidConfig("missing 'drone'");
    }
    m.drone.pos = point_from_json(drone->value("pos", nlohmann::json()));
    m.drone.alt_m = number_at(*drone, "alt_m");
    m.drone.heading_deg = number_at(*drone, "heading_deg");
    auto mode = j.find("warningMode");
    if (mode == j.end() || !mode->is_number_integer()) {
        throw InvalidConfig("missing integer 'warningMode'");
    }
    m.warning_mode = mode->get<int>();
    auto wps = j.find("waypoints");
    if (wps == j.end() || !wps->is_array()) {
        throw InvalidConfig("missing 'waypoints'");
    }
    for (const auto& w : *wps) {
        m.waypoints.push_back(point_from_json(w));
    }
    validate(m);
    return m;
}

void validate(const ModelMessage& m)
{
    validate(m.drone.pos);
    if (!std::isfinite(m.drone.alt_m) || m.drone.alt_m < 0.0) {
        throw InvalidConfig("alt_m must be finite and >= 0");
    }
    if (!std::isfinite(m.drone.heading_deg) || m.drone.heading_deg < 0.0 ||
        m.drone.heading_deg >= 360.0) {
        throw InvalidConfig("heading_deg must lie in [0, 360)");
    }
    if (m.warning_mode < 0 || m.warning_mode > 2) {
        throw InvalidConfig("warningMode must be 0, 1 or 2");
    }
    if (m.waypoints.empty()) {
        throw InvalidConfig("at least one waypoint required");
    }
}

void validate(const HazardZone& z)
{
    validate(z.center);
    if (!(z.danger_radius_m > 0.0) || !(z.caution_factor > 1.0)) {
        throw InvalidConfig("hazard zone needs danger radius > 0 and caution factor > 1");
    }
}

}  // namespace awareness::model
