#include "awareness/model/geo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "awareness/error.hpp"

namespace awareness::model {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

void validate(const GeoPoint& p)
{
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
        throw InvalidConfig("non-finite coordinate");
    }
    if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
        throw InvalidConfig("coordinate out of range: " + std::to_string(p.lat) + "," +
                            std::to_string(p.lon));
    }
}

double haversine_m(const GeoPoint& a, const GeoPoint& b)
{
    const double dlat = (b.lat - a.lat) * kDeg;
    const double dlon = (b.lon - a.lon) * kDeg;
    const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * std::sin(dlon / 2) *
                         std::sin(dlon / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

double bearing_deg(const GeoPoint& from, const GeoPoint& to)
{
    const double phi1 = from.lat * kDeg;
    const double phi2 = to.lat * kDeg;
    const double dlon = (to.lon - from.lon) * kDeg;
    const double y = std::sin(dlon) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlon);
    double deg = std::atan2(y, x) / kDeg;
    deg = std::fmod(deg + 360.0, 360.0);
    return deg >= 360.0 ? 0.0 : deg;
}

GeoPoint destination(const GeoPoint& origin, double bearing, double distance_m)
{
    const double delta = distance_m / kEarthRadiusM;
    const double theta = bearing * kDeg;
    const double phi1 = origin.lat * kDeg;
    const double lambda1 = origin.lon * kDeg;
    const double phi2 = std::asin(std::sin(phi1) * std::cos(delta) +
                                  std::cos(phi1) * std::sin(delta) * std::cos(theta));
    const double lambda2 =
        lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                             std::cos(delta) - std::sin(phi1) * std::sin(phi2));
    return {phi2 / kDeg, lambda2 / kDeg};
}

GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double t)
{
    return {a.lat + (b.lat - a.lat) * t, a.lon + (b.lon - a.lon) * t};
}

}  // namespace awareness::model
