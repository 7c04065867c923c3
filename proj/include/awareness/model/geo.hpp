#pragma once

namespace awareness::model {

inline constexpr double kEarthRadiusM = 6371008.8;

struct GeoPoint {
    double lat = 0.0;  ///< degrees, -90..90
    double lon = 0.0;  ///< degrees, -180..180

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Throws InvalidConfig when lat/lon are non-finite or out of range.
void validate(const GeoPoint& p);

/// Great-circle distance in meters.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

/// Initial bearing from `from` to `to`, degrees clockwise from north in [0, 360).
double bearing_deg(const GeoPoint& from, const GeoPoint& to);

/// Point reached travelling `distance_m` from `origin` on initial bearing `bearing`.
GeoPoint destination(const GeoPoint& origin, double bearing, double distance_m);

/// Linear interpolation in lat/lon, t in [0,1].
GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double t);

}  // namespace awareness::model
