#pragma once

#include <cmath>
#include <numbers>

namespace airsense {

// Mean Earth radius (IUGG) in meters.
inline constexpr double kEarthRadiusM = 6371008.8;

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

inline bool valid_coordinates(double lat, double lon) {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
           lon >= -180.0 && lon <= 180.0;
}

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Great-circle distance in meters.
inline double haversine_m(LatLon a, LatLon b) {
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dphi = phi2 - phi1;
    const double dlambda = deg2rad(b.lon - a.lon);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    if (h > 1.0) h = 1.0;
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

// Offset a point by a local east/north displacement in meters (equirectangular;
// accurate to well under a meter at the km scales used for sensor grids).
inline LatLon offset_m(LatLon origin, double east_m, double north_m) {
    const double dlat = north_m / kEarthRadiusM;
    const double dlon = east_m / (kEarthRadiusM * std::cos(deg2rad(origin.lat)));
    return {origin.lat + dlat * 180.0 / std::numbers::pi,
            origin.lon + dlon * 180.0 / std::numbers::pi};
}

// Aldo Moro Square, Bari.
inline constexpr LatLon kBariAldoMoro{41.1258, 16.8674};

}  // namespace airsense
