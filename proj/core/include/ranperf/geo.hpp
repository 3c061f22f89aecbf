#pragma once

#include <cmath>

#include "ranperf/errors.hpp"

namespace ranperf {

/// WGS-ish point on a 6371 km sphere. Ellipsoid error is irrelevant at
/// cell-partitioning granularity.
struct GeoLocation {
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]

  bool valid() const {
    return std::isfinite(latitude) && std::isfinite(longitude) &&
           latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 &&
           longitude <= 180.0;
  }
};

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance in kilometers. Symmetric, non-negative, zero iff
/// coordinates are identical.
inline double haversine_km(const GeoLocation& a, const GeoLocation& b) {
  if (!a.valid() || !b.valid()) throw DataError("haversine_km: invalid location");
  constexpr double kDeg = 3.141592653589793238462643383279502884 / 180.0;
  const double lat1 = a.latitude * kDeg;
  const double lat2 = b.latitude * kDeg;
  const double dlat = (b.latitude - a.latitude) * kDeg;
  const double dlon = (b.longitude - a.longitude) * kDeg;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace ranperf
