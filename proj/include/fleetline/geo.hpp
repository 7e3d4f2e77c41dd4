#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fleetline::geo {

// Mean Earth radius; all distances assume a spherical Earth.
inline constexpr double kEarthRadiusKm = 6371.0088;

// WGS-84 latitude/longitude in degrees. Range is checked once, at
// construction; a GeoPoint that exists is always valid.
class GeoPoint {
 public:
  // Throws Error{InvalidLocation} for non-finite or out-of-range input.
  GeoPoint(double lat, double lon);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

struct TrackPoint {
  GeoPoint point;
  std::int64_t timestamp_ms;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

// Ordered route geometry: at least two points, no consecutive repeats.
class Polyline {
 public:
  explicit Polyline(std::vector<GeoPoint> points);

  std::span<const GeoPoint> points() const noexcept { return points_; }
  const GeoPoint& front() const noexcept { return points_.front(); }
  const GeoPoint& back() const noexcept { return points_.back(); }

  // Sum of great-circle segment lengths.
  double length_km() const noexcept { return cumulative_km_.back(); }

  friend bool operator==(const Polyline& a, const Polyline& b) { return a.points_ == b.points_; }

 private:
  friend GeoPoint interpolate_along(const Polyline& path, double fraction);

  std::vector<GeoPoint> points_;
  std::vector<double> cumulative_km_;
};

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

// Throws Error{NonMonotonicTrack} unless timestamps strictly increase.
double route_length_km(std::span<const TrackPoint> track);

// Linear in lat/lon within each segment; segments are weighted by their
// great-circle length. Throws Error{OutOfRange} outside [0, 1].
GeoPoint interpolate_along(const Polyline& path, double fraction);

}  // namespace fleetline::geo
