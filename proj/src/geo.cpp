#include "fleetline/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fleetline/error.hpp"

namespace fleetline::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 ||
      lon < -180.0 || lon > 180.0) {
    fail(ErrorCode::InvalidLocation,
         "coordinate out of range: (" + std::to_string(lat) + ", " + std::to_string(lon) + ")");
  }
}

Polyline::Polyline(std::vector<GeoPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) fail(ErrorCode::InvalidParam, "polyline needs at least two points");
  cumulative_km_.reserve(points_.size());
  cumulative_km_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i] == points_[i - 1]) {
      fail(ErrorCode::InvalidParam, "polyline has repeated consecutive point at index " +
                                        std::to_string(i));
    }
    cumulative_km_.push_back(cumulative_km_.back() + haversine_km(points_[i - 1], points_[i]));
  }
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double phi1 = a.lat() * kDegToRad;
  const double phi2 = b.lat() * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.lon() - a.lon()) * kDegToRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double route_length_km(std::span<const TrackPoint> track) {
  double total = 0.0;
  for (std::size_t i = 1; i < track.size(); ++i) {
    if (track[i].timestamp_ms <= track[i - 1].timestamp_ms) {
      fail(ErrorCode::NonMonotonicTrack,
           "timestamp does not increase at index " + std::to_string(i));
    }
    total += haversine_km(track[i - 1].point, track[i].point);
  }
  return total;
}

GeoPoint interpolate_along(const Polyline& path, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    fail(ErrorCode::OutOfRange, "fraction must lie in [0, 1]");
  }
  if (fraction == 0.0) return path.front();
  if (fraction == 1.0) return path.back();

  const auto& cum = path.cumulative_km_;
  const double target = fraction * cum.back();
  // First vertex whose cumulative distance reaches the target ends the segment.
  auto it = std::lower_bound(cum.begin() + 1, cum.end(), target);
  if (it == cum.end()) return path.back();
  const std::size_t hi = static_cast<std::size_t>(it - cum.begin());
  const std::size_t lo = hi - 1;
  const double span = cum[hi] - cum[lo];
  const double t = span > 0.0 ? (target - cum[lo]) / span : 0.0;
  const GeoPoint& a = path.points_[lo];
  const GeoPoint& b = path.points_[hi];
  return GeoPoint(a.lat() + t * (b.lat() - a.lat()), a.lon() + t * (b.lon() - a.lon()));
}

}  // namespace fleetline::geo
