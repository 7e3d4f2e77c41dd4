#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fleetline/geo.hpp"

namespace fleetline::tracking {

struct TelemetryMsg {
  std::string vehicle_id;
  geo::GeoPoint point;
  std::int64_t timestamp_ms = 0;
  std::uint64_t seq = 0;

  friend bool operator==(const TelemetryMsg&, const TelemetryMsg&) = default;
};

// Wire form, one JSON object per line:
//   {"vehicleId":"V0001","lat":40.1,"lon":-74.2,"ts":1700000000000,"seq":7}
std::string to_json_line(const TelemetryMsg& msg);
// Throws Error{ValidationError} on malformed records and
// Error{InvalidLocation} on out-of-range coordinates.
TelemetryMsg from_json_line(std::string_view line);

enum class IngestResult { Accepted, RejectedStale };

inline constexpr std::size_t kDefaultTrackCap = 100'000;

// Per-vehicle append-only tracks. Vehicles ingest concurrently; each
// vehicle's writes are serialized and readers see point-in-time copies.
class TrackStore {
 public:
  explicit TrackStore(std::size_t cap = kDefaultTrackCap);

  // Appends iff seq and timestamp both exceed the last accepted fix.
  IngestResult ingest(const TelemetryMsg& msg);

  std::optional<geo::TrackPoint> current_position(const std::string& vehicle_id) const;

  // Copy of the retained track, oldest first; empty if never seen.
  std::vector<geo::TrackPoint> track(const std::string& vehicle_id) const;
  std::optional<std::uint64_t> last_seq(const std::string& vehicle_id) const;

  std::vector<std::string> vehicles() const;
  std::size_t cap() const noexcept { return cap_; }

 private:
  struct VehicleTrack;

  std::shared_ptr<VehicleTrack> find(const std::string& vehicle_id) const;

  std::size_t cap_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<VehicleTrack>> tracks_;
};

// Fixes along the path at fractions min(1, i * step / length) where step is
// the distance covered per interval; the last fix sits exactly on the path
// end. Sequence numbers start at first_seq, timestamps at start_ms.
// Throws Error{InvalidParam} for non-positive speed or interval.
std::vector<TelemetryMsg> simulate_transmitter(const std::string& vehicle_id, const geo::Polyline& path,
                                               double speed_kmh, std::int64_t interval_ms,
                                               std::int64_t start_ms, std::uint64_t first_seq = 1);

}  // namespace fleetline::tracking
