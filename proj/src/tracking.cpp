#include "fleetline/tracking.hpp"

#include <deque>
#include <mutex>

#include "fleetline/error.hpp"
#include "json.hpp"

namespace fleetline::tracking {

using nlohmann::json;

std::string to_json_line(const TelemetryMsg& msg) {
  json j{{"vehicleId", msg.vehicle_id},
         {"lat", msg.point.lat()},
         {"lon", msg.point.lon()},
         {"ts", msg.timestamp_ms},
         {"seq", msg.seq}};
  return j.dump();
}

TelemetryMsg from_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorCode::ValidationError, std::string("telemetry record is not JSON: ") + e.what());
  }
  auto require = [&](const char* key, auto check) -> const json& {
    if (!j.is_object() || !j.contains(key) || !check(j.at(key))) {
      fail(ErrorCode::ValidationError, std::string("telemetry field '") + key + "' missing or invalid");
    }
    return j.at(key);
  };
  const auto is_string = [](const json& v) { return v.is_string(); };
  const auto is_number = [](const json& v) { return v.is_number(); };
  const auto is_int = [](const json& v) { return v.is_number_integer(); };
  const auto is_unsigned = [](const json& v) { return v.is_number_unsigned(); };

  return TelemetryMsg{
      require("vehicleId", is_string).get<std::string>(),
      geo::GeoPoint(require("lat", is_number).get<double>(), require("lon", is_number).get<double>()),
      require("ts", is_int).get<std::int64_t>(),
      require("seq", is_unsigned).get<std::uint64_t>(),
  };
}

struct TrackStore::VehicleTrack {
  mutable std::shared_mutex mutex;
  std::deque<geo::TrackPoint> points;
  std::uint64_t last_seq = 0;
};

TrackStore::TrackStore(std::size_t cap) : cap_(cap) {
  if (cap == 0) fail(ErrorCode::InvalidParam, "track cap must be positive");
}

std::shared_ptr<TrackStore::VehicleTrack> TrackStore::find(const std::string& vehicle_id) const {
  std::shared_lock lock(map_mutex_);
  auto it = tracks_.find(vehicle_id);
  return it == tracks_.end() ? nullptr : it->second;
}

IngestResult TrackStore::ingest(const TelemetryMsg& msg) {
  if (msg.timestamp_ms < 0) return IngestResult::RejectedStale;
  auto track = find(msg.vehicle_id);
  if (!track) {
    std::unique_lock lock(map_mutex_);
    auto& slot = tracks_[msg.vehicle_id];
    if (!slot) slot = std::make_shared<VehicleTrack>();
    track = slot;
  }

  std::unique_lock lock(track->mutex);
  if (!track->points.empty() &&
      (msg.seq <= track->last_seq || msg.timestamp_ms <= track->points.back().timestamp_ms)) {
    return IngestResult::RejectedStale;
  }
  track->points.push_back({msg.point, msg.timestamp_ms});
  track->last_seq = msg.seq;
  if (track->points.size() > cap_) track->points.pop_front();
  return IngestResult::Accepted;
}

std::optional<geo::TrackPoint> TrackStore::current_position(const std::string& vehicle_id) const {
  auto track = find(vehicle_id);
  if (!track) return std::nullopt;
  std::shared_lock lock(track->mutex);
  if (track->points.empty()) return std::nullopt;
  return track->points.back();
}

std::vector<geo::TrackPoint> TrackStore::track(const std::string& vehicle_id) const {
  auto track = find(vehicle_id);
  if (!track) return {};
  std::shared_lock lock(track->mutex);
  return {track->points.begin(), track->points.end()};
}

std::optional<std::uint64_t> TrackStore::last_seq(const std::string& vehicle_id) const {
  auto track = find(vehicle_id);
  if (!track) return std::nullopt;
  std::shared_lock lock(track->mutex);
  if (track->points.empty()) return std::nullopt;
  return track->last_seq;
}

std::vector<std::string> TrackStore::vehicles() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> ids;
  ids.reserve(tracks_.size());
  for (const auto& [id, track] : tracks_) ids.push_back(id);
  return ids;
}

std::vector<TelemetryMsg> simulate_transmitter(const std::string& vehicle_id, const geo::Polyline& path,
                                               double speed_kmh, std::int64_t interval_ms,
                                               std::int64_t start_ms, std::uint64_t first_seq) {
  if (!(speed_kmh > 0.0)) fail(ErrorCode::InvalidParam, "speed must be positive");
  if (interval_ms <= 0) fail(ErrorCode::InvalidParam, "interval must be positive");

  const double total_km = path.length_km();
  const double step_km = speed_kmh * static_cast<double>(interval_ms) / 3'600'000.0;
  // A tick within rounding noise of the end is the end.
  const double end_tolerance = total_km * 1e-9;

  std::vector<TelemetryMsg> out;
  for (std::int64_t i = 0;; ++i) {
    const double covered = static_cast<double>(i) * step_km;
    const bool last = covered >= total_km - end_tolerance;
    const double fraction = last ? 1.0 : covered / total_km;
    out.push_back(TelemetryMsg{vehicle_id, geo::interpolate_along(path, fraction), start_ms + i * interval_ms,
                               first_seq + static_cast<std::uint64_t>(i)});
    if (last) break;
  }
  return out;
}

}  // namespace fleetline::tracking
