#include <algorithm>
#include <atomic>
#include <numbers>
#include <random>
#include <thread>

#include "doctest.h"
#include "fleetline/error.hpp"
#include "fleetline/tracking.hpp"
#include "test_support.hpp"

using namespace fleetline;
using namespace fleetline::tracking;

namespace {

double deg_per_km() { return 180.0 / (std::numbers::pi * geo::kEarthRadiusKm); }

geo::Polyline meridian_km(double km, double lat0 = 10.0, double lon = 20.0) {
  return geo::Polyline({geo::GeoPoint(lat0, lon), geo::GeoPoint(lat0 + km * deg_per_km(), lon)});
}

TelemetryMsg msg(std::string v, std::uint64_t seq, std::int64_t ts, double lat = 1.0) {
  return TelemetryMsg{std::move(v), geo::GeoPoint(lat, 2.0), ts, seq};
}

}  // namespace

TEST_CASE("ingest acceptance rule") {
  TrackStore store;
  CHECK_FALSE(store.current_position("V1"));
  CHECK(store.track("V1").empty());

  CHECK(store.ingest(msg("V1", 1, 1000)) == IngestResult::Accepted);
  CHECK(store.track("V1").size() == 1);
  CHECK(store.current_position("V1")->timestamp_ms == 1000);

  CHECK(store.ingest(msg("V1", 1, 1000)) == IngestResult::RejectedStale);
  CHECK(store.track("V1").size() == 1);
  CHECK(store.ingest(msg("V1", 2, 1000)) == IngestResult::RejectedStale);  // same ts
  CHECK(store.ingest(msg("V1", 1, 2000)) == IngestResult::RejectedStale);  // same seq
  CHECK(store.ingest(msg("V1", 2, 2000)) == IngestResult::Accepted);
  CHECK(*store.last_seq("V1") == 2);
}

TEST_CASE("out-of-order burst keeps the newest accepted fix") {
  TrackStore store;
  CHECK(store.ingest(msg("V1", 5, 5000, 5.0)) == IngestResult::Accepted);
  CHECK(store.ingest(msg("V1", 3, 3000, 3.0)) == IngestResult::RejectedStale);
  CHECK(store.ingest(msg("V1", 7, 7000, 7.0)) == IngestResult::Accepted);
  CHECK(store.current_position("V1")->point.lat() == 7.0);
  CHECK(store.track("V1").size() == 2);
}

TEST_CASE("eviction keeps the newest points") {
  TrackStore store(3);
  for (std::uint64_t i = 1; i <= 5; ++i) store.ingest(msg("V", i, static_cast<std::int64_t>(i) * 10));
  const auto t = store.track("V");
  REQUIRE(t.size() == 3);
  CHECK(t.front().timestamp_ms == 30);
  CHECK(t.back().timestamp_ms == 50);
  // The acceptance rule still remembers the newest fix after eviction.
  CHECK(store.ingest(msg("V", 2, 60)) == IngestResult::RejectedStale);
  CHECK_THROWS_CODE(TrackStore(0), ErrorCode::InvalidParam);
}

TEST_CASE("100 in-order fixes along a meridian") {
  TrackStore store;
  const geo::GeoPoint start(40.0, -74.0);
  const geo::GeoPoint end(40.9, -74.0);
  for (int i = 0; i < 100; ++i) {
    const double lat = start.lat() + (end.lat() - start.lat()) * i / 99.0;
    store.ingest(TelemetryMsg{"V", geo::GeoPoint(lat, -74.0), i * 1000, static_cast<std::uint64_t>(i + 1)});
  }
  const auto t = store.track("V");
  const double along = geo::route_length_km(t);
  const double direct = geo::haversine_km(start, end);
  CHECK(std::abs(along - direct) / direct < 1e-4);
}

TEST_CASE("wire format round trip and validation") {
  const TelemetryMsg m{"V0001", geo::GeoPoint(40.5, -74.25), 1'700'000'000'000, 7};
  const auto line = to_json_line(m);
  CHECK(line == R"({"lat":40.5,"lon":-74.25,"seq":7,"ts":1700000000000,"vehicleId":"V0001"})");
  CHECK(from_json_line(line) == m);
  CHECK(from_json_line(R"({"vehicleId":"V","lat":1,"lon":2,"ts":3,"seq":4})").point.lat() == 1.0);

  CHECK_THROWS_CODE(from_json_line("not json"), ErrorCode::ValidationError);
  CHECK_THROWS_CODE(from_json_line("[1,2]"), ErrorCode::ValidationError);
  CHECK_THROWS_CODE(from_json_line(R"({"lat":1,"lon":2,"ts":3,"seq":4})"), ErrorCode::ValidationError);
  CHECK_THROWS_CODE(from_json_line(R"({"vehicleId":"V","lat":"1","lon":2,"ts":3,"seq":4})"),
                    ErrorCode::ValidationError);
  CHECK_THROWS_CODE(from_json_line(R"({"vehicleId":"V","lat":1,"lon":2,"ts":3.5,"seq":4})"),
                    ErrorCode::ValidationError);
  CHECK_THROWS_CODE(from_json_line(R"({"vehicleId":"V","lat":1,"lon":2,"ts":3,"seq":-4})"),
                    ErrorCode::ValidationError);
  CHECK_THROWS_CODE(from_json_line(R"({"vehicleId":"V","lat":91,"lon":2,"ts":3,"seq":4})"),
                    ErrorCode::InvalidLocation);
}

TEST_CASE("simulate_transmitter") {
  SUBCASE("10 km at 60 km/h every minute gives 11 fixes") {
    const auto path = meridian_km(10.0);
    const auto msgs = simulate_transmitter("V", path, 60.0, 60'000, 1000);
    REQUIRE(msgs.size() == 11);
    CHECK(msgs.front().point == path.front());
    CHECK(msgs.back().point == path.back());
    for (std::size_t i = 0; i < msgs.size(); ++i) {
      CHECK(msgs[i].seq == i + 1);
      CHECK(msgs[i].timestamp_ms == 1000 + static_cast<std::int64_t>(i) * 60'000);
    }
  }
  SUBCASE("a partial last interval still ends on the path end") {
    const auto path = meridian_km(10.5);
    const auto msgs = simulate_transmitter("V", path, 60.0, 60'000, 0);
    CHECK(msgs.size() == 12);
    CHECK(msgs.back().point == path.back());
  }
  SUBCASE("invalid parameters") {
    const auto path = meridian_km(1.0);
    CHECK_THROWS_CODE(simulate_transmitter("V", path, 0.0, 1000, 0), ErrorCode::InvalidParam);
    CHECK_THROWS_CODE(simulate_transmitter("V", path, -5.0, 1000, 0), ErrorCode::InvalidParam);
    CHECK_THROWS_CODE(simulate_transmitter("V", path, 30.0, 0, 0), ErrorCode::InvalidParam);
  }
  SUBCASE("count bound and ingested length over gently turning paths") {
    // Fixes cut corners at vertices, so the traced length only tracks the
    // path when the sampling step is short relative to the turns.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> turn(-0.35, 0.35);
    std::uniform_real_distribution<double> leg_km(5.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<geo::GeoPoint> pts{geo::GeoPoint(40.0, -74.0)};
      double heading = turn(rng) * 9.0;
      for (int i = 0; i < 6; ++i) {
        heading += turn(rng);
        const double km = leg_km(rng);
        const double dlat = km * std::cos(heading) * deg_per_km();
        const double dlon = km * std::sin(heading) * deg_per_km() / std::cos(pts.back().lat() * std::numbers::pi / 180.0);
        pts.emplace_back(pts.back().lat() + dlat, pts.back().lon() + dlon);
      }
      const geo::Polyline path(pts);
      const double speed = 20.0 + static_cast<double>(rng() % 40);
      const std::int64_t interval = 1000 * static_cast<std::int64_t>(1 + rng() % 10);
      const auto msgs = simulate_transmitter("V", path, speed, interval, 0);
      const double ticks = path.length_km() / (speed * static_cast<double>(interval) / 3.6e6);
      CHECK(msgs.size() <= static_cast<std::size_t>(std::floor(ticks)) + 2);
      CHECK(msgs.size() >= static_cast<std::size_t>(std::floor(ticks)) + 1);

      TrackStore store;
      for (const auto& m : msgs) CHECK(store.ingest(m) == IngestResult::Accepted);
      const double traced = geo::route_length_km(store.track("V"));
      CHECK(std::abs(traced - path.length_km()) / path.length_km() < 1e-3);
    }
  }
}

TEST_CASE("replaying any prefix is idempotent and tracks stay monotone under reordering") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TelemetryMsg> log;
    for (std::uint64_t i = 1; i <= 40; ++i) {
      log.push_back(msg("V" + std::to_string(rng() % 3), i, static_cast<std::int64_t>(i) * 100));
    }
    // Adversarial: duplicates and a shuffled window.
    auto noisy = log;
    for (int i = 0; i < 20; ++i) noisy.push_back(log[rng() % log.size()]);
    std::shuffle(noisy.begin() + 10, noisy.end(), rng);

    TrackStore once;
    for (const auto& m : noisy) once.ingest(m);
    const std::size_t prefix = rng() % noisy.size();
    TrackStore twice;
    for (std::size_t i = 0; i < prefix; ++i) twice.ingest(noisy[i]);
    for (const auto& m : noisy) twice.ingest(m);

    for (const auto& v : once.vehicles()) {
      const auto a = once.track(v);
      CHECK(a == twice.track(v));
      for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].timestamp_ms < a[i].timestamp_ms);
    }
  }
}

TEST_CASE("concurrent ingest and query") {
  TrackStore store;
  constexpr int kVehicles = 4;
  constexpr std::uint64_t kFixes = 5000;
  std::atomic<bool> done{false};
  std::atomic<int> stale_reads{0};

  std::vector<std::thread> writers;
  for (int v = 0; v < kVehicles; ++v) {
    writers.emplace_back([&, v] {
      for (std::uint64_t i = 1; i <= kFixes; ++i) {
        store.ingest(msg("V" + std::to_string(v), i, static_cast<std::int64_t>(i)));
        // Liveness: a query right after our own ingest must see it.
        const auto now = store.current_position("V" + std::to_string(v));
        if (!now || now->timestamp_ms != static_cast<std::int64_t>(i)) ++stale_reads;
      }
    });
  }
  std::thread reader([&] {
    while (!done) {
      for (int v = 0; v < kVehicles; ++v) {
        const auto t = store.track("V" + std::to_string(v));
        for (std::size_t i = 1; i < t.size(); ++i) {
          if (t[i - 1].timestamp_ms + 1 != t[i].timestamp_ms) ++stale_reads;
        }
      }
    }
  });
  for (auto& w : writers) w.join();
  done = true;
  reader.join();

  CHECK(stale_reads == 0);
  for (int v = 0; v < kVehicles; ++v) CHECK(store.track("V" + std::to_string(v)).size() == kFixes);
}
