#pragma once

#include <atomic>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "fleetline/service/service.hpp"
#include "fleetline/tracking.hpp"

namespace fleetline::testing {

inline constexpr const char* kAdminPassword = "admin-secret";
inline constexpr const char* kQrPassphrase = "ride-receipts";

// Deleted on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("fleetline-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

// Manually advanced clock shared by every service a test creates.
struct FakeClock {
  std::atomic<std::int64_t> now{1'700'000'000'000};
  service::Clock fn() {
    return [this] { return now.load(); };
  }
};

inline service::ServiceConfig config(FakeClock& clock, std::filesystem::path dir = {}) {
  service::ServiceConfig c;
  c.data_dir = std::move(dir);
  c.admin_password = kAdminPassword;
  c.qr_passphrase = kQrPassphrase;
  c.clock = clock.fn();
  return c;
}

inline double deg_per_km() { return 180.0 / (std::numbers::pi * geo::kEarthRadiusKm); }

inline geo::Polyline meridian_km(double km, double lat0, double lon) {
  return geo::Polyline({geo::GeoPoint(lat0, lon), geo::GeoPoint(lat0 + km * deg_per_km(), lon)});
}

// One approved provider with a vehicle at (lat0, lon) costing 4.00/km and a
// driver, plus a customer; all logged in.
struct World {
  service::Service& svc;
  std::string admin, provider, customer, driver;
  std::string provider_id, customer_id, driver_id, vehicle_id;
  double lat0 = 10.0, lon = 20.0;

  std::string login(const std::string& user, const std::string& pw) { return svc.login(user, pw)["token"]; }

  explicit World(service::Service& s, const std::string& suffix = "") : svc(s) {
    admin = login("admin", kAdminPassword);
    provider_id = svc.register_provider({{"login", "prov" + suffix}, {"name", "Prov"}, {"password", "secret1"}})["providerId"];
    svc.approve_provider(admin, provider_id);
    provider = login("prov" + suffix, "secret1");
    vehicle_id = svc.add_vehicle(provider, {{"vehicleType", "sedan"}, {"costPerKm", 4.0}, {"home", {{"lat", lat0}, {"lon", lon}}}})["vehicleId"];
    driver_id = svc.add_driver(provider, {{"login", "drv" + suffix}, {"name", "Drv"}, {"password", "secret2"}})["driverId"];
    driver = login("drv" + suffix, "secret2");
    customer_id = svc.register_customer({{"login", "cust" + suffix}, {"name", "Cust"}, {"password", "secret3"}})["customerId"];
    customer = login("cust" + suffix, "secret3");
  }

  nlohmann::json request(double km) {
    const double lat1 = lat0 + km * deg_per_km();
    return svc.create_request(customer, {{"pickup", {{"lat", lat0}, {"lon", lon}}},
                                         {"dropoff", {{"lat", lat1}, {"lon", lon}}},
                                         {"vehicleType", "sedan"}});
  }

  // Accept, start, drive `km` north with telemetry, complete.
  nlohmann::json ride(FakeClock& clock, const std::string& request_id, const std::string& trip_id, double km) {
    svc.accept_request(driver, request_id);
    svc.start_trip(driver, trip_id);
    const std::int64_t t0 = clock.now + 1000;
    auto last_seq = svc.vehicle_track(driver, vehicle_id)["points"].size();
    for (const auto& m : tracking::simulate_transmitter(vehicle_id, meridian_km(km, lat0, lon), 60.0, 10'000, t0,
                                                        last_seq + 1)) {
      svc.post_telemetry(driver, tracking::to_json_line(m));
      clock.now = m.timestamp_ms;
    }
    return svc.complete_trip(driver, trip_id);
  }
};

}  // namespace fleetline::testing
