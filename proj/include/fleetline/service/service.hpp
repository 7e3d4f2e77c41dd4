#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "fleetline/error.hpp"
#include "fleetline/service/auth.hpp"
#include "fleetline/service/event_log.hpp"
#include "fleetline/service/scenario.hpp"
#include "fleetline/service/state.hpp"
#include "json.hpp"

namespace fleetline::service {

using Clock = std::function<std::int64_t()>;

// Wall clock in ms since the epoch.
std::int64_t system_now_ms();

struct ServiceConfig {
  // Empty: keep the event log in memory only.
  std::filesystem::path data_dir;
  std::string admin_login = "admin";
  // Required when the log is empty (used for the bootstrap admin).
  std::string admin_password;
  // Trip QR codes are unavailable without it.
  std::optional<std::string> qr_passphrase;
  Clock clock = system_now_ms;
};

using Query = std::map<std::string, std::string>;

struct QrImage {
  std::string pbm;
  int version = 0;
  std::string ec_level;
};

// Transport-independent application service. Every mutation is validated,
// appended to the event log and then folded into the in-memory state from
// the logged record; reads see a consistent state under a shared lock.
// All methods throw fleetline::Error; see http_status() for the mapping.
class Service {
 public:
  explicit Service(ServiceConfig config);

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Public
  nlohmann::json login(const std::string& login, const std::string& password);
  void logout(const std::string& token);
  nlohmann::json register_provider(const nlohmann::json& body);
  nlohmann::json register_customer(const nlohmann::json& body);

  // Admin
  nlohmann::json approve_provider(const std::string& token, const std::string& provider_id);
  nlohmann::json list_providers(const std::string& token) const;
  nlohmann::json list_customers(const std::string& token) const;
  nlohmann::json list_all_vehicles(const std::string& token) const;
  nlohmann::json spam_report(const std::string& token) const;
  nlohmann::json provider_rankings(const std::string& token) const;
  nlohmann::json sentiment_report(const std::string& token) const;
  nlohmann::json seed(const std::string& token, const Scenario& scenario);

  // Provider
  nlohmann::json provider_profile(const std::string& token) const;
  nlohmann::json add_vehicle(const std::string& token, const nlohmann::json& body);
  nlohmann::json set_vehicle_status(const std::string& token, const std::string& vehicle_id,
                                    const nlohmann::json& body);
  nlohmann::json add_driver(const std::string& token, const nlohmann::json& body);
  nlohmann::json provider_requests(const std::string& token) const;
  nlohmann::json notify_driver(const std::string& token, const nlohmann::json& body);
  nlohmann::json vehicle_schedule(const std::string& token, const std::string& vehicle_id) const;
  nlohmann::json provider_history(const std::string& token) const;

  // Customer
  nlohmann::json search_vehicles(const std::string& token, const Query& query) const;
  nlohmann::json create_request(const std::string& token, const nlohmann::json& body);
  nlohmann::json recommendations(const std::string& token, const Query& query) const;
  nlohmann::json trip_position(const std::string& token, const std::string& trip_id) const;
  nlohmann::json pay_trip(const std::string& token, const std::string& trip_id);
  nlohmann::json submit_review(const std::string& token, const nlohmann::json& body);
  QrImage trip_qr(const std::string& token, const std::string& trip_id) const;
  nlohmann::json cancel_trip(const std::string& token, const std::string& trip_id);

  // Driver
  nlohmann::json driver_requests(const std::string& token) const;
  nlohmann::json accept_request(const std::string& token, const std::string& request_id);
  nlohmann::json driver_schedule(const std::string& token) const;
  nlohmann::json driver_notifications(const std::string& token) const;
  nlohmann::json start_trip(const std::string& token, const std::string& trip_id);
  nlohmann::json complete_trip(const std::string& token, const std::string& trip_id);

  // Shared
  nlohmann::json get_trip(const std::string& token, const std::string& trip_id) const;
  nlohmann::json post_telemetry(const std::string& token, const std::string& wire_line);
  nlohmann::json vehicle_track(const std::string& token, const std::string& vehicle_id) const;

  // Seeding without a session, for the CLI working on a data dir.
  nlohmann::json seed_local(const Scenario& scenario);

  // Sorted-key dump of the folded state.
  std::string canonical_state() const;
  std::uint64_t last_seq() const;
  std::int64_t now() const { return config_.clock(); }

 private:
  struct Principal {
    std::string account_id;
    Role role;
  };

  Principal require(const std::string& token, Action action) const;
  EventRecord commit(const std::string& kind, nlohmann::json payload);
  nlohmann::json trip_view(const TripRecord& t) const;
  const TripRecord& trip_for(const Principal& who, const std::string& trip_id) const;
  nlohmann::json schedule_for(const std::string& owner, const std::function<bool(const TripRecord&)>& pick) const;

  ServiceConfig config_;
  SessionStore sessions_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<EventLog> log_;
  State state_;
};

// Error code -> HTTP status: 401 unauthenticated/auth failure, 403
// forbidden, 404 unknown entity, 409 state conflicts, 422 validation,
// 500 otherwise.
int http_status(ErrorCode code) noexcept;

}  // namespace fleetline::service
