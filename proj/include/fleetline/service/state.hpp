#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fleetline/dispatch.hpp"
#include "fleetline/recommender.hpp"
#include "fleetline/reviews.hpp"
#include "fleetline/service/auth.hpp"
#include "fleetline/service/event_log.hpp"
#include "fleetline/tracking.hpp"
#include "json.hpp"

namespace fleetline::service {

// Event kinds. Scenario files reuse the registration, fleet, rating and
// review kinds with plaintext passwords.
namespace kind {
inline constexpr const char* kAdminBootstrapped = "admin.bootstrapped";
inline constexpr const char* kProviderRegistered = "provider.registered";
inline constexpr const char* kProviderApproved = "provider.approved";
inline constexpr const char* kCustomerRegistered = "customer.registered";
inline constexpr const char* kDriverAdded = "driver.added";
inline constexpr const char* kVehicleAdded = "vehicle.added";
inline constexpr const char* kVehicleStatusSet = "vehicle.status_set";
inline constexpr const char* kRequestCreated = "request.created";
inline constexpr const char* kRequestAccepted = "request.accepted";
inline constexpr const char* kTripStarted = "trip.started";
inline constexpr const char* kTelemetryAccepted = "telemetry.accepted";
inline constexpr const char* kTripCompleted = "trip.completed";
inline constexpr const char* kTripCancelled = "trip.cancelled";
inline constexpr const char* kPaymentRecorded = "payment.recorded";
inline constexpr const char* kReviewSubmitted = "review.submitted";
inline constexpr const char* kNotificationSent = "notification.sent";
inline constexpr const char* kRatingSet = "rating.set";
inline constexpr const char* kScenarioSeeded = "scenario.seeded";
}  // namespace kind

struct Account {
  std::string account_id;
  std::string login;
  std::string name;
  Role role = Role::Customer;
  PasswordHash password;
  Approval approval = Approval::Approved;  // meaningful for providers only
};

struct RequestRecord {
  dispatch::TripRequest request;
  std::optional<std::string> trip_id;
  std::optional<dispatch::RejectReason> rejection;
  std::int64_t created_at = 0;
};

struct TripRecord {
  dispatch::Trip trip;
  bool driver_accepted = false;
  // Telemetry strictly newer than this belongs to the trip (absent: all).
  std::optional<std::int64_t> track_after_ts;
  std::optional<std::string> payment_id;
  std::optional<std::string> review_id;
  std::int64_t created_at = 0;
};

struct PaymentRecord {
  std::string payment_id;
  std::string trip_id;
  std::string customer_id;
  std::string provider_id;
  dispatch::Money amount;
  std::int64_t recorded_at = 0;
};

struct Notification {
  std::string notification_id;
  std::string provider_id;
  std::string driver_id;
  std::string trip_id;
  std::string message;
  std::int64_t sent_at = 0;
};

// The whole domain state as a pure fold over the event log. Sessions are
// not part of it.
struct State {
  std::map<std::string, Account> accounts;
  std::map<std::string, std::string> login_index;  // login -> account id
  std::map<std::string, dispatch::Vehicle> vehicles;
  std::map<std::string, dispatch::Driver> drivers;
  std::map<std::string, RequestRecord> requests;
  std::map<std::string, TripRecord> trips;
  std::map<std::string, PaymentRecord> payments;
  std::map<std::string, reviews::Review> reviews;
  std::map<std::string, std::vector<Notification>> inbox;  // by driver id
  recommender::RatingMatrix ratings;
  tracking::TrackStore tracks;
  std::set<std::string> scenarios;
  std::map<std::string, std::uint64_t> id_counters;  // prefix -> highest number used
  std::uint64_t last_seq = 0;

  // Throws Error{CorruptLog} when the record does not apply cleanly.
  void apply(const EventRecord& record);

  // Sorted-key serialization of everything above; equal states give equal
  // bytes.
  nlohmann::json canonical() const;

  std::string next_id(const std::string& prefix) const;

  const Account* find_login(const std::string& login) const;
  std::vector<geo::TrackPoint> trip_track(const TripRecord& t) const;
};

// Payload helpers shared by the service and the fold.
nlohmann::json point_json(const geo::GeoPoint& p);
geo::GeoPoint point_from_json(const nlohmann::json& j);

}  // namespace fleetline::service
