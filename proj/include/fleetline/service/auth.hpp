#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fleetline::service {

enum class Role { Admin, Provider, Customer, Driver };
enum class Approval { Pending, Approved };

std::string_view to_string(Role r) noexcept;
std::optional<Role> role_from_string(std::string_view s) noexcept;

struct PasswordHash {
  std::string salt_hex;
  std::string hash_hex;
  int iterations = 0;

  nlohmann::json to_json() const;
  static PasswordHash from_json(const nlohmann::json& j);
};

inline constexpr int kPasswordIterations = 10'000;

// PBKDF2-HMAC-SHA256 with a fresh 16-byte salt.
PasswordHash hash_password(std::string_view password);
// Constant-time comparison of the derived key.
bool verify_password(std::string_view password, const PasswordHash& stored);

// Everything an endpoint can ask for. Public actions need no token.
enum class Action {
  Login,
  Logout,
  RegisterProvider,
  RegisterCustomer,
  // admin
  ApproveProvider,
  ListProviders,
  ListCustomers,
  ListAllVehicles,
  SpamReport,
  ProviderRankings,
  SentimentReport,
  SeedScenario,
  // provider
  ProviderProfile,
  AddVehicle,
  SetVehicleStatus,
  AddDriver,
  ListProviderRequests,
  NotifyDriver,
  VehicleSchedule,
  ProviderHistory,
  // customer
  SearchVehicles,
  CreateRequest,
  Recommendations,
  TripPosition,
  PayTrip,
  SubmitReview,
  TripQr,
  CancelTrip,
  // driver
  DriverRequests,
  AcceptRequest,
  DriverSchedule,
  DriverNotifications,
  StartTrip,
  CompleteTrip,
  // shared
  GetTrip,
  PostTelemetry,
  VehicleTrack,
};

inline constexpr Action kAllActions[] = {
    Action::Login,          Action::Logout,           Action::RegisterProvider,  Action::RegisterCustomer,
    Action::ApproveProvider, Action::ListProviders,   Action::ListCustomers,     Action::ListAllVehicles,
    Action::SpamReport,     Action::ProviderRankings, Action::SentimentReport,   Action::SeedScenario,
    Action::ProviderProfile, Action::AddVehicle,      Action::SetVehicleStatus,  Action::AddDriver,
    Action::ListProviderRequests, Action::NotifyDriver, Action::VehicleSchedule, Action::ProviderHistory,
    Action::SearchVehicles, Action::CreateRequest,    Action::Recommendations,   Action::TripPosition,
    Action::PayTrip,        Action::SubmitReview,     Action::TripQr,            Action::CancelTrip,
    Action::DriverRequests, Action::AcceptRequest,    Action::DriverSchedule,    Action::DriverNotifications,
    Action::StartTrip,      Action::CompleteTrip,     Action::GetTrip,           Action::PostTelemetry,
    Action::VehicleTrack,
};

std::string_view to_string(Action a) noexcept;
bool is_public(Action a) noexcept;

// Role-level permission. Ownership of the addressed entity is checked
// separately by the service. A pending provider may only read its profile.
bool authorize(Role role, Approval approval, Action action) noexcept;

struct Session {
  std::string account_id;
  Role role;
  std::int64_t expires_at = 0;
};

inline constexpr std::int64_t kSessionTtlMs = 24LL * 3600 * 1000;

// Opaque bearer tokens: 32 random bytes, hex encoded. In memory only.
class SessionStore {
 public:
  std::string issue(const std::string& account_id, Role role, std::int64_t now_ms);
  // Throws Error{Unauthenticated} for unknown, revoked or expired tokens.
  Session resolve(const std::string& token, std::int64_t now_ms) const;
  void revoke(const std::string& token);

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, Session, std::less<>> sessions_;
};

std::string random_hex(std::size_t bytes);

}  // namespace fleetline::service
