#include "fleetline/service/auth.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <mutex>

#include "fleetline/error.hpp"

namespace fleetline::service {

namespace {

std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xF]);
  }
  return out;
}

std::vector<unsigned char> from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  if (hex.size() % 2) fail(ErrorCode::CorruptLog, "odd-length hex string");
  std::vector<unsigned char> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(ErrorCode::CorruptLog, "invalid hex digit");
    out[i] = static_cast<unsigned char>(hi << 4 | lo);
  }
  return out;
}

std::vector<unsigned char> derive(std::string_view password, const std::vector<unsigned char>& salt, int iterations) {
  std::vector<unsigned char> key(32);
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(),
                        static_cast<int>(salt.size()), iterations, EVP_sha256(), static_cast<int>(key.size()),
                        key.data()) != 1) {
    fail(ErrorCode::IoError, "password key derivation failed");
  }
  return key;
}

}  // namespace

std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) fail(ErrorCode::IoError, "RAND_bytes failed");
  return to_hex(buf.data(), buf.size());
}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Admin: return "admin";
    case Role::Provider: return "provider";
    case Role::Customer: return "customer";
    case Role::Driver: return "driver";
  }
  return "";
}

std::optional<Role> role_from_string(std::string_view s) noexcept {
  for (Role r : {Role::Admin, Role::Provider, Role::Customer, Role::Driver}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

nlohmann::json PasswordHash::to_json() const {
  return {{"salt", salt_hex}, {"hash", hash_hex}, {"iterations", iterations}};
}

PasswordHash PasswordHash::from_json(const nlohmann::json& j) {
  return {j.at("salt").get<std::string>(), j.at("hash").get<std::string>(), j.at("iterations").get<int>()};
}

PasswordHash hash_password(std::string_view password) {
  std::vector<unsigned char> salt(16);
  if (RAND_bytes(salt.data(), static_cast<int>(salt.size())) != 1) fail(ErrorCode::IoError, "RAND_bytes failed");
  const auto key = derive(password, salt, kPasswordIterations);
  return {to_hex(salt.data(), salt.size()), to_hex(key.data(), key.size()), kPasswordIterations};
}

bool verify_password(std::string_view password, const PasswordHash& stored) {
  const auto expected = from_hex(stored.hash_hex);
  const auto key = derive(password, from_hex(stored.salt_hex), stored.iterations);
  return key.size() == expected.size() && CRYPTO_memcmp(key.data(), expected.data(), key.size()) == 0;
}

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::Login: return "Login";
    case Action::Logout: return "Logout";
    case Action::RegisterProvider: return "RegisterProvider";
    case Action::RegisterCustomer: return "RegisterCustomer";
    case Action::ApproveProvider: return "ApproveProvider";
    case Action::ListProviders: return "ListProviders";
    case Action::ListCustomers: return "ListCustomers";
    case Action::ListAllVehicles: return "ListAllVehicles";
    case Action::SpamReport: return "SpamReport";
    case Action::ProviderRankings: return "ProviderRankings";
    case Action::SentimentReport: return "SentimentReport";
    case Action::SeedScenario: return "SeedScenario";
    case Action::ProviderProfile: return "ProviderProfile";
    case Action::AddVehicle: return "AddVehicle";
    case Action::SetVehicleStatus: return "SetVehicleStatus";
    case Action::AddDriver: return "AddDriver";
    case Action::ListProviderRequests: return "ListProviderRequests";
    case Action::NotifyDriver: return "NotifyDriver";
    case Action::VehicleSchedule: return "VehicleSchedule";
    case Action::ProviderHistory: return "ProviderHistory";
    case Action::SearchVehicles: return "SearchVehicles";
    case Action::CreateRequest: return "CreateRequest";
    case Action::Recommendations: return "Recommendations";
    case Action::TripPosition: return "TripPosition";
    case Action::PayTrip: return "PayTrip";
    case Action::SubmitReview: return "SubmitReview";
    case Action::TripQr: return "TripQr";
    case Action::CancelTrip: return "CancelTrip";
    case Action::DriverRequests: return "DriverRequests";
    case Action::AcceptRequest: return "AcceptRequest";
    case Action::DriverSchedule: return "DriverSchedule";
    case Action::DriverNotifications: return "DriverNotifications";
    case Action::StartTrip: return "StartTrip";
    case Action::CompleteTrip: return "CompleteTrip";
    case Action::GetTrip: return "GetTrip";
    case Action::PostTelemetry: return "PostTelemetry";
    case Action::VehicleTrack: return "VehicleTrack";
  }
  return "";
}

bool is_public(Action a) noexcept {
  return a == Action::Login || a == Action::RegisterProvider || a == Action::RegisterCustomer;
}

bool authorize(Role role, Approval approval, Action action) noexcept {
  using enum Action;
  if (is_public(action) || action == Logout) return true;
  switch (role) {
    case Role::Admin:
      switch (action) {
        case ApproveProvider: case ListProviders: case ListCustomers: case ListAllVehicles: case SpamReport:
        case ProviderRankings: case SentimentReport: case SeedScenario: case GetTrip: case PostTelemetry:
        case VehicleTrack:
          return true;
        default:
          return false;
      }
    case Role::Provider:
      if (approval != Approval::Approved) return action == ProviderProfile;
      switch (action) {
        case ProviderProfile: case AddVehicle: case SetVehicleStatus: case AddDriver: case ListProviderRequests:
        case NotifyDriver: case VehicleSchedule: case ProviderHistory: case CancelTrip: case GetTrip:
        case PostTelemetry: case VehicleTrack:
          return true;
        default:
          return false;
      }
    case Role::Customer:
      switch (action) {
        case SearchVehicles: case CreateRequest: case Recommendations: case TripPosition: case PayTrip:
        case SubmitReview: case TripQr: case CancelTrip: case GetTrip:
          return true;
        default:
          return false;
      }
    case Role::Driver:
      switch (action) {
        case DriverRequests: case AcceptRequest: case DriverSchedule: case DriverNotifications: case StartTrip:
        case CompleteTrip: case GetTrip: case PostTelemetry: case VehicleTrack:
          return true;
        default:
          return false;
      }
  }
  return false;
}

std::string SessionStore::issue(const std::string& account_id, Role role, std::int64_t now_ms) {
  std::string token = random_hex(32);
  std::unique_lock lock(mutex_);
  sessions_[token] = Session{account_id, role, now_ms + kSessionTtlMs};
  return token;
}

Session SessionStore::resolve(const std::string& token, std::int64_t now_ms) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(token);
  if (it == sessions_.end()) fail(ErrorCode::Unauthenticated, "unknown or revoked token");
  if (now_ms >= it->second.expires_at) fail(ErrorCode::Unauthenticated, "token expired");
  return it->second;
}

void SessionStore::revoke(const std::string& token) {
  std::unique_lock lock(mutex_);
  sessions_.erase(token);
}

}  // namespace fleetline::service
