#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "fleetline/error.hpp"
#include "fleetline/reviews.hpp"
#include "fleetline/service/scenario.hpp"
#include "fleetline/tracking.hpp"
#include "json.hpp"

// Operations behind the fleetline command-line verbs. Each can target a
// data dir directly or a running service by URL.
namespace fleetline::ops {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

// 1 for bad input (validation, ranges, formats, a used data dir), 2 otherwise.
int exit_code_for(ErrorCode code) noexcept;

// Admin credentials for talking to a service over HTTP.
struct Remote {
  std::string url;  // e.g. http://127.0.0.1:8080
  std::string login = "admin";
  std::string password;
};

// Minimal JSON-over-HTTP client that turns error bodies back into Error.
class ApiClient {
 public:
  explicit ApiClient(const std::string& url);
  void login(const std::string& login, const std::string& password);
  void set_token(std::string token) { token_ = std::move(token); }
  const std::string& token() const { return token_; }

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const std::string& body,
                      const std::string& content_type = "application/json") const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
    return post(path, body.dump());
  }
  // Raw body plus response headers, for non-JSON payloads.
  std::string get_raw(const std::string& path, std::map<std::string, std::string>* headers = nullptr) const;

 private:
  std::string base_;
  std::string token_;
};

nlohmann::json seed_data_dir(const std::filesystem::path& dir, const service::Scenario& scenario,
                             const std::string& admin_password);
nlohmann::json seed_remote(const Remote& remote, const std::string& scenario_text);

// Folds the event log read-only. A missing directory is an IoError; a
// directory without a log counts as an empty system.
reviews::SentimentCounts report_data_dir(const std::filesystem::path& dir);
reviews::SentimentCounts report_remote(const Remote& remote);
// "positive,N\nnegative,N\nneutral,N\n"
std::string sentiment_csv(const reviews::SentimentCounts& counts);

struct SimulateOptions {
  std::string vehicle_id;
  std::string path_name;  // empty: the scenario must contain exactly one path
  double speed_kmh = 60.0;
  std::int64_t interval_ms = 1000;
  std::int64_t start_ms = 0;
  std::uint64_t first_seq = 1;
};

std::vector<tracking::TelemetryMsg> simulate(const service::Scenario& scenario, const SimulateOptions& options);
// Posts every fix with the given credentials; returns {accepted, stale}.
nlohmann::json post_fixes(const Remote& remote, const std::vector<tracking::TelemetryMsg>& fixes);

inline constexpr const char* kDemoQrPassphrase = "fleetline-demo-receipts";
inline constexpr const char* kDemoAdminPassword = "demo-admin-password";
inline constexpr double kDemoPathKm = 12.5;
inline constexpr double kDemoCostPerKm = 4.0;

struct DemoOptions {
  // Must be missing or empty. Empty path: a temporary dir, removed afterwards.
  std::filesystem::path data_dir;
  std::uint64_t seed = 1;
  // Passphrase used to open the fetched QR. The service itself seals with
  // kDemoQrPassphrase.
  std::string decode_passphrase = kDemoQrPassphrase;
};

// Runs the scripted end-to-end flow against an in-process HTTP server and
// writes a transcript. Returns an exit code; on failure the last transcript
// line names the step and the error code.
int run_demo(const DemoOptions& options, std::ostream& transcript);

}  // namespace fleetline::ops
