#include "fleetline/ops.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "fleetline/qr/envelope.hpp"
#include "fleetline/qr/pbm.hpp"
#include "fleetline/service/event_log.hpp"
#include "fleetline/service/http_server.hpp"
#include "fleetline/service/service.hpp"
#include "fleetline/service/state.hpp"
#include "fleetline/service/trip_summary.hpp"

namespace fleetline::ops {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidParam:
    case ErrorCode::InvalidLocation:
    case ErrorCode::OutOfRange:
    case ErrorCode::FormatError:
    case ErrorCode::CapacityError:
    case ErrorCode::DataDirNotEmpty:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

namespace {

ErrorCode code_from_name(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::IoError); ++i) {
    const auto c = static_cast<ErrorCode>(i);
    if (to_string(c) == name) return c;
  }
  return ErrorCode::IoError;
}

json handle(const httplib::Result& r, const std::string& what) {
  if (!r) fail(ErrorCode::IoError, what + ": " + httplib::to_string(r.error()));
  json body;
  try {
    body = r->body.empty() ? json() : json::parse(r->body);
  } catch (const json::parse_error&) {
    fail(ErrorCode::IoError, what + ": HTTP " + std::to_string(r->status) + " with a non-JSON body");
  }
  if (r->status >= 400) {
    if (body.is_object() && body.contains("code")) fail(code_from_name(body["code"]), body.value("message", ""));
    fail(ErrorCode::IoError, what + ": HTTP " + std::to_string(r->status));
  }
  return body;
}

httplib::Headers headers_for(const std::string& token) {
  if (token.empty()) return {};
  return {{"Authorization", "Bearer " + token}};
}

}  // namespace

ApiClient::ApiClient(const std::string& url) : base_(url) {
  while (!base_.empty() && base_.back() == '/') base_.pop_back();
  if (base_.empty()) fail(ErrorCode::ValidationError, "service URL is empty");
}

void ApiClient::login(const std::string& login, const std::string& password) {
  token_ = post("/api/auth/login", json{{"login", login}, {"password", password}})["token"];
}

json ApiClient::get(const std::string& path) const {
  httplib::Client cli(base_);
  return handle(cli.Get(path, headers_for(token_)), "GET " + path);
}

json ApiClient::post(const std::string& path, const std::string& body, const std::string& content_type) const {
  httplib::Client cli(base_);
  return handle(cli.Post(path, headers_for(token_), body, content_type), "POST " + path);
}

std::string ApiClient::get_raw(const std::string& path, std::map<std::string, std::string>* headers) const {
  httplib::Client cli(base_);
  const auto r = cli.Get(path, headers_for(token_));
  if (!r) fail(ErrorCode::IoError, "GET " + path + ": " + httplib::to_string(r.error()));
  if (r->status >= 400) handle(r, "GET " + path);
  if (headers) {
    for (const auto& [k, v] : r->headers) (*headers)[k] = v;
  }
  return r->body;
}

// ------------------------------------------------------------------ seed

json seed_data_dir(const fs::path& dir, const service::Scenario& scenario, const std::string& admin_password) {
  service::ServiceConfig cfg;
  cfg.data_dir = dir;
  cfg.admin_password = admin_password;
  service::Service svc(std::move(cfg));
  return svc.seed_local(scenario);
}

json seed_remote(const Remote& remote, const std::string& scenario_text) {
  ApiClient api(remote.url);
  api.login(remote.login, remote.password);
  return api.post("/api/admin/seed", scenario_text, "application/x-ndjson");
}

// ---------------------------------------------------------------- report

reviews::SentimentCounts report_data_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::IoError, "no data dir at " + dir.string());
  const fs::path file = dir / service::kEventLogFile;
  if (!fs::exists(file)) return {};
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + file.string());
  service::State state;
  std::string line;
  std::uint64_t seq = 0;
  while (std::getline(in, line)) state.apply(service::EventRecord::from_line(line, ++seq));
  std::vector<reviews::Review> all;
  for (const auto& [id, r] : state.reviews) all.push_back(r);
  return reviews::sentiment_counts(all);
}

reviews::SentimentCounts report_remote(const Remote& remote) {
  ApiClient api(remote.url);
  api.login(remote.login, remote.password);
  const json j = api.get("/api/admin/sentiment");
  return {j.at("positive").get<std::size_t>(), j.at("negative").get<std::size_t>(),
          j.at("neutral").get<std::size_t>()};
}

std::string sentiment_csv(const reviews::SentimentCounts& c) {
  std::ostringstream out;
  out << "positive," << c.positive << "\nnegative," << c.negative << "\nneutral," << c.neutral << "\n";
  return out.str();
}

// -------------------------------------------------------------- simulate

std::vector<tracking::TelemetryMsg> simulate(const service::Scenario& scenario, const SimulateOptions& o) {
  if (o.vehicle_id.empty()) fail(ErrorCode::ValidationError, "a vehicle id is required");
  const geo::Polyline* path = nullptr;
  if (o.path_name.empty()) {
    if (scenario.paths.size() != 1) {
      fail(ErrorCode::ValidationError,
           "scenario has " + std::to_string(scenario.paths.size()) + " paths; name one with --path");
    }
    path = &scenario.paths.begin()->second;
  } else {
    const auto it = scenario.paths.find(o.path_name);
    if (it == scenario.paths.end()) fail(ErrorCode::ValidationError, "no path named " + o.path_name);
    path = &it->second;
  }
  return tracking::simulate_transmitter(o.vehicle_id, *path, o.speed_kmh, o.interval_ms, o.start_ms, o.first_seq);
}

json post_fixes(const Remote& remote, const std::vector<tracking::TelemetryMsg>& fixes) {
  ApiClient api(remote.url);
  api.login(remote.login, remote.password);
  std::size_t accepted = 0, stale = 0;
  for (const auto& m : fixes) {
    const json r = api.post("/api/telemetry", tracking::to_json_line(m), "application/json");
    (r["result"] == "Accepted" ? accepted : stale) += 1;
  }
  return {{"accepted", accepted}, {"stale", stale}};
}

// ------------------------------------------------------------------ demo

namespace {

class StepFailed : public std::runtime_error {
 public:
  StepFailed(std::string step, ErrorCode code, const std::string& message)
      : std::runtime_error(message), step(std::move(step)), code(code) {}
  std::string step;
  ErrorCode code;
};

class Transcript {
 public:
  explicit Transcript(std::ostream& out) : out_(out) {}

  template <typename Fn>
  auto step(const std::string& name, Fn&& fn) {
    try {
      return fn();
    } catch (const StepFailed&) {
      throw;
    } catch (const Error& e) {
      throw StepFailed(name, e.code(), e.what());
    } catch (const std::exception& e) {
      throw StepFailed(name, ErrorCode::IoError, e.what());
    }
  }
  void ok(const std::string& name, const std::string& detail) {
    out_ << "step " << ++n_ << " " << name << ": ok";
    if (!detail.empty()) out_ << " | " << detail;
    out_ << "\n";
  }

 private:
  std::ostream& out_;
  int n_ = 0;
};

void expect(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidState, what);
}

class InProcessServer {
 public:
  explicit InProcessServer(service::Service& svc) {
    service::install_routes(server_, svc);
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) fail(ErrorCode::IoError, "cannot bind a local port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~InProcessServer() { stop(); }
  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

int demo_body(const DemoOptions& options, const fs::path& dir, std::ostream& out) {
  Transcript t(out);
  out << "fleetline demo (seed " << options.seed << ")\n";

  // Seeded start point, kept away from the poles and the antimeridian.
  std::mt19937_64 rng(options.seed);
  const double lat0 = std::round(std::uniform_real_distribution<double>(-60.0, 60.0)(rng) * 1e6) / 1e6;
  const double lon0 = std::round(std::uniform_real_distribution<double>(-170.0, 170.0)(rng) * 1e6) / 1e6;
  const double deg = kDemoPathKm * 180.0 / (std::numbers::pi * geo::kEarthRadiusKm);
  const geo::Polyline path({geo::GeoPoint(lat0, lon0), geo::GeoPoint(lat0 + deg, lon0)});

  service::ServiceConfig cfg;
  cfg.data_dir = dir;
  cfg.admin_password = kDemoAdminPassword;
  cfg.qr_passphrase = kDemoQrPassphrase;
  auto svc = std::make_unique<service::Service>(cfg);
  auto server = std::make_unique<InProcessServer>(*svc);
  t.ok("start-service", "event log opened, admin bootstrapped");

  ApiClient admin(server->url()), provider(server->url()), customer(server->url()), driver(server->url());
  t.step("admin-login", [&] { admin.login("admin", kDemoAdminPassword); });
  t.ok("admin-login", "");

  const std::string provider_id = t.step("register-provider", [&] {
    return admin.post("/api/providers/register",
                      json{{"login", "demo-provider"}, {"name", "Demo Logistics"}, {"password", "provider-pass"}})
        .at("providerId")
        .get<std::string>();
  });
  t.ok("register-provider", provider_id + " pending");
  t.step("approve-provider", [&] { admin.post("/api/admin/providers/" + provider_id + "/approve", json::object()); });
  t.ok("approve-provider", provider_id + " approved");

  t.step("provider-login", [&] { provider.login("demo-provider", "provider-pass"); });
  const std::string vehicle_id = t.step("add-vehicle", [&] {
    return provider
        .post("/api/vehicles", json{{"vehicleType", "truck"},
                                    {"costPerKm", kDemoCostPerKm},
                                    {"home", {{"lat", lat0}, {"lon", lon0}}}})
        .at("vehicleId")
        .get<std::string>();
  });
  t.ok("add-vehicle", vehicle_id + " truck at 4.0 per km");
  const std::string driver_id = t.step("add-driver", [&] {
    return provider.post("/api/drivers", json{{"login", "demo-driver"}, {"name", "Dee"}, {"password", "driver-pass"}})
        .at("driverId")
        .get<std::string>();
  });
  t.ok("add-driver", driver_id);

  const std::string customer_id = t.step("register-customer", [&] {
    return customer.post("/api/customers/register",
                         json{{"login", "demo-customer"}, {"name", "Cass"}, {"password", "customer-pass"}})
        .at("customerId")
        .get<std::string>();
  });
  t.step("customer-login", [&] { customer.login("demo-customer", "customer-pass"); });
  t.ok("register-customer", customer_id);

  json request;
  t.step("create-request", [&] {
    request = customer.post("/api/requests", json{{"pickup", {{"lat", lat0}, {"lon", lon0}}},
                                                  {"dropoff", {{"lat", lat0 + deg}, {"lon", lon0}}},
                                                  {"vehicleType", "truck"}});
    expect(request["status"] == "Allocated", "request was not allocated: " + request.dump());
  });
  const std::string request_id = request["requestId"];
  const std::string trip_id = request["trip"]["tripId"];
  t.ok("create-request", request_id + " allocated " + trip_id + " to " + request["trip"]["vehicleId"].get<std::string>() +
                             " / " + request["trip"]["driverId"].get<std::string>() + ", quoted " +
                             request["trip"]["quotedCost"].get<std::string>());

  t.step("driver-accept", [&] {
    driver.login("demo-driver", "driver-pass");
    driver.post("/api/driver/requests/" + request_id + "/accept", json::object());
  });
  t.ok("driver-accept", "");
  t.step("start-trip", [&] { driver.post("/api/driver/trips/" + trip_id + "/start", json::object()); });
  t.ok("start-trip", "InTransit");

  std::size_t posted = 0;
  t.step("telemetry", [&] {
    const auto fixes = tracking::simulate_transmitter(vehicle_id, path, 50.0, 15'000, svc->now(), 1);
    for (const auto& m : fixes) {
      const json r = driver.post("/api/telemetry", tracking::to_json_line(m), "application/json");
      expect(r["result"] == "Accepted", "fix " + std::to_string(m.seq) + " was " + r["result"].get<std::string>());
      ++posted;
    }
    const json pos = customer.get("/api/trips/" + trip_id + "/position");
    expect(std::abs(pos["lat"].get<double>() - (lat0 + deg)) < 1e-9, "live position is not at the path end");
  });
  t.ok("telemetry", std::to_string(posted) + " fixes accepted along the 12.5 km path");

  json completed;
  t.step("complete-trip", [&] {
    completed = driver.post("/api/driver/trips/" + trip_id + "/complete", json::object());
    expect(completed["finalCost"] == "50.0", "final cost " + completed["finalCost"].dump() + ", expected 50.0");
  });
  t.ok("complete-trip", "distance_km = " + completed["actualDrKm"].get<std::string>() +
                            ", final_cost = " + completed["finalCost"].get<std::string>() +
                            ", fuel_units = " + completed["fuelUnits"].get<std::string>());

  const std::string payment_id = t.step("pay", [&] {
    return customer.post("/api/trips/" + trip_id + "/payment", json::object()).at("paymentId").get<std::string>();
  });
  t.ok("pay", payment_id + " 50.0");
  const json review = t.step("review", [&] {
    return customer.post("/api/reviews", json{{"tripId", trip_id}, {"text", "Great driver and a nice truck"}, {"stars", 5}});
  });
  t.ok("review", review["reviewId"].get<std::string>() + " " + review["sentiment"].get<std::string>());

  std::map<std::string, std::string> headers;
  const std::string pbm = t.step("qr-fetch", [&] { return customer.get_raw("/api/trips/" + trip_id + "/qr", &headers); });
  t.ok("qr-fetch", "version " + headers["X-Qr-Version"] + ", EC " + headers["X-Qr-Ec-Level"]);
  const qr::Bytes sealed = t.step("qr-decode", [&] { return qr::qr_decode(qr::from_pbm(pbm)); });
  t.ok("qr-decode", std::to_string(sealed.size()) + " envelope bytes");
  const qr::Bytes opened = t.step("qr-open", [&] { return qr::open_payload(sealed, options.decode_passphrase); });
  t.ok("qr-open", std::to_string(opened.size()) + " summary bytes");
  const json recovered = t.step("qr-verify", [&] {
    const json mine = service::to_json(service::decode_compact(opened));
    const json served = customer.get("/api/trips/" + trip_id).at("summary");
    expect(mine == served, "QR summary " + mine.dump() + " differs from served " + served.dump());
    return mine;
  });
  t.ok("qr-verify", recovered.dump());

  t.step("replay", [&] {
    const std::string live = svc->canonical_state();
    server->stop();
    server.reset();
    svc.reset();
    service::Service again(cfg);
    expect(again.canonical_state() == live, "replayed state differs from the live state");
  });
  t.ok("replay", "restart reproduces the live state byte for byte");
  out << "demo: ok\n";
  return kExitOk;
}

}  // namespace

int run_demo(const DemoOptions& options, std::ostream& out) {
  fs::path dir = options.data_dir;
  bool temporary = false;
  try {
    if (dir.empty()) {
      std::random_device rd;
      dir = fs::temp_directory_path() / ("fleetline-demo-" + std::to_string(rd()) + std::to_string(rd()));
      temporary = true;
    } else if (fs::exists(dir) && !fs::is_empty(dir)) {
      fail(ErrorCode::DataDirNotEmpty, dir.string() + " is not empty; the demo needs a fresh data dir");
    }
  } catch (const Error& e) {
    out << "demo failed at step \"prepare\": " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  }

  int code = kExitOk;
  try {
    code = demo_body(options, dir, out);
  } catch (const StepFailed& f) {
    out << "demo failed at step \"" << f.step << "\": " << to_string(f.code) << ": " << f.what() << "\n";
    code = exit_code_for(f.code);
  } catch (const Error& e) {
    out << "demo failed: " << to_string(e.code()) << ": " << e.what() << "\n";
    code = exit_code_for(e.code());
  }
  if (temporary) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  return code;
}

}  // namespace fleetline::ops
