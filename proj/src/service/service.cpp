#include "fleetline/service/service.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <mutex>

#include "fleetline/error.hpp"
#include "fleetline/qr/envelope.hpp"
#include "fleetline/qr/pbm.hpp"
#include "fleetline/qr/trip_qr.hpp"
#include "fleetline/service/trip_summary.hpp"

namespace fleetline::service {

using nlohmann::json;
using namespace fleetline::dispatch;

namespace {

constexpr std::size_t kMaxNameLength = 200;
constexpr std::size_t kMinPasswordLength = 6;

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  fail(ErrorCode::ValidationError, "field " + field + ": " + message);
}

const json& body_object(const json& body) {
  if (!body.is_object()) fail(ErrorCode::ValidationError, "request body must be a JSON object");
  return body;
}

std::string text_field(const json& b, const char* field, std::size_t max_len = kMaxNameLength) {
  if (!b.contains(field) || !b[field].is_string()) invalid(field, "string required");
  std::string s = b[field];
  if (s.empty()) invalid(field, "must not be empty");
  if (s.size() > max_len) invalid(field, "longer than " + std::to_string(max_len) + " characters");
  return s;
}

std::string login_field(const json& b, const char* field = "login") {
  std::string s = text_field(b, field, 64);
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-' || c == '@')) {
      invalid(field, "only letters, digits and . _ - @ are allowed");
    }
  }
  return s;
}

std::string password_field(const json& b) {
  std::string s = text_field(b, "password", 256);
  if (s.size() < kMinPasswordLength) invalid("password", "at least 6 characters required");
  return s;
}

double number_field(const json& b, const char* field) {
  if (!b.contains(field) || !b[field].is_number()) invalid(field, "number required");
  return b[field].get<double>();
}

geo::GeoPoint point_field(const json& b, const char* field) {
  if (!b.contains(field) || !b[field].is_object()) invalid(field, "object {lat, lon} required");
  const json& p = b[field];
  if (!p.contains("lat") || !p["lat"].is_number() || !p.contains("lon") || !p["lon"].is_number()) {
    invalid(field, "numeric lat and lon required");
  }
  return geo::GeoPoint(p["lat"].get<double>(), p["lon"].get<double>());
}

Rate rate_field(const json& b) {
  if (b.contains("costPerKmMinor")) {
    if (!b["costPerKmMinor"].is_number_integer()) invalid("costPerKmMinor", "integer required");
    const Rate r{b["costPerKmMinor"].get<std::int64_t>()};
    if (r.minor_per_km <= 0) invalid("costPerKmMinor", "must be positive");
    return r;
  }
  const double major = number_field(b, "costPerKm");
  if (!(major > 0.0) || !std::isfinite(major)) invalid("costPerKm", "must be positive");
  const Rate r = Rate::from_major(major);
  if (std::abs(major * kMinorPerMajor - static_cast<double>(r.minor_per_km)) > 1e-6) {
    invalid("costPerKm", "at most two decimal places");
  }
  return r;
}

std::optional<double> query_number(const Query& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = it->second.data();
  const char* last = first + it->second.size();
  const auto [end, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || end != last || !std::isfinite(v)) invalid(key, "number required");
  return v;
}

std::optional<std::string> query_text(const Query& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::optional<geo::GeoPoint> query_point(const Query& q, bool required) {
  const auto lat = query_number(q, "lat");
  const auto lon = query_number(q, "lon");
  if (!lat && !lon && !required) return std::nullopt;
  if (!lat) invalid("lat", "required");
  if (!lon) invalid("lon", "required");
  return geo::GeoPoint(*lat, *lon);
}

std::string km_string(Distance d) { return decimal_string(d.meters, 3); }
std::string rate_string(Rate r) { return decimal_string(r.minor_per_km, 2); }

json counts_json(const reviews::SentimentCounts& c) {
  return {{"positive", c.positive}, {"negative", c.negative}, {"neutral", c.neutral}};
}

json account_summary(const Account& a) {
  json j{{"id", a.account_id}, {"login", a.login}, {"name", a.name}, {"role", to_string(a.role)}};
  if (a.role == Role::Provider) j["approval"] = a.approval == Approval::Approved ? "Approved" : "Pending";
  return j;
}

json vehicle_json(const Vehicle& v) {
  return {{"vehicleId", v.vehicle_id},
          {"providerId", v.provider_id},
          {"vehicleType", v.vehicle_type},
          {"costPerKm", rate_string(v.cost_per_km)},
          {"home", point_json(v.home_location)},
          {"status", to_string(v.status)}};
}

const PasswordHash& dummy_hash() {
  // Compared against on unknown logins so both failure paths cost the same.
  static const PasswordHash h = hash_password("no-such-account");
  return h;
}

}  // namespace

std::int64_t system_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Unauthenticated:
    case ErrorCode::AuthFailure:
      return 401;
    case ErrorCode::Forbidden:
      return 403;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::AlreadyPaid:
    case ErrorCode::IllegalTransition:
    case ErrorCode::InvalidState:
    case ErrorCode::NotCompleted:
    case ErrorCode::Conflict:
    case ErrorCode::OverlapError:
    case ErrorCode::CapacityError:
      return 409;
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidLocation:
    case ErrorCode::InvalidParam:
    case ErrorCode::OutOfRange:
    case ErrorCode::NonMonotonicTrack:
    case ErrorCode::FormatError:
      return 422;
    default:
      return 500;
  }
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      log_(config_.data_dir.empty() ? std::make_unique<EventLog>() : std::make_unique<EventLog>(config_.data_dir)) {
  for (const auto& record : log_->loaded()) state_.apply(record);
  if (log_->last_seq() == 0) {
    if (config_.admin_password.size() < kMinPasswordLength) {
      fail(ErrorCode::ValidationError, "bootstrap admin password must have at least 6 characters");
    }
    std::unique_lock lock(mutex_);
    commit(kind::kAdminBootstrapped, {{"accountId", format_id("A", 1)},
                                      {"login", config_.admin_login},
                                      {"name", "Administrator"},
                                      {"password", hash_password(config_.admin_password).to_json()}});
  }
}

EventRecord Service::commit(const std::string& kind, json payload) {
  EventRecord record = log_->append(config_.clock(), kind, std::move(payload));
  state_.apply(record);
  return record;
}

Service::Principal Service::require(const std::string& token, Action action) const {
  if (token.empty()) fail(ErrorCode::Unauthenticated, "bearer token required");
  const Session s = sessions_.resolve(token, config_.clock());
  Approval approval = Approval::Approved;
  {
    std::shared_lock lock(mutex_);
    const auto it = state_.accounts.find(s.account_id);
    if (it == state_.accounts.end()) fail(ErrorCode::Unauthenticated, "account no longer exists");
    approval = it->second.approval;
  }
  if (!authorize(s.role, approval, action)) {
    fail(ErrorCode::Forbidden, std::string(to_string(s.role)) + " may not perform " + std::string(to_string(action)));
  }
  return {s.account_id, s.role};
}

std::string Service::canonical_state() const {
  std::shared_lock lock(mutex_);
  return state_.canonical().dump();
}

std::uint64_t Service::last_seq() const { return log_->last_seq(); }

// ---------------------------------------------------------------- public

json Service::login(const std::string& login, const std::string& password) {
  std::optional<Account> account;
  {
    std::shared_lock lock(mutex_);
    if (const Account* a = state_.find_login(login)) account = *a;
  }
  const bool ok = verify_password(password, account ? account->password : dummy_hash()) && account.has_value();
  if (!ok) fail(ErrorCode::AuthFailure, "invalid login or password");
  const std::int64_t now = config_.clock();
  const std::string token = sessions_.issue(account->account_id, account->role, now);
  return {{"token", token},
          {"accountId", account->account_id},
          {"role", to_string(account->role)},
          {"expiresAt", now + kSessionTtlMs}};
}

void Service::logout(const std::string& token) {
  sessions_.resolve(token, config_.clock());
  sessions_.revoke(token);
}

json Service::register_provider(const json& body) {
  body_object(body);
  const auto login = login_field(body);
  const auto name = text_field(body, "name");
  const auto hash = hash_password(password_field(body));
  std::unique_lock lock(mutex_);
  if (state_.find_login(login)) fail(ErrorCode::Conflict, "login already taken");
  const std::string id = state_.next_id("P");
  commit(kind::kProviderRegistered, {{"providerId", id}, {"login", login}, {"name", name}, {"password", hash.to_json()}});
  return {{"providerId", id}, {"approval", "Pending"}};
}

json Service::register_customer(const json& body) {
  body_object(body);
  const auto login = login_field(body);
  const auto name = text_field(body, "name");
  const auto hash = hash_password(password_field(body));
  std::unique_lock lock(mutex_);
  if (state_.find_login(login)) fail(ErrorCode::Conflict, "login already taken");
  const std::string id = state_.next_id("C");
  commit(kind::kCustomerRegistered, {{"customerId", id}, {"login", login}, {"name", name}, {"password", hash.to_json()}});
  return {{"customerId", id}};
}

// ----------------------------------------------------------------- admin

json Service::approve_provider(const std::string& token, const std::string& provider_id) {
  require(token, Action::ApproveProvider);
  std::unique_lock lock(mutex_);
  const auto it = state_.accounts.find(provider_id);
  if (it == state_.accounts.end() || it->second.role != Role::Provider) fail(ErrorCode::NotFound, "no provider " + provider_id);
  if (it->second.approval == Approval::Approved) fail(ErrorCode::Conflict, provider_id + " is already approved");
  commit(kind::kProviderApproved, {{"providerId", provider_id}});
  return {{"providerId", provider_id}, {"approval", "Approved"}};
}

json Service::list_providers(const std::string& token) const {
  require(token, Action::ListProviders);
  std::shared_lock lock(mutex_);
  json out = json::array();
  for (const auto& [id, a] : state_.accounts) {
    if (a.role == Role::Provider) out.push_back(account_summary(a));
  }
  return out;
}

json Service::list_customers(const std::string& token) const {
  require(token, Action::ListCustomers);
  std::shared_lock lock(mutex_);
  json out = json::array();
  for (const auto& [id, a] : state_.accounts) {
    if (a.role == Role::Customer) out.push_back(account_summary(a));
  }
  return out;
}

json Service::list_all_vehicles(const std::string& token) const {
  require(token, Action::ListAllVehicles);
  std::shared_lock lock(mutex_);
  json out = json::array();
  for (const auto& [id, v] : state_.vehicles) out.push_back(vehicle_json(v));
  return out;
}

json Service::spam_report(const std::string& token) const {
  require(token, Action::SpamReport);
  std::shared_lock lock(mutex_);
  std::vector<reviews::Review> all;
  for (const auto& [id, r] : state_.reviews) all.push_back(r);
  json out = json::array();
  for (const auto& f : reviews::detect_spam_providers(all)) {
    json reasons = json::array();
    for (auto r : f.reasons) reasons.push_back(reviews::to_string(r));
    out.push_back({{"providerId", f.provider_id}, {"reasons", reasons}, {"duplicateRatio", f.duplicate_ratio}});
  }
  return out;
}

json Service::provider_rankings(const std::string& token) const {
  require(token, Action::ProviderRankings);
  std::shared_lock lock(mutex_);
  std::vector<reviews::Review> all;
  std::map<std::string, std::vector<reviews::Review>> by_provider;
  for (const auto& [id, r] : state_.reviews) {
    all.push_back(r);
    by_provider[r.provider_id].push_back(r);
  }
  std::vector<std::string> known;
  for (const auto& [id, a] : state_.accounts) {
    if (a.role == Role::Provider) known.push_back(id);
  }
  json out = json::array();
  for (const auto& r : reviews::rank_providers(all, known)) {
    out.push_back({{"providerId", r.provider_id},
                   {"meanStars", r.mean_stars ? json(*r.mean_stars) : json()},
                   {"reviewCount", r.review_count},
                   {"sentiment", counts_json(reviews::sentiment_counts(by_provider[r.provider_id]))}});
  }
  return out;
}

json Service::sentiment_report(const std::string& token) const {
  require(token, Action::SentimentReport);
  std::shared_lock lock(mutex_);
  std::vector<reviews::Review> all;
  for (const auto& [id, r] : state_.reviews) all.push_back(r);
  return counts_json(reviews::sentiment_counts(all));
}

json Service::seed(const std::string& token, const Scenario& scenario) {
  require(token, Action::SeedScenario);
  return seed_local(scenario);
}

json Service::seed_local(const Scenario& scenario) {
  // Hash passwords before taking the write lock.
  std::map<std::size_t, PasswordHash> hashes;
  for (const auto& r : scenario.records) {
    if (r.payload.contains("password")) {
      if (!r.payload["password"].is_string()) scenario_error(r.line, "password", "string required");
      const std::string pw = r.payload["password"];
      if (pw.size() < kMinPasswordLength) scenario_error(r.line, "password", "at least 6 characters required");
      hashes.emplace(r.line, hash_password(pw));
    }
  }

  std::unique_lock lock(mutex_);
  if (scenario.name && state_.scenarios.contains(*scenario.name)) {
    return {{"scenario", *scenario.name}, {"status", "already seeded"}, {"events", 0}};
  }

  // Validate everything against the current state plus the scenario's own
  // earlier records before appending anything.
  std::set<std::string> new_ids;
  std::set<std::string> new_logins;
  std::map<std::string, bool> provider_ids;  // id -> defined in scenario
  std::set<std::string> customer_ids;
  std::set<std::string> vehicle_ids;
  auto exists = [&](const std::string& id) { return new_ids.contains(id) || state_.accounts.contains(id) ||
                                                     state_.vehicles.contains(id) || state_.reviews.contains(id); };
  auto id_of = [&](const ScenarioRecord& r, const char* field, const char* prefix) {
    if (!r.payload.contains(field) || !r.payload[field].is_string()) scenario_error(r.line, field, "string required");
    const std::string id = r.payload[field];
    if (!parse_id(id, prefix)) scenario_error(r.line, field, "expected " + std::string(prefix) + " followed by digits, e.g. " + format_id(prefix, 1));
    return id;
  };
  auto fresh_id = [&](const ScenarioRecord& r, const char* field, const char* prefix) {
    const std::string id = id_of(r, field, prefix);
    if (exists(id)) scenario_error(r.line, field, "id " + id + " already exists");
    new_ids.insert(id);
    return id;
  };
  auto is_provider = [&](const std::string& id) {
    if (new_ids.contains(id)) return provider_ids.contains(id);
    const auto it = state_.accounts.find(id);
    return it != state_.accounts.end() && it->second.role == Role::Provider;
  };
  auto is_customer = [&](const std::string& id) {
    if (new_ids.contains(id)) return customer_ids.contains(id);
    const auto it = state_.accounts.find(id);
    return it != state_.accounts.end() && it->second.role == Role::Customer;
  };
  auto checked = [&](const ScenarioRecord& r, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ValidationError && std::string(e.what()).starts_with("line ")) throw;
      scenario_error(r.line, "", e.what());
    }
  };

  std::vector<std::pair<std::string, json>> events;
  json created = {{"providers", 0}, {"customers", 0}, {"drivers", 0}, {"vehicles", 0}, {"ratings", 0}, {"reviews", 0}};
  for (const auto& r : scenario.records) {
    const json& p = r.payload;
    checked(r, [&] {
      auto account_fields = [&](const char* id_field, const char* prefix) {
        const std::string id = fresh_id(r, id_field, prefix);
        const std::string login = login_field(p);
        if (state_.find_login(login) || !new_logins.insert(login).second) scenario_error(r.line, "login", "login already taken");
        if (!hashes.contains(r.line)) scenario_error(r.line, "password", "required");
        return json{{id_field, id}, {"login", login}, {"name", text_field(p, "name")},
                    {"password", hashes.at(r.line).to_json()}};
      };
      if (r.kind == "provider.registered") {
        json ev = account_fields("providerId", "P");
        provider_ids[ev["providerId"]] = true;
        events.emplace_back(kind::kProviderRegistered, ev);
        if (p.value("approved", false)) events.emplace_back(kind::kProviderApproved, json{{"providerId", ev["providerId"]}});
        created["providers"] = created["providers"].get<int>() + 1;
      } else if (r.kind == "customer.registered") {
        json ev = account_fields("customerId", "C");
        customer_ids.insert(ev["customerId"].get<std::string>());
        events.emplace_back(kind::kCustomerRegistered, ev);
        created["customers"] = created["customers"].get<int>() + 1;
      } else if (r.kind == "driver.added") {
        const std::string provider = id_of(r, "providerId", "P");
        if (!is_provider(provider)) scenario_error(r.line, "providerId", "unknown provider " + provider);
        json ev = account_fields("driverId", "D");
        ev["providerId"] = provider;
        events.emplace_back(kind::kDriverAdded, ev);
        created["drivers"] = created["drivers"].get<int>() + 1;
      } else if (r.kind == "vehicle.added") {
        const std::string id = fresh_id(r, "vehicleId", "V");
        const std::string provider = id_of(r, "providerId", "P");
        if (!is_provider(provider)) scenario_error(r.line, "providerId", "unknown provider " + provider);
        const Rate rate = rate_field(p);
        const auto home = point_field(p, "home");
        vehicle_ids.insert(id);
        events.emplace_back(kind::kVehicleAdded, json{{"vehicleId", id},
                                                      {"providerId", provider},
                                                      {"vehicleType", text_field(p, "vehicleType", 64)},
                                                      {"costPerKmMinor", rate.minor_per_km},
                                                      {"home", point_json(home)}});
        created["vehicles"] = created["vehicles"].get<int>() + 1;
      } else if (r.kind == "rating.set") {
        const std::string customer = id_of(r, "customerId", "C");
        const std::string vehicle = id_of(r, "vehicleId", "V");
        if (!is_customer(customer)) scenario_error(r.line, "customerId", "unknown customer " + customer);
        if (!vehicle_ids.contains(vehicle) && !state_.vehicles.contains(vehicle)) {
          scenario_error(r.line, "vehicleId", "unknown vehicle " + vehicle);
        }
        const double rating = number_field(p, "rating");
        if (!(rating >= 1.0 && rating <= 5.0)) scenario_error(r.line, "rating", "must lie in [1, 5]");
        events.emplace_back(kind::kRatingSet, json{{"customerId", customer}, {"vehicleId", vehicle}, {"rating", rating}});
        created["ratings"] = created["ratings"].get<int>() + 1;
      } else if (r.kind == "review.submitted") {
        if (p.contains("tripId") && p["tripId"] != "") scenario_error(r.line, "tripId", "seeded reviews cannot reference trips");
        const std::string id = fresh_id(r, "reviewId", "R");
        const std::string customer = id_of(r, "customerId", "C");
        const std::string provider = id_of(r, "providerId", "P");
        if (!is_customer(customer)) scenario_error(r.line, "customerId", "unknown customer " + customer);
        if (!is_provider(provider)) scenario_error(r.line, "providerId", "unknown provider " + provider);
        if (!p.contains("stars") || !p["stars"].is_number_integer()) scenario_error(r.line, "stars", "integer required");
        if (!p.contains("text") || !p["text"].is_string()) scenario_error(r.line, "text", "string required");
        reviews::Review review{id, customer, provider, "", p["text"], p["stars"], p.value("createdAt", std::int64_t{0})};
        reviews::validate(review);
        events.emplace_back(kind::kReviewSubmitted, json{{"reviewId", id},
                                                         {"customerId", customer},
                                                         {"providerId", provider},
                                                         {"tripId", ""},
                                                         {"text", review.text},
                                                         {"stars", review.stars},
                                                         {"createdAt", review.created_at}});
        created["reviews"] = created["reviews"].get<int>() + 1;
      }
    });
  }

  for (auto& [k, payload] : events) commit(k, std::move(payload));
  std::size_t count = events.size();
  if (scenario.name) {
    commit(kind::kScenarioSeeded, {{"name", *scenario.name}, {"created", created}});
    ++count;
  }
  return {{"scenario", scenario.name ? json(*scenario.name) : json()},
          {"status", "seeded"},
          {"events", count},
          {"created", created}};
}

// -------------------------------------------------------------- provider

json Service::provider_profile(const std::string& token) const {
  const auto who = require(token, Action::ProviderProfile);
  std::shared_lock lock(mutex_);
  json j = account_summary(state_.accounts.at(who.account_id));
  j["vehicles"] = std::count_if(state_.vehicles.begin(), state_.vehicles.end(),
                                [&](const auto& kv) { return kv.second.provider_id == who.account_id; });
  j["drivers"] = std::count_if(state_.drivers.begin(), state_.drivers.end(),
                               [&](const auto& kv) { return kv.second.provider_id == who.account_id; });
  return j;
}

json Service::add_vehicle(const std::string& token, const json& body) {
  const auto who = require(token, Action::AddVehicle);
  body_object(body);
  const std::string type = text_field(body, "vehicleType", 64);
  const Rate rate = rate_field(body);
  const auto home = point_field(body, "home");
  std::unique_lock lock(mutex_);
  const std::string id = state_.next_id("V");
  commit(kind::kVehicleAdded, {{"vehicleId", id},
                               {"providerId", who.account_id},
                               {"vehicleType", type},
                               {"costPerKmMinor", rate.minor_per_km},
                               {"home", point_json(home)}});
  return vehicle_json(state_.vehicles.at(id));
}

json Service::set_vehicle_status(const std::string& token, const std::string& vehicle_id, const json& body) {
  const auto who = require(token, Action::SetVehicleStatus);
  body_object(body);
  const std::string status = text_field(body, "status", 32);
  if (status != "Available" && status != "OutOfService") invalid("status", "Available or OutOfService");
  std::unique_lock lock(mutex_);
  const auto it = state_.vehicles.find(vehicle_id);
  if (it == state_.vehicles.end()) fail(ErrorCode::NotFound, "no vehicle " + vehicle_id);
  if (it->second.provider_id != who.account_id) fail(ErrorCode::Forbidden, vehicle_id + " belongs to another provider");
  const auto current = it->second.status;
  if (current != VehicleStatus::Available && current != VehicleStatus::OutOfService) {
    fail(ErrorCode::InvalidState, vehicle_id + " is " + std::string(to_string(current)));
  }
  commit(kind::kVehicleStatusSet, {{"vehicleId", vehicle_id}, {"status", status}});
  return vehicle_json(it->second);
}

json Service::add_driver(const std::string& token, const json& body) {
  const auto who = require(token, Action::AddDriver);
  body_object(body);
  const auto login = login_field(body);
  const auto name = text_field(body, "name");
  const auto hash = hash_password(password_field(body));
  std::unique_lock lock(mutex_);
  if (state_.find_login(login)) fail(ErrorCode::Conflict, "login already taken");
  const std::string id = state_.next_id("D");
  commit(kind::kDriverAdded, {{"driverId", id},
                              {"providerId", who.account_id},
                              {"login", login},
                              {"name", name},
                              {"password", hash.to_json()}});
  return {{"driverId", id}, {"providerId", who.account_id}, {"name", name}, {"status", "Free"}};
}

json Service::provider_requests(const std::string& token) const {
  const auto who = require(token, Action::ListProviderRequests);
  std::shared_lock lock(mutex_);
  json out = json::array();
  for (const auto& [id, r] : state_.requests) {
    if (!r.trip_id) continue;
    const auto& t = state_.trips.at(*r.trip_id);
    if (t.trip.provider_id != who.account_id) continue;
    out.push_back({{"requestId", id},
                   {"customerId", r.request.customer_id},
                   {"tripId", *r.trip_id},
                   {"vehicleId", t.trip.vehicle_id},
                   {"driverId", t.trip.driver_id},
                   {"pickup", point_json(r.request.pickup)},
                   {"dropoff", point_json(r.request.dropoff)},
                   {"requestedTime", r.request.requested_time},
                   {"tripState", to_string(t.trip.state)},
                   {"driverAccepted", t.driver_accepted}});
  }
  return out;
}

json Service::notify_driver(const std::string& token, const json& body) {
  const auto who = require(token, Action::NotifyDriver);
  body_object(body);
  const std::string driver_id = text_field(body, "driverId", 32);
  const std::string message = text_field(body, "message", 2000);
  std::string trip_id;
  if (body.contains("tripId") && !body["tripId"].is_null()) {
    if (!body["tripId"].is_string()) invalid("tripId", "string required");
    trip_id = body["tripId"];
  }
  std::unique_lock lock(mutex_);
  const auto d = state_.drivers.find(driver_id);
  if (d == state_.drivers.end()) fail(ErrorCode::NotFound, "no driver " + driver_id);
  if (d->second.provider_id != who.account_id) fail(ErrorCode::Forbidden, driver_id + " works for another provider");
  if (!trip_id.empty()) {
    const auto t = state_.trips.find(trip_id);
    if (t == state_.trips.end()) fail(ErrorCode::NotFound, "no trip " + trip_id);
    if (t->second.trip.provider_id != who.account_id) fail(ErrorCode::Forbidden, trip_id + " belongs to another provider");
  }
  const std::string id = state_.next_id("N");
  commit(kind::kNotificationSent, {{"notificationId", id},
                                   {"providerId", who.account_id},
                                   {"driverId", driver_id},
                                   {"tripId", trip_id},
                                   {"message", message},
                                   {"sentAt", config_.clock()}});
  return {{"notificationId", id}};
}

json Service::schedule_for(const std::string& owner, const std::function<bool(const TripRecord&)>& pick) const {
  std::vector<ScheduleItem> items;
  for (const auto& [id, t] : state_.trips) {
    const auto s = t.trip.state;
    if ((s == TripState::Scheduled || s == TripState::InTransit) && pick(t)) {
      items.push_back({id, t.trip.requested_time, t.trip.planned_dr});
    }
  }
  const Schedule schedule = build_schedule(owner, items);
  json entries = json::array();
  for (const auto& e : schedule.entries) {
    entries.push_back({{"tripId", e.trip_id},
                       {"startMs", e.start_ms},
                       {"endMs", e.end_ms},
                       {"state", to_string(state_.trips.at(e.trip_id).trip.state)}});
  }
  return {{"owner", owner}, {"entries", entries}};
}

json Service::vehicle_schedule(const std::string& token, const std::string& vehicle_id) const {
  const auto who = require(token, Action::VehicleSchedule);
  std::shared_lock lock(mutex_);
  const auto it = state_.vehicles.find(vehicle_id);
  if (it == state_.vehicles.end()) fail(ErrorCode::NotFound, "no vehicle " + vehicle_id);
  if (it->second.provider_id != who.account_id) fail(ErrorCode::Forbidden, vehicle_id + " belongs to another provider");
  return schedule_for(vehicle_id, [&](const TripRecord& t) { return t.trip.vehicle_id == vehicle_id; });
}

json Service::provider_history(const std::string& token) const {
  const auto who = require(token, Action::ProviderHistory);
  std::shared_lock lock(mutex_);
  json trips = json::array();
  for (const auto& [id, t] : state_.trips) {
    if (t.trip.provider_id != who.account_id) continue;
    if (t.trip.state == TripState::Completed || t.trip.state == TripState::Cancelled) trips.push_back(trip_view(t));
  }
  json payments = json::array();
  std::int64_t total = 0;
  for (const auto& [id, p] : state_.payments) {
    if (p.provider_id != who.account_id) continue;
    total += p.amount.milli_minor;
    payments.push_back({{"paymentId", id},
                        {"tripId", p.trip_id},
                        {"customerId", p.customer_id},
                        {"amount", to_major_string(p.amount)},
                        {"recordedAt", p.recorded_at}});
  }
  return {{"trips", trips}, {"payments", payments}, {"paidTotal", to_major_string(Money{total})}};
}

// -------------------------------------------------------------- customer

json Service::search_vehicles(const std::string& token, const Query& query) const {
  require(token, Action::SearchVehicles);
  const auto type = query_text(query, "type");
  const auto max_cost = query_number(query, "maxCost");
  const auto at = query_point(query, false);
  std::shared_lock lock(mutex_);
  struct Hit {
    const Vehicle* v;
    double distance_km;
  };
  std::vector<Hit> hits;
  for (const auto& [id, v] : state_.vehicles) {
    if (v.status != VehicleStatus::Available) continue;
    if (state_.accounts.at(v.provider_id).approval != Approval::Approved) continue;
    if (type && v.vehicle_type != *type) continue;
    if (max_cost && v.cost_per_km.major() > *max_cost) continue;
    double d = 0.0;
    if (at) {
      const auto live = state_.tracks.current_position(id);
      d = geo::haversine_km(*at, live ? live->point : v.home_location);
    }
    hits.push_back({&v, d});
  }
  if (at) {
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.distance_km < b.distance_km; });
  }
  json out = json::array();
  for (const auto& h : hits) {
    json j = vehicle_json(*h.v);
    if (at) j["distanceKm"] = h.distance_km;
    out.push_back(std::move(j));
  }
  return out;
}

json Service::create_request(const std::string& token, const json& body) {
  const auto who = require(token, Action::CreateRequest);
  body_object(body);
  const auto pickup = point_field(body, "pickup");
  const auto dropoff = point_field(body, "dropoff");
  if (pickup == dropoff) invalid("dropoff", "must differ from pickup");
  const std::string type = text_field(body, "vehicleType", 64);
  const std::int64_t now = config_.clock();
  std::int64_t requested = now;
  if (body.contains("requestedTime")) {
    if (!body["requestedTime"].is_number_integer()) invalid("requestedTime", "integer ms epoch required");
    requested = body["requestedTime"];
    if (requested < now) invalid("requestedTime", "must not be in the past");
  }
  double radius = kDefaultMaxRadiusKm;
  if (body.contains("maxRadiusKm")) {
    radius = number_field(body, "maxRadiusKm");
    if (!(radius > 0.0) || !std::isfinite(radius)) invalid("maxRadiusKm", "must be positive");
  }

  std::unique_lock lock(mutex_);
  const std::string request_id = state_.next_id("Q");
  const TripRequest request{request_id, who.account_id, pickup, dropoff, type, requested, radius, RequestStatus::Pending};
  std::vector<FleetEntry> fleet;
  for (const auto& [id, v] : state_.vehicles) {
    if (state_.accounts.at(v.provider_id).approval != Approval::Approved) continue;
    const auto live = state_.tracks.current_position(id);
    fleet.push_back({v, live ? std::optional(live->point) : std::nullopt});
  }
  std::vector<Driver> drivers;
  for (const auto& [id, d] : state_.drivers) drivers.push_back(d);

  const Allocation decision = allocate(request, fleet, drivers);
  json outcome;
  if (const auto* a = std::get_if<Accepted>(&decision)) {
    outcome = {{"status", "Allocated"},
               {"vehicleId", a->vehicle_id},
               {"driverId", a->driver_id},
               {"tripId", state_.next_id("T")},
               {"distanceKm", a->distance_km}};
  } else {
    outcome = {{"status", "Rejected"}, {"reason", to_string(std::get<Rejected>(decision).reason)}};
  }
  commit(kind::kRequestCreated, {{"requestId", request_id},
                                 {"customerId", who.account_id},
                                 {"pickup", point_json(pickup)},
                                 {"dropoff", point_json(dropoff)},
                                 {"vehicleType", type},
                                 {"requestedTime", requested},
                                 {"maxRadiusKm", radius},
                                 {"outcome", outcome}});
  json out{{"requestId", request_id}, {"status", outcome["status"]}};
  if (outcome["status"] == "Allocated") {
    out["trip"] = trip_view(state_.trips.at(outcome["tripId"].get<std::string>()));
  } else {
    out["reason"] = outcome["reason"];
  }
  return out;
}

json Service::recommendations(const std::string& token, const Query& query) const {
  const auto who = require(token, Action::Recommendations);
  const auto at = *query_point(query, true);
  recommender::RecommendationQuery q{who.account_id, at, query_number(query, "maxCost"), query_text(query, "type"),
                                     recommender::kDefaultNeighbors};
  if (const auto k = query_number(query, "k")) {
    if (*k < 1 || *k != std::floor(*k)) invalid("k", "positive integer required");
    q.k_neighbors = static_cast<int>(*k);
  }
  std::shared_lock lock(mutex_);
  std::vector<recommender::FleetCandidate> fleet;
  fleet.reserve(state_.vehicles.size());
  for (const auto& [id, v] : state_.vehicles) {
    if (state_.accounts.at(v.provider_id).approval != Approval::Approved) continue;
    const auto live = state_.tracks.current_position(id);
    fleet.push_back({id, v.vehicle_type, live ? live->point : v.home_location, v.cost_per_km.major(),
                     v.status == VehicleStatus::Available});
  }
  json out = json::array();
  try {
    for (const auto& r : recommender::recommend(state_.ratings, q, fleet)) {
      const auto& v = state_.vehicles.at(r.vehicle_id);
      out.push_back({{"vehicleId", r.vehicle_id},
                     {"providerId", v.provider_id},
                     {"vehicleType", v.vehicle_type},
                     {"score", r.score},
                     {"predictedRating", r.predicted_rating ? json(*r.predicted_rating) : json()},
                     {"distanceKm", r.distance_km},
                     {"costPerKm", rate_string(v.cost_per_km)}});
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyFleet) throw;
  }
  return out;
}

const TripRecord& Service::trip_for(const Principal& who, const std::string& trip_id) const {
  const auto it = state_.trips.find(trip_id);
  if (it == state_.trips.end()) fail(ErrorCode::NotFound, "no trip " + trip_id);
  const Trip& t = it->second.trip;
  bool mine = false;
  switch (who.role) {
    case Role::Admin: mine = true; break;
    case Role::Customer: mine = t.customer_id == who.account_id; break;
    case Role::Provider: mine = t.provider_id == who.account_id; break;
    case Role::Driver: mine = t.driver_id == who.account_id; break;
  }
  if (!mine) fail(ErrorCode::Forbidden, trip_id + " is not yours");
  return it->second;
}

json Service::trip_view(const TripRecord& r) const {
  const Trip& t = r.trip;
  json j{{"tripId", t.trip_id},
         {"requestId", t.request_id},
         {"customerId", t.customer_id},
         {"providerId", t.provider_id},
         {"vehicleId", t.vehicle_id},
         {"driverId", t.driver_id},
         {"state", to_string(t.state)},
         {"pickup", point_json(t.planned_route.front())},
         {"dropoff", point_json(t.planned_route.back())},
         {"requestedTime", t.requested_time},
         {"plannedDrKm", km_string(t.planned_dr)},
         {"costPerKm", rate_string(t.cost_per_km)},
         {"quotedCost", to_major_string(t.quoted_cost)},
         {"driverAccepted", r.driver_accepted},
         {"paid", r.payment_id.has_value()},
         {"reviewed", r.review_id.has_value()},
         {"summary", to_json(summarize(t))}};
  j["actualDrKm"] = t.actual_dr ? json(km_string(*t.actual_dr)) : json();
  j["finalCost"] = t.final_cost ? json(to_major_string(*t.final_cost)) : json();
  j["fuelUnits"] = t.fuel_units ? json(to_major_string(*t.fuel_units)) : json();
  return j;
}

json Service::trip_position(const std::string& token, const std::string& trip_id) const {
  const auto who = require(token, Action::TripPosition);
  std::shared_lock lock(mutex_);
  const auto& t = trip_for(who, trip_id);
  std::optional<geo::TrackPoint> fix;
  if (t.trip.state == TripState::Completed || t.trip.state == TripState::Cancelled) {
    const auto track = state_.trip_track(t);
    if (!track.empty()) fix = track.back();
  } else {
    fix = state_.tracks.current_position(t.trip.vehicle_id);
  }
  if (!fix) fail(ErrorCode::NotFound, "no position known for " + trip_id);
  return {{"tripId", trip_id},
          {"vehicleId", t.trip.vehicle_id},
          {"lat", fix->point.lat()},
          {"lon", fix->point.lon()},
          {"ts", fix->timestamp_ms},
          {"state", to_string(t.trip.state)}};
}

json Service::pay_trip(const std::string& token, const std::string& trip_id) {
  const auto who = require(token, Action::PayTrip);
  std::unique_lock lock(mutex_);
  const auto& t = trip_for(who, trip_id);
  if (t.trip.state != TripState::Completed) fail(ErrorCode::NotCompleted, trip_id + " is " + std::string(to_string(t.trip.state)));
  if (t.payment_id) fail(ErrorCode::AlreadyPaid, trip_id + " was paid by " + *t.payment_id);
  const std::string id = state_.next_id("PAY");
  commit(kind::kPaymentRecorded, {{"paymentId", id},
                                  {"tripId", trip_id},
                                  {"customerId", t.trip.customer_id},
                                  {"providerId", t.trip.provider_id},
                                  {"amount", t.trip.final_cost->milli_minor}});
  const auto& p = state_.payments.at(id);
  return {{"paymentId", id},
          {"tripId", trip_id},
          {"customerId", p.customer_id},
          {"providerId", p.provider_id},
          {"amount", to_major_string(p.amount)},
          {"status", "Recorded"}};
}

json Service::submit_review(const std::string& token, const json& body) {
  const auto who = require(token, Action::SubmitReview);
  body_object(body);
  const std::string trip_id = text_field(body, "tripId", 32);
  if (!body.contains("text") || !body["text"].is_string()) invalid("text", "string required");
  if (!body.contains("stars") || !body["stars"].is_number_integer()) invalid("stars", "integer 1..5 required");
  std::unique_lock lock(mutex_);
  const auto& t = trip_for(who, trip_id);
  reviews::Review review{state_.next_id("R"), who.account_id, t.trip.provider_id, trip_id,
                         body["text"],        body["stars"],  config_.clock()};
  try {
    reviews::validate(review);
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, e.what());
  }
  if (!t.payment_id) fail(ErrorCode::InvalidState, "reviews open once " + trip_id + " is paid");
  if (t.review_id) fail(ErrorCode::Conflict, trip_id + " was already reviewed");
  commit(kind::kReviewSubmitted, {{"reviewId", review.review_id},
                                  {"customerId", review.customer_id},
                                  {"providerId", review.provider_id},
                                  {"tripId", trip_id},
                                  {"text", review.text},
                                  {"stars", review.stars},
                                  {"createdAt", review.created_at}});
  return {{"reviewId", review.review_id},
          {"providerId", review.provider_id},
          {"sentiment", reviews::to_string(reviews::classify_review(review.text))}};
}

QrImage Service::trip_qr(const std::string& token, const std::string& trip_id) const {
  const auto who = require(token, Action::TripQr);
  TripSummary summary;
  {
    std::shared_lock lock(mutex_);
    summary = summarize(trip_for(who, trip_id).trip);
  }
  if (!config_.qr_passphrase || config_.qr_passphrase->empty()) {
    fail(ErrorCode::InvalidState, "the QR passphrase is not configured");
  }
  const auto bytes = encode_compact(summary);
  // Strongest error correction that still fits.
  for (auto ec : {qr::EcLevel::H, qr::EcLevel::Q, qr::EcLevel::M, qr::EcLevel::L}) {
    if (qr::smallest_version_for(bytes.size() + qr::kEnvelopeOverhead, ec) == 0) continue;
    const auto matrix = qr::make_trip_qr(bytes, *config_.qr_passphrase, ec);
    return {qr::to_pbm(matrix), matrix.version(), std::string(1, qr::ec_level_name(ec))};
  }
  fail(ErrorCode::CapacityError, "trip summary does not fit a version 4 symbol");
}

json Service::cancel_trip(const std::string& token, const std::string& trip_id) {
  const auto who = require(token, Action::CancelTrip);
  std::unique_lock lock(mutex_);
  const auto& t = trip_for(who, trip_id);
  transition(t.trip, CancelTrip{});  // IllegalTransition before anything is logged
  commit(kind::kTripCancelled, {{"tripId", trip_id}, {"by", who.account_id}});
  return trip_view(state_.trips.at(trip_id));
}

// ---------------------------------------------------------------- driver

json Service::driver_requests(const std::string& token) const {
  const auto who = require(token, Action::DriverRequests);
  std::shared_lock lock(mutex_);
  json out = json::array();
  for (const auto& [id, t] : state_.trips) {
    if (t.trip.driver_id != who.account_id || t.trip.state != TripState::Scheduled) continue;
    out.push_back({{"requestId", t.trip.request_id},
                   {"tripId", id},
                   {"vehicleId", t.trip.vehicle_id},
                   {"pickup", point_json(t.trip.planned_route.front())},
                   {"dropoff", point_json(t.trip.planned_route.back())},
                   {"requestedTime", t.trip.requested_time},
                   {"accepted", t.driver_accepted}});
  }
  return out;
}

json Service::accept_request(const std::string& token, const std::string& request_id) {
  const auto who = require(token, Action::AcceptRequest);
  std::unique_lock lock(mutex_);
  const auto r = state_.requests.find(request_id);
  if (r == state_.requests.end()) fail(ErrorCode::NotFound, "no request " + request_id);
  if (!r->second.trip_id) fail(ErrorCode::InvalidState, request_id + " was rejected");
  const auto& t = state_.trips.at(*r->second.trip_id);
  if (t.trip.driver_id != who.account_id) fail(ErrorCode::Forbidden, request_id + " is assigned to another driver");
  if (t.trip.state != TripState::Scheduled) fail(ErrorCode::InvalidState, "trip is " + std::string(to_string(t.trip.state)));
  if (t.driver_accepted) fail(ErrorCode::Conflict, request_id + " was already accepted");
  commit(kind::kRequestAccepted, {{"requestId", request_id}, {"tripId", t.trip.trip_id}, {"driverId", who.account_id}});
  return trip_view(t);
}

json Service::driver_schedule(const std::string& token) const {
  const auto who = require(token, Action::DriverSchedule);
  std::shared_lock lock(mutex_);
  return schedule_for(who.account_id, [&](const TripRecord& t) { return t.trip.driver_id == who.account_id; });
}

json Service::driver_notifications(const std::string& token) const {
  const auto who = require(token, Action::DriverNotifications);
  std::shared_lock lock(mutex_);
  json out = json::array();
  const auto it = state_.inbox.find(who.account_id);
  if (it == state_.inbox.end()) return out;
  for (const auto& n : it->second) {
    out.push_back({{"notificationId", n.notification_id},
                   {"providerId", n.provider_id},
                   {"tripId", n.trip_id},
                   {"message", n.message},
                   {"sentAt", n.sent_at}});
  }
  return out;
}

json Service::start_trip(const std::string& token, const std::string& trip_id) {
  const auto who = require(token, Action::StartTrip);
  std::unique_lock lock(mutex_);
  const auto& t = trip_for(who, trip_id);
  transition(t.trip, StartTrip{});
  if (!t.driver_accepted) fail(ErrorCode::InvalidState, "accept the request before starting " + trip_id);
  const auto last = state_.tracks.current_position(t.trip.vehicle_id);
  commit(kind::kTripStarted, {{"tripId", trip_id}, {"trackAfterTs", last ? json(last->timestamp_ms) : json()}});
  return trip_view(t);
}

json Service::complete_trip(const std::string& token, const std::string& trip_id) {
  const auto who = require(token, Action::CompleteTrip);
  std::unique_lock lock(mutex_);
  const auto& t = trip_for(who, trip_id);
  const auto out = transition(t.trip, CompleteTrip{state_.trip_track(t)});
  commit(kind::kTripCompleted, {{"tripId", trip_id},
                                {"actualDrMeters", out.trip.actual_dr->meters},
                                {"finalCost", out.trip.final_cost->milli_minor},
                                {"fuelUnits", out.trip.fuel_units->micro}});
  return trip_view(t);
}

// ---------------------------------------------------------------- shared

json Service::get_trip(const std::string& token, const std::string& trip_id) const {
  const auto who = require(token, Action::GetTrip);
  std::shared_lock lock(mutex_);
  return trip_view(trip_for(who, trip_id));
}

json Service::post_telemetry(const std::string& token, const std::string& wire_line) {
  const auto who = require(token, Action::PostTelemetry);
  const auto msg = tracking::from_json_line(wire_line);
  std::unique_lock lock(mutex_);
  const auto v = state_.vehicles.find(msg.vehicle_id);
  if (v == state_.vehicles.end()) fail(ErrorCode::NotFound, "no vehicle " + msg.vehicle_id);
  const std::string& owner = v->second.provider_id;
  const bool allowed = who.role == Role::Admin || (who.role == Role::Provider && owner == who.account_id) ||
                       (who.role == Role::Driver && state_.drivers.at(who.account_id).provider_id == owner);
  if (!allowed) fail(ErrorCode::Forbidden, msg.vehicle_id + " belongs to another provider");

  const auto last = state_.tracks.current_position(msg.vehicle_id);
  const auto last_seq = state_.tracks.last_seq(msg.vehicle_id);
  if (last && (msg.seq <= *last_seq || msg.timestamp_ms <= last->timestamp_ms)) {
    return {{"result", "RejectedStale"}, {"vehicleId", msg.vehicle_id}, {"lastSeq", *last_seq}};
  }
  if (msg.timestamp_ms < 0) fail(ErrorCode::ValidationError, "field ts: must not be negative");
  commit(kind::kTelemetryAccepted, json::parse(tracking::to_json_line(msg)));
  return {{"result", "Accepted"}, {"vehicleId", msg.vehicle_id}, {"lastSeq", msg.seq}};
}

json Service::vehicle_track(const std::string& token, const std::string& vehicle_id) const {
  const auto who = require(token, Action::VehicleTrack);
  std::shared_lock lock(mutex_);
  const auto v = state_.vehicles.find(vehicle_id);
  if (v == state_.vehicles.end()) fail(ErrorCode::NotFound, "no vehicle " + vehicle_id);
  const std::string& owner = v->second.provider_id;
  const bool allowed = who.role == Role::Admin || (who.role == Role::Provider && owner == who.account_id) ||
                       (who.role == Role::Driver && state_.drivers.at(who.account_id).provider_id == owner);
  if (!allowed) fail(ErrorCode::Forbidden, vehicle_id + " belongs to another provider");
  json points = json::array();
  const auto track = state_.tracks.track(vehicle_id);
  for (const auto& p : track) points.push_back({{"lat", p.point.lat()}, {"lon", p.point.lon()}, {"ts", p.timestamp_ms}});
  return {{"vehicleId", vehicle_id}, {"points", points}, {"lengthKm", geo::route_length_km(track)}};
}

}  // namespace fleetline::service
