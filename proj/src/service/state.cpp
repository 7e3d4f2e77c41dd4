#include "fleetline/service/state.hpp"

#include <functional>

#include "fleetline/error.hpp"
#include "fleetline/service/trip_summary.hpp"

namespace fleetline::service {

using nlohmann::json;
using namespace fleetline::dispatch;

namespace {

std::optional<VehicleStatus> vehicle_status_from(std::string_view s) {
  for (auto v : {VehicleStatus::Available, VehicleStatus::Reserved, VehicleStatus::InTransit,
                 VehicleStatus::OutOfService}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

[[noreturn]] void corrupt(const std::string& why) { fail(ErrorCode::CorruptLog, why); }

void require(bool ok, const std::string& why) {
  if (!ok) corrupt(why);
}

template <class Map>
auto& must_find(Map& m, const std::string& id, const char* what) {
  auto it = m.find(id);
  require(it != m.end(), std::string("unknown ") + what + " " + id);
  return it->second;
}

json trip_json(const TripRecord& r) {
  const Trip& t = r.trip;
  json route = json::array();
  for (const auto& p : t.planned_route.points()) route.push_back(point_json(p));
  json j{{"tripId", t.trip_id},
         {"requestId", t.request_id},
         {"customerId", t.customer_id},
         {"providerId", t.provider_id},
         {"vehicleId", t.vehicle_id},
         {"driverId", t.driver_id},
         {"plannedRoute", route},
         {"plannedDrMeters", t.planned_dr.meters},
         {"costPerKmMinor", t.cost_per_km.minor_per_km},
         {"quotedCost", t.quoted_cost.milli_minor},
         {"state", to_string(t.state)},
         {"requestedTime", t.requested_time},
         {"driverAccepted", r.driver_accepted},
         {"createdAt", r.created_at},
         {"trackAfterTs", r.track_after_ts ? json(*r.track_after_ts) : json()},
         {"paymentId", r.payment_id ? json(*r.payment_id) : json()},
         {"reviewId", r.review_id ? json(*r.review_id) : json()}};
  j["actualDrMeters"] = t.actual_dr ? json(t.actual_dr->meters) : json();
  j["finalCost"] = t.final_cost ? json(t.final_cost->milli_minor) : json();
  j["fuelUnits"] = t.fuel_units ? json(t.fuel_units->micro) : json();
  return j;
}

}  // namespace

json point_json(const geo::GeoPoint& p) { return {{"lat", p.lat()}, {"lon", p.lon()}}; }

geo::GeoPoint point_from_json(const json& j) { return geo::GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>()); }

std::string State::next_id(const std::string& prefix) const {
  const auto it = id_counters.find(prefix);
  return format_id(prefix, (it == id_counters.end() ? 0 : it->second) + 1);
}

const Account* State::find_login(const std::string& login) const {
  const auto it = login_index.find(login);
  return it == login_index.end() ? nullptr : &accounts.at(it->second);
}

std::vector<geo::TrackPoint> State::trip_track(const TripRecord& t) const {
  auto all = tracks.track(t.trip.vehicle_id);
  if (t.track_after_ts) {
    std::erase_if(all, [&](const geo::TrackPoint& p) { return p.timestamp_ms <= *t.track_after_ts; });
  }
  return all;
}

void State::apply(const EventRecord& record) {
  const json& p = record.payload;
  const std::string& k = record.kind;

  auto note_id = [&](const std::string& prefix, const std::string& id) {
    const auto n = parse_id(id, prefix);
    require(n.has_value(), "id '" + id + "' does not match prefix " + prefix);
    auto& c = id_counters[prefix];
    c = std::max(c, *n);
  };
  auto add_account = [&](const std::string& prefix, const std::string& id, Role role, Approval approval) {
    const auto login = p.at("login").get<std::string>();
    require(!accounts.contains(id), "duplicate account " + id);
    require(!login_index.contains(login), "duplicate login " + login);
    note_id(prefix, id);
    accounts[id] = Account{id, login, p.at("name").get<std::string>(), role,
                           PasswordHash::from_json(p.at("password")), approval};
    login_index[login] = id;
  };

  try {
    require(record.seq == last_seq + 1, "seq " + std::to_string(record.seq) + " does not follow " +
                                            std::to_string(last_seq));
    if (k == kind::kAdminBootstrapped) {
      add_account("A", p.at("accountId"), Role::Admin, Approval::Approved);
    } else if (k == kind::kProviderRegistered) {
      add_account("P", p.at("providerId"), Role::Provider, Approval::Pending);
    } else if (k == kind::kProviderApproved) {
      auto& a = must_find(accounts, p.at("providerId"), "provider");
      require(a.role == Role::Provider && a.approval == Approval::Pending, "provider not pending: " + a.account_id);
      a.approval = Approval::Approved;
    } else if (k == kind::kCustomerRegistered) {
      add_account("C", p.at("customerId"), Role::Customer, Approval::Approved);
    } else if (k == kind::kDriverAdded) {
      const std::string id = p.at("driverId");
      const std::string provider = p.at("providerId");
      require(must_find(accounts, provider, "provider").role == Role::Provider, "driver owner is not a provider");
      add_account("D", id, Role::Driver, Approval::Approved);
      drivers[id] = Driver{id, provider, p.at("name").get<std::string>(), DriverStatus::Free};
    } else if (k == kind::kVehicleAdded) {
      const std::string id = p.at("vehicleId");
      const std::string provider = p.at("providerId");
      require(!vehicles.contains(id), "duplicate vehicle " + id);
      require(must_find(accounts, provider, "provider").role == Role::Provider, "vehicle owner is not a provider");
      const Rate rate{p.at("costPerKmMinor").get<std::int64_t>()};
      require(rate.minor_per_km > 0, "non-positive vehicle rate");
      note_id("V", id);
      vehicles.emplace(id, Vehicle{id, provider, p.at("vehicleType").get<std::string>(), rate,
                                   point_from_json(p.at("home")), VehicleStatus::Available});
    } else if (k == kind::kVehicleStatusSet) {
      auto& v = must_find(vehicles, p.at("vehicleId"), "vehicle");
      const auto status = vehicle_status_from(p.at("status").get<std::string>());
      require(status == VehicleStatus::Available || status == VehicleStatus::OutOfService, "bad maintenance status");
      require(v.status == VehicleStatus::Available || v.status == VehicleStatus::OutOfService,
              "vehicle " + v.vehicle_id + " is busy");
      v.status = *status;
    } else if (k == kind::kRequestCreated) {
      const std::string id = p.at("requestId");
      require(!requests.contains(id), "duplicate request " + id);
      require(must_find(accounts, p.at("customerId"), "customer").role == Role::Customer, "requester not a customer");
      TripRequest q{id,
                    p.at("customerId"),
                    point_from_json(p.at("pickup")),
                    point_from_json(p.at("dropoff")),
                    p.at("vehicleType"),
                    p.at("requestedTime"),
                    p.at("maxRadiusKm"),
                    RequestStatus::Pending};
      const json& outcome = p.at("outcome");
      RequestRecord rec{q, std::nullopt, std::nullopt, record.ts};
      if (outcome.at("status") == "Allocated") {
        const std::string trip_id = outcome.at("tripId");
        require(!trips.contains(trip_id), "duplicate trip " + trip_id);
        auto& v = must_find(vehicles, outcome.at("vehicleId"), "vehicle");
        auto& d = must_find(drivers, outcome.at("driverId"), "driver");
        require(v.status == VehicleStatus::Available && d.status == DriverStatus::Free &&
                    d.provider_id == v.provider_id,
                "allocation of " + v.vehicle_id + "/" + d.driver_id + " is not possible");
        note_id("T", trip_id);
        rec.request.status = RequestStatus::Allocated;
        rec.trip_id = trip_id;
        trips.emplace(trip_id, TripRecord{plan_trip(trip_id, rec.request, v, d.driver_id), false, std::nullopt,
                                          std::nullopt, std::nullopt, record.ts});
        v.status = VehicleStatus::Reserved;
        d.status = DriverStatus::Assigned;
      } else {
        const std::string reason = outcome.at("reason");
        require(reason == "NoVehicle" || reason == "NoDriver", "bad rejection reason");
        rec.request.status = RequestStatus::Rejected;
        rec.rejection = reason == "NoVehicle" ? RejectReason::NoVehicle : RejectReason::NoDriver;
      }
      note_id("Q", id);
      requests.emplace(id, std::move(rec));
    } else if (k == kind::kRequestAccepted) {
      auto& t = must_find(trips, p.at("tripId"), "trip");
      require(t.trip.driver_id == p.at("driverId").get<std::string>(), "accepting driver is not assigned");
      require(!t.driver_accepted && t.trip.state == TripState::Scheduled, "trip already accepted");
      t.driver_accepted = true;
    } else if (k == kind::kTripStarted || k == kind::kTripCancelled || k == kind::kTripCompleted) {
      auto& t = must_find(trips, p.at("tripId"), "trip");
      TripEvent event = StartTrip{};
      if (k == kind::kTripCancelled) event = CancelTrip{};
      if (k == kind::kTripCompleted) event = CompleteTrip{trip_track(t)};
      auto out = transition(t.trip, event);
      if (k == kind::kTripCompleted) {
        require(out.trip.actual_dr->meters == p.at("actualDrMeters").get<std::int64_t>() &&
                    out.trip.final_cost->milli_minor == p.at("finalCost").get<std::int64_t>() &&
                    out.trip.fuel_units->micro == p.at("fuelUnits").get<std::int64_t>(),
                "completion figures of " + t.trip.trip_id + " do not match the recorded track");
      }
      if (k == kind::kTripStarted) {
        t.track_after_ts = p.at("trackAfterTs").is_null() ? std::nullopt
                                                            : std::optional(p.at("trackAfterTs").get<std::int64_t>());
      }
      vehicles.at(out.trip.vehicle_id).status = out.vehicle_status;
      drivers.at(out.trip.driver_id).status = out.driver_status;
      t.trip = std::move(out.trip);
    } else if (k == kind::kTelemetryAccepted) {
      const auto msg = tracking::from_json_line(p.dump());
      require(vehicles.contains(msg.vehicle_id), "telemetry for unknown vehicle " + msg.vehicle_id);
      require(tracks.ingest(msg) == tracking::IngestResult::Accepted, "stale telemetry in log");
    } else if (k == kind::kPaymentRecorded) {
      const std::string id = p.at("paymentId");
      auto& t = must_find(trips, p.at("tripId"), "trip");
      require(!payments.contains(id) && !t.payment_id, "duplicate payment");
      require(t.trip.state == TripState::Completed, "payment for incomplete trip");
      const Money amount{p.at("amount").get<std::int64_t>()};
      require(amount == *t.trip.final_cost, "payment amount differs from final cost");
      require(p.at("customerId") == t.trip.customer_id && p.at("providerId") == t.trip.provider_id,
              "payment parties differ from the trip");
      note_id("PAY", id);
      payments[id] = PaymentRecord{id, t.trip.trip_id, t.trip.customer_id, t.trip.provider_id, amount, record.ts};
      t.payment_id = id;
    } else if (k == kind::kReviewSubmitted) {
      reviews::Review r{p.at("reviewId"), p.at("customerId"), p.at("providerId"), p.at("tripId"),
                        p.at("text"),     p.at("stars"),      p.at("createdAt")};
      reviews::validate(r);
      require(!reviews.contains(r.review_id), "duplicate review " + r.review_id);
      require(must_find(accounts, r.provider_id, "provider").role == Role::Provider, "review target not a provider");
      require(must_find(accounts, r.customer_id, "customer").role == Role::Customer, "reviewer not a customer");
      if (!r.trip_id.empty()) {
        auto& t = must_find(trips, r.trip_id, "trip");
        require(t.payment_id && !t.review_id && t.trip.customer_id == r.customer_id &&
                    t.trip.provider_id == r.provider_id,
                "review not allowed for trip " + r.trip_id);
        t.review_id = r.review_id;
        ratings.set(r.customer_id, t.trip.vehicle_id, r.stars);
      }
      note_id("R", r.review_id);
      reviews.emplace(r.review_id, std::move(r));
    } else if (k == kind::kNotificationSent) {
      Notification n{p.at("notificationId"), p.at("providerId"), p.at("driverId"),
                     p.at("tripId"),         p.at("message"),    p.at("sentAt")};
      require(must_find(drivers, n.driver_id, "driver").provider_id == n.provider_id, "driver of another provider");
      note_id("N", n.notification_id);
      inbox[n.driver_id].push_back(std::move(n));
    } else if (k == kind::kRatingSet) {
      require(accounts.contains(p.at("customerId")), "rating by unknown customer");
      require(vehicles.contains(p.at("vehicleId")), "rating of unknown vehicle");
      ratings.set(p.at("customerId"), p.at("vehicleId"), p.at("rating").get<double>());
    } else if (k == kind::kScenarioSeeded) {
      require(scenarios.insert(p.at("name").get<std::string>()).second, "scenario seeded twice");
    } else {
      corrupt("unknown event kind '" + k + "'");
    }
  } catch (const json::exception& e) {
    corrupt("event " + std::to_string(record.seq) + " (" + k + "): " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptLog) {
      fail(ErrorCode::CorruptLog, "event " + std::to_string(record.seq) + " (" + k + "): " + e.what());
    }
    corrupt("event " + std::to_string(record.seq) + " (" + k + "): " + std::string(to_string(e.code())) + ": " +
            e.what());
  }
  last_seq = record.seq;
}

json State::canonical() const {
  json j = json::object();
  json& acc = j["accounts"] = json::object();
  for (const auto& [id, a] : accounts) {
    acc[id] = {{"login", a.login},
               {"name", a.name},
               {"role", to_string(a.role)},
               {"password", a.password.to_json()},
               {"approval", a.approval == Approval::Approved ? "Approved" : "Pending"}};
  }
  json& veh = j["vehicles"] = json::object();
  for (const auto& [id, v] : vehicles) {
    veh[id] = {{"providerId", v.provider_id},
               {"vehicleType", v.vehicle_type},
               {"costPerKmMinor", v.cost_per_km.minor_per_km},
               {"home", point_json(v.home_location)},
               {"status", to_string(v.status)}};
  }
  json& drv = j["drivers"] = json::object();
  for (const auto& [id, d] : drivers) {
    drv[id] = {{"providerId", d.provider_id}, {"name", d.name}, {"status", to_string(d.status)}};
  }
  json& req = j["requests"] = json::object();
  for (const auto& [id, r] : requests) {
    req[id] = {{"customerId", r.request.customer_id},
               {"pickup", point_json(r.request.pickup)},
               {"dropoff", point_json(r.request.dropoff)},
               {"vehicleType", r.request.vehicle_type},
               {"requestedTime", r.request.requested_time},
               {"maxRadiusKm", r.request.max_radius_km},
               {"status", to_string(r.request.status)},
               {"tripId", r.trip_id ? json(*r.trip_id) : json()},
               {"rejection", r.rejection ? json(to_string(*r.rejection)) : json()},
               {"createdAt", r.created_at}};
  }
  json& trp = j["trips"] = json::object();
  for (const auto& [id, t] : trips) trp[id] = trip_json(t);
  json& pay = j["payments"] = json::object();
  for (const auto& [id, p] : payments) {
    pay[id] = {{"tripId", p.trip_id},
               {"customerId", p.customer_id},
               {"providerId", p.provider_id},
               {"amount", p.amount.milli_minor},
               {"recordedAt", p.recorded_at}};
  }
  json& rev = j["reviews"] = json::object();
  for (const auto& [id, r] : reviews) {
    rev[id] = {{"customerId", r.customer_id},
               {"providerId", r.provider_id},
               {"tripId", r.trip_id},
               {"text", r.text},
               {"stars", r.stars},
               {"createdAt", r.created_at}};
  }
  json& box = j["inbox"] = json::object();
  for (const auto& [driver, list] : inbox) {
    json arr = json::array();
    for (const auto& n : list) {
      arr.push_back({{"notificationId", n.notification_id},
                     {"providerId", n.provider_id},
                     {"tripId", n.trip_id},
                     {"message", n.message},
                     {"sentAt", n.sent_at}});
    }
    box[driver] = std::move(arr);
  }
  json& rat = j["ratings"] = json::object();
  for (const auto& [c, row] : ratings.by_customer()) {
    for (const auto& [v, r] : row) rat[c][v] = r;
  }
  json& trk = j["tracks"] = json::object();
  for (const auto& v : tracks.vehicles()) {
    json pts = json::array();
    for (const auto& tp : tracks.track(v)) pts.push_back({tp.point.lat(), tp.point.lon(), tp.timestamp_ms});
    trk[v] = {{"lastSeq", tracks.last_seq(v) ? json(*tracks.last_seq(v)) : json()}, {"points", pts}};
  }
  j["scenarios"] = scenarios;
  j["idCounters"] = id_counters;
  j["lastSeq"] = last_seq;
  return j;
}

}  // namespace fleetline::service
