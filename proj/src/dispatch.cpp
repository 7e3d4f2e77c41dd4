#include "fleetline/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fleetline/error.hpp"

namespace fleetline::dispatch {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) fail(ErrorCode::InvalidParam, std::string(what) + " overflows");
  return out;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void illegal(const Trip& trip, const TripEvent& event) {
  fail(ErrorCode::IllegalTransition, "trip " + trip.trip_id + ": " + std::string(event_name(event)) +
                                         " is not allowed from " + std::string(to_string(trip.state)));
}

}  // namespace

Distance Distance::from_km(double km) {
  if (!std::isfinite(km)) fail(ErrorCode::InvalidParam, "distance must be finite");
  return Distance{std::llround(km * 1000.0)};
}

Rate Rate::from_major(double per_km) {
  if (!std::isfinite(per_km)) fail(ErrorCode::InvalidParam, "rate must be finite");
  return Rate{std::llround(per_km * kMinorPerMajor)};
}

std::string decimal_string(std::int64_t value, int scale) {
  const bool negative = value < 0;
  // Work in unsigned to survive INT64_MIN.
  std::uint64_t magnitude = negative ? 0 - static_cast<std::uint64_t>(value) : static_cast<std::uint64_t>(value);
  std::string digits = std::to_string(magnitude);
  if (static_cast<int>(digits.size()) <= scale) digits.insert(0, static_cast<std::size_t>(scale) - digits.size() + 1, '0');
  std::string whole = digits.substr(0, digits.size() - static_cast<std::size_t>(scale));
  std::string frac = digits.substr(digits.size() - static_cast<std::size_t>(scale));
  while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
  if (frac.empty()) frac = "0";
  return (negative ? "-" : "") + whole + "." + frac;
}

// Major unit = 100 minor; Money carries 1000ths of a minor unit.
std::string to_major_string(Money m) { return decimal_string(m.milli_minor, 5); }
// FuelUnits carries 10^-6 minor x km, i.e. 10^-8 major x km.
std::string to_major_string(FuelUnits f) { return decimal_string(f.micro, 8); }

Money trip_cost(Distance dr, Rate cost_per_km) {
  if (dr.meters < 0) fail(ErrorCode::InvalidParam, "route length must be non-negative");
  if (cost_per_km.minor_per_km <= 0) fail(ErrorCode::InvalidParam, "cost per km must be positive");
  return Money{checked_mul(dr.meters, cost_per_km.minor_per_km, "trip cost")};
}

FuelUnits fuel_usage(Money cost, Distance dr) {
  if (cost.milli_minor < 0 || dr.meters < 0) fail(ErrorCode::InvalidParam, "fuel inputs must be non-negative");
  return FuelUnits{checked_mul(cost.milli_minor, dr.meters, "fuel usage")};
}

std::string_view to_string(VehicleStatus s) noexcept {
  switch (s) {
    case VehicleStatus::Available: return "Available";
    case VehicleStatus::Reserved: return "Reserved";
    case VehicleStatus::InTransit: return "InTransit";
    case VehicleStatus::OutOfService: return "OutOfService";
  }
  return "";
}

std::string_view to_string(DriverStatus s) noexcept {
  return s == DriverStatus::Free ? "Free" : "Assigned";
}

std::string_view to_string(RequestStatus s) noexcept {
  switch (s) {
    case RequestStatus::Pending: return "Pending";
    case RequestStatus::Allocated: return "Allocated";
    case RequestStatus::Rejected: return "Rejected";
  }
  return "";
}

std::string_view to_string(TripState s) noexcept {
  switch (s) {
    case TripState::Scheduled: return "Scheduled";
    case TripState::InTransit: return "InTransit";
    case TripState::Completed: return "Completed";
    case TripState::Cancelled: return "Cancelled";
  }
  return "";
}

std::string_view to_string(RejectReason r) noexcept {
  return r == RejectReason::NoVehicle ? "NoVehicle" : "NoDriver";
}

Allocation allocate(const TripRequest& request, std::span<const FleetEntry> fleet, std::span<const Driver> drivers) {
  if (request.status != RequestStatus::Pending) {
    fail(ErrorCode::InvalidState, "request " + request.request_id + " is not pending");
  }

  struct Eligible {
    double distance_km;
    const Vehicle* vehicle;
  };
  std::vector<Eligible> eligible;
  for (const auto& entry : fleet) {
    const Vehicle& v = entry.vehicle;
    if (v.status != VehicleStatus::Available || v.vehicle_type != request.vehicle_type) continue;
    const double d = geo::haversine_km(entry.position(), request.pickup);
    if (d <= request.max_radius_km) eligible.push_back({d, &v});
  }
  if (eligible.empty()) return Rejected{RejectReason::NoVehicle};
  std::sort(eligible.begin(), eligible.end(), [](const Eligible& a, const Eligible& b) {
    if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
    return a.vehicle->vehicle_id < b.vehicle->vehicle_id;
  });

  std::map<std::string_view, const Driver*> first_free;  // provider -> lowest-id free driver
  for (const auto& d : drivers) {
    if (d.status != DriverStatus::Free) continue;
    auto [it, inserted] = first_free.try_emplace(d.provider_id, &d);
    if (!inserted && d.driver_id < it->second->driver_id) it->second = &d;
  }
  for (const auto& e : eligible) {
    auto it = first_free.find(e.vehicle->provider_id);
    if (it != first_free.end()) return Accepted{e.vehicle->vehicle_id, it->second->driver_id, e.distance_km};
  }
  return Rejected{RejectReason::NoDriver};
}

Trip plan_trip(std::string trip_id, const TripRequest& request, const Vehicle& vehicle, std::string driver_id) {
  geo::Polyline route({request.pickup, request.dropoff});
  const Distance planned = Distance::from_km(route.length_km());
  return Trip{
      .trip_id = std::move(trip_id),
      .request_id = request.request_id,
      .customer_id = request.customer_id,
      .provider_id = vehicle.provider_id,
      .vehicle_id = vehicle.vehicle_id,
      .driver_id = std::move(driver_id),
      .planned_route = std::move(route),
      .planned_dr = planned,
      .cost_per_km = vehicle.cost_per_km,
      .quoted_cost = trip_cost(planned, vehicle.cost_per_km),
      .actual_dr = std::nullopt,
      .final_cost = std::nullopt,
      .fuel_units = std::nullopt,
      .state = TripState::Scheduled,
      .requested_time = request.requested_time,
  };
}

std::string_view event_name(const TripEvent& e) noexcept {
  return std::visit(Overloaded{[](const StartTrip&) { return std::string_view("Start"); },
                               [](const CompleteTrip&) { return std::string_view("Complete"); },
                               [](const CancelTrip&) { return std::string_view("Cancel"); }},
                    e);
}

TransitionOutcome transition(const Trip& trip, const TripEvent& event) {
  Trip next = trip;
  return std::visit(
      Overloaded{
          [&](const StartTrip&) -> TransitionOutcome {
            if (trip.state != TripState::Scheduled) illegal(trip, event);
            next.state = TripState::InTransit;
            return {std::move(next), VehicleStatus::InTransit, DriverStatus::Assigned};
          },
          [&](const CompleteTrip& c) -> TransitionOutcome {
            if (trip.state != TripState::InTransit) illegal(trip, event);
            const Distance actual = Distance::from_km(geo::route_length_km(c.track));
            const Money cost = trip_cost(actual, trip.cost_per_km);
            next.actual_dr = actual;
            next.final_cost = cost;
            next.fuel_units = fuel_usage(cost, actual);
            next.state = TripState::Completed;
            return {std::move(next), VehicleStatus::Available, DriverStatus::Free};
          },
          [&](const CancelTrip&) -> TransitionOutcome {
            if (trip.state != TripState::Scheduled) illegal(trip, event);
            next.state = TripState::Cancelled;
            return {std::move(next), VehicleStatus::Available, DriverStatus::Free};
          },
      },
      event);
}

Schedule build_schedule(std::string owner, std::span<const ScheduleItem> trips, double speed_kmh) {
  if (!(speed_kmh > 0.0)) fail(ErrorCode::InvalidParam, "speed must be positive");
  Schedule schedule{std::move(owner), {}};
  for (const auto& t : trips) {
    if (t.dr.meters < 0) fail(ErrorCode::InvalidParam, "route length must be non-negative");
    // meters / (1000 * km/h) hours = meters * 3600 / speed milliseconds
    const auto duration = std::llround(static_cast<double>(t.dr.meters) * 3600.0 / speed_kmh);
    schedule.entries.push_back({t.trip_id, t.start_ms, t.start_ms + duration});
  }
  std::stable_sort(schedule.entries.begin(), schedule.entries.end(),
                   [](const ScheduleEntry& a, const ScheduleEntry& b) { return a.start_ms < b.start_ms; });

  // Half-open intervals: end == next start is not a conflict.
  const ScheduleEntry* latest = nullptr;
  for (const auto& e : schedule.entries) {
    if (latest && e.start_ms < latest->end_ms && e.end_ms > e.start_ms) {
      fail(ErrorCode::OverlapError, "schedule conflict between trips " + latest->trip_id + " and " + e.trip_id);
    }
    if (!latest || e.end_ms > latest->end_ms) latest = &e;
  }
  return schedule;
}

}  // namespace fleetline::dispatch
