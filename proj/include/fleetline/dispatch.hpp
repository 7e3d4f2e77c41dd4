#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fleetline/geo.hpp"

namespace fleetline::dispatch {

// Route length as fixed-point km with three decimals (whole meters).
struct Distance {
  std::int64_t meters = 0;

  // Rounds to the nearest meter.
  static Distance from_km(double km);
  double km() const noexcept { return static_cast<double>(meters) / 1000.0; }

  friend auto operator<=>(const Distance&, const Distance&) = default;
};

// Per-km vehicle rate in integer minor currency units (cents).
struct Rate {
  std::int64_t minor_per_km = 0;

  // Rounds a major-unit rate (e.g. 4.0 /km) to whole minor units.
  static Rate from_major(double per_km);
  double major() const noexcept { return static_cast<double>(minor_per_km) / 100.0; }

  friend auto operator<=>(const Rate&, const Rate&) = default;
};

// Money in thousandths of a minor unit: exactly the product of a
// three-decimal distance and an integer per-km rate.
struct Money {
  std::int64_t milli_minor = 0;

  friend auto operator<=>(const Money&, const Money&) = default;
};

// Cost times distance, in millionths of a minor unit x km.
struct FuelUnits {
  std::int64_t micro = 0;

  friend auto operator<=>(const FuelUnits&, const FuelUnits&) = default;
};

inline constexpr int kMinorPerMajor = 100;

// Exact decimal rendering of a scaled integer, trailing zeros trimmed to at
// least one fractional digit: (5000000, 5) -> "50.0".
std::string decimal_string(std::int64_t value, int scale);

// Money in major currency units, e.g. "50.0".
std::string to_major_string(Money m);
// Fuel units in major currency x km, e.g. "625.0".
std::string to_major_string(FuelUnits f);

// C_t = Dr * C_v. Throws Error{InvalidParam} on negative distance,
// non-positive rate or overflow.
Money trip_cost(Distance dr, Rate cost_per_km);

// F_u = C_t * Dr. Throws Error{InvalidParam} on negatives or overflow.
FuelUnits fuel_usage(Money trip_cost, Distance dr);

enum class VehicleStatus { Available, Reserved, InTransit, OutOfService };
enum class DriverStatus { Free, Assigned };
enum class RequestStatus { Pending, Allocated, Rejected };
enum class TripState { Scheduled, InTransit, Completed, Cancelled };

std::string_view to_string(VehicleStatus s) noexcept;
std::string_view to_string(DriverStatus s) noexcept;
std::string_view to_string(RequestStatus s) noexcept;
std::string_view to_string(TripState s) noexcept;

struct Vehicle {
  std::string vehicle_id;
  std::string provider_id;
  std::string vehicle_type;
  Rate cost_per_km;
  geo::GeoPoint home_location;
  VehicleStatus status = VehicleStatus::Available;
};

struct Driver {
  std::string driver_id;
  std::string provider_id;
  std::string name;
  DriverStatus status = DriverStatus::Free;
};

inline constexpr double kDefaultMaxRadiusKm = 50.0;

struct TripRequest {
  std::string request_id;
  std::string customer_id;
  geo::GeoPoint pickup;
  geo::GeoPoint dropoff;
  std::string vehicle_type;
  std::int64_t requested_time = 0;
  double max_radius_km = kDefaultMaxRadiusKm;
  RequestStatus status = RequestStatus::Pending;
};

struct FleetEntry {
  Vehicle vehicle;
  // Latest tracked fix; home_location is used when absent.
  std::optional<geo::GeoPoint> live_position;

  const geo::GeoPoint& position() const noexcept { return live_position ? *live_position : vehicle.home_location; }
};

enum class RejectReason { NoVehicle, NoDriver };

std::string_view to_string(RejectReason r) noexcept;

struct Accepted {
  std::string vehicle_id;
  std::string driver_id;
  double distance_km = 0.0;
};

struct Rejected {
  RejectReason reason;
};

using Allocation = std::variant<Accepted, Rejected>;

// Nearest Available vehicle of the requested type within the request radius
// (ties by vehicle id) whose provider has a Free driver; the driver is the
// provider's lowest-id Free driver. Rejected(NoVehicle) when no vehicle is
// eligible, Rejected(NoDriver) when eligible vehicles exist but none of
// their providers has a free driver. Throws Error{InvalidState} unless the
// request is Pending.
Allocation allocate(const TripRequest& request, std::span<const FleetEntry> fleet,
                    std::span<const Driver> drivers);

struct Trip {
  std::string trip_id;
  std::string request_id;
  std::string customer_id;
  std::string provider_id;
  std::string vehicle_id;
  std::string driver_id;
  geo::Polyline planned_route;
  Distance planned_dr;
  Rate cost_per_km;
  Money quoted_cost;
  std::optional<Distance> actual_dr;
  std::optional<Money> final_cost;
  std::optional<FuelUnits> fuel_units;
  TripState state = TripState::Scheduled;
  std::int64_t requested_time = 0;
};

// A scheduled trip on the straight pickup -> dropoff route, quoted with the
// vehicle's rate.
Trip plan_trip(std::string trip_id, const TripRequest& request, const Vehicle& vehicle, std::string driver_id);

struct StartTrip {};
struct CompleteTrip {
  std::vector<geo::TrackPoint> track;
};
struct CancelTrip {};

using TripEvent = std::variant<StartTrip, CompleteTrip, CancelTrip>;

std::string_view event_name(const TripEvent& e) noexcept;

struct TransitionOutcome {
  Trip trip;
  VehicleStatus vehicle_status;
  DriverStatus driver_status;
};

// Scheduled -Start-> InTransit, InTransit -Complete-> Completed,
// Scheduled -Cancel-> Cancelled. Completion prices the traveled track.
// Throws Error{IllegalTransition} for any other pair.
TransitionOutcome transition(const Trip& trip, const TripEvent& event);

inline constexpr double kAssumedSpeedKmh = 40.0;

struct ScheduleItem {
  std::string trip_id;
  std::int64_t start_ms = 0;
  Distance dr;
};

struct ScheduleEntry {
  std::string trip_id;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;  // exclusive

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct Schedule {
  std::string owner;
  std::vector<ScheduleEntry> entries;
};

// Entries [start, start + Dr / speed) sorted by start. Throws
// Error{OverlapError} naming the first conflicting pair.
Schedule build_schedule(std::string owner, std::span<const ScheduleItem> trips,
                        double speed_kmh = kAssumedSpeedKmh);

}  // namespace fleetline::dispatch
