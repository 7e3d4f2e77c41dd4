#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fleetline/dispatch.hpp"
#include "fleetline/qr/reed_solomon.hpp"
#include "json.hpp"

namespace fleetline::service {

// Entity ids are a fixed prefix plus a zero-padded (at least 4 digit)
// positive number: "T0001", "C0042", "V12345".
std::string format_id(std::string_view prefix, std::uint64_t n);
// The number when `id` is exactly format_id(prefix, n) for some n > 0.
std::optional<std::uint64_t> parse_id(std::string_view id, std::string_view prefix);

// The record a trip QR carries. Coordinates are kept in micro-degrees.
struct TripSummary {
  std::string trip_id;
  std::string customer_id;
  std::string provider_id;
  std::string vehicle_id;
  std::int32_t pickup_lat_e6 = 0;
  std::int32_t pickup_lon_e6 = 0;
  std::int32_t dropoff_lat_e6 = 0;
  std::int32_t dropoff_lon_e6 = 0;
  dispatch::Money cost;

  friend bool operator==(const TripSummary&, const TripSummary&) = default;
};

// Final cost once completed, the quote before that.
TripSummary summarize(const dispatch::Trip& trip);

// Key-sorted JSON: tripId, customerId, providerId, vehicleId,
// pickup{lat,lon}, dropoff{lat,lon}, cost (exact decimal string).
nlohmann::json to_json(const TripSummary& s);
std::string canonical_json(const TripSummary& s);

// Byte form sized for a version 1-4 symbol after sealing:
//   0x01, varint id numbers (trip, customer, provider, vehicle),
//   pickup lat/lon as big-endian int32, dropoff as zigzag varint deltas,
//   varint cost in thousandths of a minor unit.
// Throws Error{InvalidParam} when an id is not in canonical form.
qr::Bytes encode_compact(const TripSummary& s);
// Throws Error{FormatError} on malformed input.
TripSummary decode_compact(std::span<const std::uint8_t> bytes);

}  // namespace fleetline::service
