#include "fleetline/service/trip_summary.hpp"

#include <charconv>
#include <cmath>

#include "fleetline/error.hpp"

namespace fleetline::service {

namespace {

constexpr std::uint8_t kCompactFormat = 0x01;

std::int32_t to_e6(double degrees) { return static_cast<std::int32_t>(std::llround(degrees * 1e6)); }

void put_varint(qr::Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t zigzag(std::int64_t v) { return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63); }
std::int64_t unzigzag(std::uint64_t v) { return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::uint8_t byte() {
    if (pos_ >= bytes_.size()) fail(ErrorCode::FormatError, "trip summary truncated");
    return bytes_[pos_++];
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = byte();
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) return v;
    }
    fail(ErrorCode::FormatError, "trip summary varint too long");
  }
  std::int32_t be32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | byte();
    return static_cast<std::int32_t>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::int32_t checked_e6(std::int64_t v, std::int64_t limit) {
  if (v < -limit || v > limit) fail(ErrorCode::FormatError, "trip summary coordinate out of range");
  return static_cast<std::int32_t>(v);
}

}  // namespace

std::string format_id(std::string_view prefix, std::uint64_t n) {
  std::string digits = std::to_string(n);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return std::string(prefix) + digits;
}

std::optional<std::uint64_t> parse_id(std::string_view id, std::string_view prefix) {
  if (!id.starts_with(prefix)) return std::nullopt;
  const auto digits = id.substr(prefix.size());
  std::uint64_t n = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc{} || end != digits.data() + digits.size() || n == 0) return std::nullopt;
  if (format_id(prefix, n) != id) return std::nullopt;
  return n;
}

TripSummary summarize(const dispatch::Trip& trip) {
  const auto& a = trip.planned_route.front();
  const auto& b = trip.planned_route.back();
  return TripSummary{trip.trip_id,   trip.customer_id, trip.provider_id, trip.vehicle_id,
                     to_e6(a.lat()), to_e6(a.lon()),   to_e6(b.lat()),   to_e6(b.lon()),
                     trip.final_cost.value_or(trip.quoted_cost)};
}

nlohmann::json to_json(const TripSummary& s) {
  auto point = [](std::int32_t lat, std::int32_t lon) {
    return nlohmann::json{{"lat", lat / 1e6}, {"lon", lon / 1e6}};
  };
  return {{"tripId", s.trip_id},
          {"customerId", s.customer_id},
          {"providerId", s.provider_id},
          {"vehicleId", s.vehicle_id},
          {"pickup", point(s.pickup_lat_e6, s.pickup_lon_e6)},
          {"dropoff", point(s.dropoff_lat_e6, s.dropoff_lon_e6)},
          {"cost", dispatch::to_major_string(s.cost)}};
}

std::string canonical_json(const TripSummary& s) { return to_json(s).dump(); }

qr::Bytes encode_compact(const TripSummary& s) {
  qr::Bytes out{kCompactFormat};
  const std::pair<const std::string*, std::string_view> ids[] = {
      {&s.trip_id, "T"}, {&s.customer_id, "C"}, {&s.provider_id, "P"}, {&s.vehicle_id, "V"}};
  for (const auto& [id, prefix] : ids) {
    const auto n = parse_id(*id, prefix);
    if (!n) fail(ErrorCode::InvalidParam, "id '" + *id + "' is not in canonical form");
    put_varint(out, *n);
  }
  for (std::int32_t v : {s.pickup_lat_e6, s.pickup_lon_e6}) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(u >> shift));
  }
  put_varint(out, zigzag(static_cast<std::int64_t>(s.dropoff_lat_e6) - s.pickup_lat_e6));
  put_varint(out, zigzag(static_cast<std::int64_t>(s.dropoff_lon_e6) - s.pickup_lon_e6));
  if (s.cost.milli_minor < 0) fail(ErrorCode::InvalidParam, "negative trip cost");
  put_varint(out, static_cast<std::uint64_t>(s.cost.milli_minor));
  return out;
}

TripSummary decode_compact(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.byte() != kCompactFormat) fail(ErrorCode::FormatError, "unknown trip summary format");
  TripSummary s;
  auto id = [&](std::string_view prefix) {
    const auto n = r.varint();
    if (n == 0) fail(ErrorCode::FormatError, "zero entity id");
    return format_id(prefix, n);
  };
  s.trip_id = id("T");
  s.customer_id = id("C");
  s.provider_id = id("P");
  s.vehicle_id = id("V");
  s.pickup_lat_e6 = checked_e6(r.be32(), 90'000'000);
  s.pickup_lon_e6 = checked_e6(r.be32(), 180'000'000);
  s.dropoff_lat_e6 = checked_e6(s.pickup_lat_e6 + unzigzag(r.varint()), 90'000'000);
  s.dropoff_lon_e6 = checked_e6(s.pickup_lon_e6 + unzigzag(r.varint()), 180'000'000);
  const auto cost = r.varint();
  if (cost > static_cast<std::uint64_t>(INT64_MAX)) fail(ErrorCode::FormatError, "trip cost out of range");
  s.cost = dispatch::Money{static_cast<std::int64_t>(cost)};
  if (!r.done()) fail(ErrorCode::FormatError, "trailing bytes after trip summary");
  return s;
}

}  // namespace fleetline::service
