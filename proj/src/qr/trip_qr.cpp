#include "fleetline/qr/trip_qr.hpp"

#include <string>

#include "fleetline/error.hpp"
#include "fleetline/qr/envelope.hpp"

namespace fleetline::qr {

int smallest_version_for(std::size_t size, EcLevel ec) {
  for (int v = kMinVersion; v <= kMaxVersion; ++v) {
    if (byte_capacity(v, ec) >= size) return v;
  }
  return 0;
}

QrMatrix make_trip_qr(std::span<const std::uint8_t> serialized, std::string_view passphrase,
                      EcLevel ec) {
  // Size is known before sealing; fail early without spending a key derivation.
  const std::size_t framed = serialized.size() + kEnvelopeOverhead;
  const int version = smallest_version_for(framed, ec);
  if (version == 0) {
    fail(ErrorCode::CapacityError,
         "sealed payload of " + std::to_string(framed) + " bytes does not fit version 4-" +
             ec_level_name(ec) + " (" + std::to_string(byte_capacity(kMaxVersion, ec)) + " bytes)");
  }
  const Bytes wire = seal_payload(serialized, passphrase).to_bytes();
  return qr_encode(wire, version, ec);
}

Bytes read_trip_qr(const QrMatrix& matrix, std::string_view passphrase) {
  const Bytes wire = qr_decode(matrix);
  return open_payload(std::span<const std::uint8_t>(wire), passphrase);
}

}  // namespace fleetline::qr
