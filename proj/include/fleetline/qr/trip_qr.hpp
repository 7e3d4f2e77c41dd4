#pragma once

#include <span>
#include <string_view>

#include "fleetline/qr/qr_code.hpp"

namespace fleetline::qr {

// Seals `serialized` under the passphrase and encodes the envelope bytes in
// the smallest version (1..4) that holds them at the requested EC level.
// Throws Error{CapacityError} when even version 4 is too small.
QrMatrix make_trip_qr(std::span<const std::uint8_t> serialized, std::string_view passphrase,
                      EcLevel ec);

// Inverse of make_trip_qr. Propagates qr_decode errors, FormatError for a
// malformed envelope and AuthFailure for a wrong passphrase.
Bytes read_trip_qr(const QrMatrix& matrix, std::string_view passphrase);

// Smallest version whose byte capacity at `ec` is at least `size`, or 0.
int smallest_version_for(std::size_t size, EcLevel ec);

}  // namespace fleetline::qr
