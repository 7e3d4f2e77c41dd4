#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fleetline::qr {

using Bytes = std::vector<std::uint8_t>;

// Generator polynomial prod_{i < nsym} (x - alpha^i), highest degree first,
// leading coefficient 1.
Bytes rs_generator(int nsym);

// Remainder of data(x) * x^nsym modulo the generator. The codeword is
// data followed by the returned parity.
// Throws Error{InvalidParam} unless 1 <= nsym <= 64 and data is non-empty.
Bytes rs_generate_parity(std::span<const std::uint8_t> data, int nsym);

// Syndromes S_j = C(alpha^j), j = 0..nsym-1.
Bytes rs_syndromes(std::span<const std::uint8_t> codeword, int nsym);

// Corrects up to floor(nsym/2) byte errors at unknown positions and returns
// the data part. Throws Error{UncorrectableError} when the error locator has
// the wrong number of roots or the corrected word still has nonzero
// syndromes.
Bytes rs_decode_correct(std::span<const std::uint8_t> codeword, int nsym);

}  // namespace fleetline::qr
