#pragma once

#include <string>
#include <string_view>

#include "fleetline/qr/qr_code.hpp"

namespace fleetline::qr {

inline constexpr int kQuietZone = 4;

// Plain PBM (P1): one '0'/'1' character per module, dark = 1, a 4-module
// light quiet zone on every side.
std::string to_pbm(const QrMatrix& matrix);

// Accepts P1 images with or without the quiet zone; whitespace between
// digits is optional. Throws Error{FormatError} on malformed input or a
// size that is not a version 1..4 symbol.
QrMatrix from_pbm(std::string_view text);

}  // namespace fleetline::qr
