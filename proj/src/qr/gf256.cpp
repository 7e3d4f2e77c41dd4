#include "fleetline/qr/gf256.hpp"

namespace fleetline::qr::gf256 {

namespace {

Tables build_tables() noexcept {
  Tables t;
  unsigned x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x);
    t.log[x] = static_cast<std::uint8_t>(i);
    x <<= 1;
    if (x & 0x100) x ^= kPrimitive;
  }
  // Doubled so that exp[log a + log b] never needs a modulo.
  for (int i = 255; i < 512; ++i) {
    t.exp[static_cast<std::size_t>(i)] = t.exp[static_cast<std::size_t>(i - 255)];
  }
  return t;
}

}  // namespace

const Tables& tables() noexcept {
  static const Tables t = build_tables();
  return t;
}

std::uint8_t eval_high_first(std::span<const std::uint8_t> poly, std::uint8_t x) noexcept {
  std::uint8_t y = 0;
  for (std::uint8_t c : poly) y = static_cast<std::uint8_t>(mul(y, x) ^ c);
  return y;
}

}  // namespace fleetline::qr::gf256
