#pragma once

#include <array>
#include <cstdint>
#include <span>

// Arithmetic in GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1
// (0x11D) and generator alpha = 2, the field used by QR symbols.
namespace fleetline::qr::gf256 {

inline constexpr unsigned kPrimitive = 0x11D;

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};
};

const Tables& tables() noexcept;

inline std::uint8_t exp(int power) noexcept {
  int p = power % 255;
  if (p < 0) p += 255;
  return tables().exp[static_cast<std::size_t>(p)];
}

// log(0) is undefined; callers must not pass 0.
inline int log(std::uint8_t value) noexcept { return tables().log[value]; }

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) noexcept {
  if (a == 0 || b == 0) return 0;
  const auto& t = tables();
  return t.exp[static_cast<std::size_t>(t.log[a] + t.log[b])];
}

// b must be nonzero.
inline std::uint8_t div(std::uint8_t a, std::uint8_t b) noexcept {
  if (a == 0) return 0;
  const auto& t = tables();
  return t.exp[static_cast<std::size_t>((t.log[a] + 255 - t.log[b]) % 255)];
}

inline std::uint8_t inverse(std::uint8_t a) noexcept { return div(1, a); }

// Evaluates a polynomial whose coefficients run from the highest degree down.
std::uint8_t eval_high_first(std::span<const std::uint8_t> poly, std::uint8_t x) noexcept;

}  // namespace fleetline::qr::gf256
