#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "fleetline/qr/reed_solomon.hpp"

namespace fleetline::qr {

// Key derivation and cipher parameters are fixed and public so that any
// holder of the passphrase can open an envelope:
//   key    = PBKDF2-HMAC-SHA256(passphrase, salt, 1000 iterations, 32 bytes)
//   cipher = AES-256-GCM, 12-byte nonce, 16-byte tag,
//            associated data = the 33 header bytes (version..length).
inline constexpr std::uint8_t kEnvelopeVersion = 0x01;
inline constexpr int kKdfIterations = 1000;
inline constexpr std::size_t kSaltSize = 16;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kEnvelopeHeaderSize = 1 + kSaltSize + kNonceSize + 4;
inline constexpr std::size_t kEnvelopeOverhead = kEnvelopeHeaderSize + kTagSize;

struct SealedEnvelope {
  std::uint8_t version = kEnvelopeVersion;
  std::array<std::uint8_t, kSaltSize> salt{};
  std::array<std::uint8_t, kNonceSize> nonce{};
  Bytes ciphertext;
  std::array<std::uint8_t, kTagSize> tag{};

  // Wire form: [version:1][salt:16][nonce:12][len:4 BE][ciphertext:len][tag:16]
  Bytes to_bytes() const;

  // Throws Error{FormatError} on truncation, trailing bytes or an unknown
  // version byte.
  static SealedEnvelope from_bytes(std::span<const std::uint8_t> wire);

  friend bool operator==(const SealedEnvelope&, const SealedEnvelope&) = default;
};

// Fresh random salt and nonce on every call. Throws Error{InvalidParam} on
// an empty passphrase.
SealedEnvelope seal_payload(std::span<const std::uint8_t> plaintext, std::string_view passphrase);

// Throws Error{AuthFailure} for a wrong passphrase or any tampering; the two
// cases are not distinguished.
Bytes open_payload(const SealedEnvelope& envelope, std::string_view passphrase);

// Parses the wire form first, so truncation surfaces as FormatError.
Bytes open_payload(std::span<const std::uint8_t> wire, std::string_view passphrase);

}  // namespace fleetline::qr
