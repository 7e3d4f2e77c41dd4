#include "fleetline/qr/envelope.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <memory>
#include <string>

#include "fleetline/error.hpp"

namespace fleetline::qr {

namespace {

using Key = std::array<std::uint8_t, 32>;

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const noexcept { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

// Wipes the derived key on scope exit.
class ScopedKey {
 public:
  ScopedKey(std::string_view passphrase, std::span<const std::uint8_t> salt) {
    if (PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                          static_cast<int>(salt.size()), kKdfIterations, EVP_sha256(),
                          static_cast<int>(key_.size()), key_.data()) != 1) {
      fail(ErrorCode::InvalidParam, "key derivation failed");
    }
  }
  ~ScopedKey() { OPENSSL_cleanse(key_.data(), key_.size()); }
  ScopedKey(const ScopedKey&) = delete;
  ScopedKey& operator=(const ScopedKey&) = delete;

  const std::uint8_t* data() const noexcept { return key_.data(); }

 private:
  Key key_{};
};

Bytes header_bytes(const SealedEnvelope& env) {
  Bytes out;
  out.reserve(kEnvelopeHeaderSize);
  out.push_back(env.version);
  out.insert(out.end(), env.salt.begin(), env.salt.end());
  out.insert(out.end(), env.nonce.begin(), env.nonce.end());
  const auto len = static_cast<std::uint32_t>(env.ciphertext.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(len >> shift));
  return out;
}

CipherCtx make_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) fail(ErrorCode::IoError, "cipher context allocation failed");
  return ctx;
}

}  // namespace

Bytes SealedEnvelope::to_bytes() const {
  Bytes out = header_bytes(*this);
  out.insert(out.end(), ciphertext.begin(), ciphertext.end());
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

SealedEnvelope SealedEnvelope::from_bytes(std::span<const std::uint8_t> wire) {
  if (wire.size() < kEnvelopeOverhead) fail(ErrorCode::FormatError, "envelope truncated");
  SealedEnvelope env;
  env.version = wire[0];
  if (env.version != kEnvelopeVersion) {
    fail(ErrorCode::FormatError, "unknown envelope version " + std::to_string(env.version));
  }
  std::size_t pos = 1;
  std::copy_n(wire.begin() + static_cast<std::ptrdiff_t>(pos), kSaltSize, env.salt.begin());
  pos += kSaltSize;
  std::copy_n(wire.begin() + static_cast<std::ptrdiff_t>(pos), kNonceSize, env.nonce.begin());
  pos += kNonceSize;
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | wire[pos++];
  if (wire.size() - kEnvelopeOverhead != len) {
    fail(ErrorCode::FormatError, "envelope length field does not match its size");
  }
  env.ciphertext.assign(wire.begin() + static_cast<std::ptrdiff_t>(pos),
                        wire.begin() + static_cast<std::ptrdiff_t>(pos + len));
  pos += len;
  std::copy_n(wire.begin() + static_cast<std::ptrdiff_t>(pos), kTagSize, env.tag.begin());
  return env;
}

SealedEnvelope seal_payload(std::span<const std::uint8_t> plaintext, std::string_view passphrase) {
  if (passphrase.empty()) fail(ErrorCode::InvalidParam, "passphrase must not be empty");
  SealedEnvelope env;
  if (RAND_bytes(env.salt.data(), static_cast<int>(env.salt.size())) != 1 ||
      RAND_bytes(env.nonce.data(), static_cast<int>(env.nonce.size())) != 1) {
    fail(ErrorCode::IoError, "random generator failure");
  }
  env.ciphertext.resize(plaintext.size());
  const ScopedKey key(passphrase, env.salt);
  const Bytes aad = header_bytes(env);

  CipherCtx ctx = make_ctx();
  int len = 0;
  bool ok = EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) == 1 &&
            EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), env.nonce.data()) == 1 &&
            EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
  if (ok && !plaintext.empty()) {
    ok = EVP_EncryptUpdate(ctx.get(), env.ciphertext.data(), &len, plaintext.data(),
                           static_cast<int>(plaintext.size())) == 1;
  }
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), env.ciphertext.data() + env.ciphertext.size(), &len) == 1 &&
       EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize, env.tag.data()) == 1;
  if (!ok) fail(ErrorCode::IoError, "encryption failed");
  return env;
}

Bytes open_payload(const SealedEnvelope& envelope, std::string_view passphrase) {
  if (envelope.version != kEnvelopeVersion) fail(ErrorCode::FormatError, "unknown envelope version");
  const ScopedKey key(passphrase, envelope.salt);
  const Bytes aad = header_bytes(envelope);
  Bytes plaintext(envelope.ciphertext.size());
  auto tag = envelope.tag;

  CipherCtx ctx = make_ctx();
  int len = 0;
  bool ok = EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) == 1 &&
            EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), envelope.nonce.data()) == 1 &&
            EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1;
  if (ok && !plaintext.empty()) {
    ok = EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, envelope.ciphertext.data(),
                           static_cast<int>(envelope.ciphertext.size())) == 1;
  }
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()) == 1 &&
       EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + plaintext.size(), &len) == 1;
  if (!ok) {
    OPENSSL_cleanse(plaintext.data(), plaintext.size());
    fail(ErrorCode::AuthFailure, "envelope authentication failed");
  }
  return plaintext;
}

Bytes open_payload(std::span<const std::uint8_t> wire, std::string_view passphrase) {
  return open_payload(SealedEnvelope::from_bytes(wire), passphrase);
}

}  // namespace fleetline::qr
