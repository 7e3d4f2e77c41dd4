#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fleetline/qr/gf256.hpp"
#include "fleetline/qr/reed_solomon.hpp"
#include "test_support.hpp"

using namespace fleetline;
using namespace fleetline::qr;

namespace {

// Table-free GF(256) arithmetic: shift-and-add multiply reduced by 0x11D.
std::uint8_t slow_mul(std::uint8_t a, std::uint8_t b) {
  unsigned x = a;
  unsigned y = b;
  unsigned r = 0;
  while (y) {
    if (y & 1U) r ^= x;
    y >>= 1;
    x <<= 1;
    if (x & 0x100U) x ^= 0x11DU;
  }
  return static_cast<std::uint8_t>(r);
}

std::uint8_t slow_pow_alpha(int e) {
  std::uint8_t r = 1;
  for (int i = 0; i < e; ++i) r = slow_mul(r, 2);
  return r;
}

// Horner evaluation, highest degree first.
std::uint8_t slow_eval(const Bytes& poly, std::uint8_t x) {
  std::uint8_t y = 0;
  for (std::uint8_t c : poly) y = static_cast<std::uint8_t>(slow_mul(y, x) ^ c);
  return y;
}

bool is_codeword(const Bytes& word, int nsym) {
  for (int j = 0; j < nsym; ++j) {
    if (slow_eval(word, slow_pow_alpha(j)) != 0) return false;
  }
  return true;
}

Bytes codeword_of(const Bytes& data, int nsym) {
  Bytes word = data;
  const Bytes parity = rs_generate_parity(data, nsym);
  word.insert(word.end(), parity.begin(), parity.end());
  return word;
}

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

int hamming(const Bytes& a, const Bytes& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

}  // namespace

TEST_CASE("GF(256) tables") {
  CHECK(gf256::exp(255) == 1);
  CHECK(gf256::exp(0) == 1);
  for (int v = 1; v < 256; ++v) {
    const auto b = static_cast<std::uint8_t>(v);
    CHECK(gf256::exp(gf256::log(b)) == b);
    CHECK(gf256::mul(b, gf256::inverse(b)) == 1);
  }
  for (int e = 0; e < 255; ++e) CHECK(gf256::log(gf256::exp(e)) == e);

  std::mt19937 rng(3);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 5000; ++i) {
    const auto a = static_cast<std::uint8_t>(byte(rng));
    const auto b = static_cast<std::uint8_t>(byte(rng));
    const auto c = static_cast<std::uint8_t>(byte(rng));
    CHECK(gf256::mul(a, b) == slow_mul(a, b));
    CHECK(gf256::mul(a, b) == gf256::mul(b, a));
    CHECK(gf256::mul(gf256::mul(a, b), c) == gf256::mul(a, gf256::mul(b, c)));
  }
}

TEST_CASE("rs_generate_parity") {
  SUBCASE("zero data has zero parity") {
    for (std::size_t len : {1U, 5U, 30U}) {
      CHECK(rs_generate_parity(Bytes(len, 0), 10) == Bytes(10, 0));
    }
  }
  SUBCASE("hello codeword vanishes at every generator root") {
    const Bytes word = codeword_of(bytes_of("hello"), 4);
    CHECK(word.size() == 9);
    for (int j = 0; j < 4; ++j) CHECK(slow_eval(word, slow_pow_alpha(j)) == 0);
  }
  SUBCASE("invalid parameters") {
    CHECK_THROWS_CODE(rs_generate_parity(bytes_of("hello"), 0), ErrorCode::InvalidParam);
    CHECK_THROWS_CODE(rs_generate_parity(bytes_of("hello"), 65), ErrorCode::InvalidParam);
    CHECK_THROWS_CODE(rs_generate_parity(Bytes{}, 4), ErrorCode::InvalidParam);
  }
  SUBCASE("generator polynomial roots") {
    const Bytes g = rs_generator(7);
    CHECK(g.size() == 8);
    CHECK(g.front() == 1);
    for (int j = 0; j < 7; ++j) CHECK(slow_eval(g, slow_pow_alpha(j)) == 0);
    CHECK(slow_eval(g, slow_pow_alpha(7)) != 0);
  }
}

TEST_CASE("rs_decode_correct") {
  const Bytes data = bytes_of("hello");
  const Bytes word = codeword_of(data, 4);

  SUBCASE("clean codeword") { CHECK(rs_decode_correct(word, 4) == data); }

  SUBCASE("every pair of corrupted positions is corrected") {
    for (std::size_t i = 0; i < word.size(); ++i) {
      for (std::size_t j = i + 1; j < word.size(); ++j) {
        Bytes bad = word;
        bad[i] ^= 0x5A;
        bad[j] ^= 0xFF;
        const Bytes fixed = rs_decode_correct(bad, 4);
        CHECK(fixed == data);
        CHECK(codeword_of(fixed, 4) == word);
      }
    }
  }

  SUBCASE("three errors never yield a silent non-codeword") {
    // Three errors exceed the guaranteed radius. The decoder either reports
    // failure or lands on a different valid codeword within distance 2 of
    // the received word; it never returns the original data.
    int failures = 0;
    int miscorrections = 0;
    for (std::size_t i = 0; i < word.size(); ++i) {
      for (std::size_t j = i + 1; j < word.size(); ++j) {
        for (std::size_t k = j + 1; k < word.size(); ++k) {
          for (std::uint8_t flip : {std::uint8_t{0x01}, std::uint8_t{0xA7}, std::uint8_t{0xFF}}) {
            Bytes bad = word;
            bad[i] ^= flip;
            bad[j] ^= flip;
            bad[k] ^= static_cast<std::uint8_t>(flip ^ 0x30);
            try {
              const Bytes out = rs_decode_correct(bad, 4);
              const Bytes reencoded = codeword_of(out, 4);
              CHECK(is_codeword(reencoded, 4));
              CHECK(hamming(reencoded, bad) <= 2);
              CHECK(out != data);
              ++miscorrections;
            } catch (const Error& e) {
              CHECK(e.code() == ErrorCode::UncorrectableError);
              ++failures;
            }
          }
        }
      }
    }
    CHECK(failures > 0);
    MESSAGE("3-error patterns: " << failures << " detected, " << miscorrections
                                 << " decoded to another codeword");
  }

  SUBCASE("random data, nsym 4..16, up to floor(nsym/2) errors") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int nsym = 4; nsym <= 16; ++nsym) {
      for (int trial = 0; trial < 60; ++trial) {
        Bytes msg(static_cast<std::size_t>(5 + trial % 40));
        for (auto& b : msg) b = static_cast<std::uint8_t>(byte(rng));
        const Bytes clean = codeword_of(msg, nsym);
        Bytes bad = clean;
        std::vector<std::size_t> positions(clean.size());
        for (std::size_t p = 0; p < positions.size(); ++p) positions[p] = p;
        std::shuffle(positions.begin(), positions.end(), rng);
        const int errors = trial % (nsym / 2 + 1);
        for (int e = 0; e < errors; ++e) {
          bad[positions[static_cast<std::size_t>(e)]] ^= static_cast<std::uint8_t>(1 + byte(rng) % 255);
        }
        const Bytes fixed = rs_decode_correct(bad, nsym);
        CHECK(fixed == msg);
        CHECK(is_codeword(codeword_of(fixed, nsym), nsym));
      }
    }
  }

  SUBCASE("codeword must be longer than nsym") {
    CHECK_THROWS_CODE(rs_decode_correct(Bytes(4, 0), 4), ErrorCode::InvalidParam);
  }
}
