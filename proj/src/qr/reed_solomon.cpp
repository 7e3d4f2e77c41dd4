#include "fleetline/qr/reed_solomon.hpp"

#include <algorithm>
#include <string>

#include "fleetline/error.hpp"
#include "fleetline/qr/gf256.hpp"

namespace fleetline::qr {

namespace {

using gf256::mul;

void check_nsym(int nsym) {
  if (nsym < 1 || nsym > 64) {
    fail(ErrorCode::InvalidParam, "nsym must be in 1..64, got " + std::to_string(nsym));
  }
}

// Polynomials below this point are stored lowest degree first.
std::uint8_t eval_low_first(std::span<const std::uint8_t> poly, std::uint8_t x) noexcept {
  std::uint8_t y = 0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) {
    y = static_cast<std::uint8_t>(mul(y, x) ^ *it);
  }
  return y;
}

// Berlekamp-Massey over the syndrome sequence. Returns the error locator
// Lambda(x) with Lambda_0 = 1 and sets `degree` to the register length L.
Bytes berlekamp_massey(std::span<const std::uint8_t> synd, int& degree) {
  Bytes lambda{1};
  Bytes prev{1};
  int length = 0;
  int shift = 1;
  std::uint8_t prev_discrepancy = 1;

  for (std::size_t n = 0; n < synd.size(); ++n) {
    std::uint8_t d = synd[n];
    for (int i = 1; i <= length && i < static_cast<int>(lambda.size()); ++i) {
      d ^= mul(lambda[static_cast<std::size_t>(i)], synd[n - static_cast<std::size_t>(i)]);
    }
    if (d == 0) {
      ++shift;
      continue;
    }
    const std::uint8_t coef = gf256::div(d, prev_discrepancy);
    Bytes next = lambda;
    if (next.size() < prev.size() + static_cast<std::size_t>(shift)) {
      next.resize(prev.size() + static_cast<std::size_t>(shift), 0);
    }
    for (std::size_t i = 0; i < prev.size(); ++i) {
      next[i + static_cast<std::size_t>(shift)] ^= mul(coef, prev[i]);
    }
    if (2 * length <= static_cast<int>(n)) {
      prev = lambda;
      length = static_cast<int>(n) + 1 - length;
      prev_discrepancy = d;
      shift = 1;
    } else {
      ++shift;
    }
    lambda = std::move(next);
  }
  while (lambda.size() > 1 && lambda.back() == 0) lambda.pop_back();
  degree = length;
  return lambda;
}

[[noreturn]] void uncorrectable(const std::string& why) {
  fail(ErrorCode::UncorrectableError, "Reed-Solomon decode failed: " + why);
}

}  // namespace

Bytes rs_generator(int nsym) {
  check_nsym(nsym);
  Bytes g{1};
  for (int i = 0; i < nsym; ++i) {
    // g(x) *= (x - alpha^i), highest degree first
    const std::uint8_t root = gf256::exp(i);
    Bytes next(g.size() + 1, 0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      next[j] ^= g[j];
      next[j + 1] ^= mul(g[j], root);
    }
    g = std::move(next);
  }
  return g;
}

Bytes rs_generate_parity(std::span<const std::uint8_t> data, int nsym) {
  check_nsym(nsym);
  if (data.empty()) fail(ErrorCode::InvalidParam, "data must be non-empty");
  const Bytes gen = rs_generator(nsym);

  // Shift-register long division; parity holds the running remainder.
  Bytes parity(static_cast<std::size_t>(nsym), 0);
  for (std::uint8_t byte : data) {
    const std::uint8_t factor = byte ^ parity.front();
    std::rotate(parity.begin(), parity.begin() + 1, parity.end());
    parity.back() = 0;
    for (std::size_t j = 0; j < parity.size(); ++j) {
      parity[j] ^= mul(gen[j + 1], factor);
    }
  }
  return parity;
}

Bytes rs_syndromes(std::span<const std::uint8_t> codeword, int nsym) {
  Bytes synd(static_cast<std::size_t>(nsym));
  for (int j = 0; j < nsym; ++j) {
    synd[static_cast<std::size_t>(j)] = gf256::eval_high_first(codeword, gf256::exp(j));
  }
  return synd;
}

Bytes rs_decode_correct(std::span<const std::uint8_t> codeword, int nsym) {
  check_nsym(nsym);
  if (codeword.size() <= static_cast<std::size_t>(nsym)) {
    fail(ErrorCode::InvalidParam, "codeword must be longer than nsym");
  }
  if (codeword.size() > 255) fail(ErrorCode::InvalidParam, "codeword longer than 255 bytes");

  const std::size_t n = codeword.size();
  const std::size_t data_len = n - static_cast<std::size_t>(nsym);
  Bytes word(codeword.begin(), codeword.end());

  const Bytes synd = rs_syndromes(word, nsym);
  if (std::all_of(synd.begin(), synd.end(), [](std::uint8_t s) { return s == 0; })) {
    return Bytes(word.begin(), word.begin() + static_cast<std::ptrdiff_t>(data_len));
  }

  int errors = 0;
  const Bytes lambda = berlekamp_massey(synd, errors);
  if (2 * errors > nsym || static_cast<int>(lambda.size()) - 1 != errors) {
    uncorrectable("too many errors");
  }

  // Chien search: byte k carries x^(n-1-k); an error there has locator
  // X = alpha^(n-1-k) and Lambda(X^-1) = 0.
  std::vector<std::size_t> exponents;
  for (std::size_t e = 0; e < n; ++e) {
    if (eval_low_first(lambda, gf256::exp(-static_cast<int>(e))) == 0) exponents.push_back(e);
  }
  if (static_cast<int>(exponents.size()) != errors) uncorrectable("locator roots mismatch");

  // Forney with first consecutive root alpha^0: e = X * Omega(X^-1) / Lambda'(X^-1).
  Bytes omega(static_cast<std::size_t>(nsym), 0);
  for (std::size_t i = 0; i < synd.size(); ++i) {
    for (std::size_t j = 0; j < lambda.size() && i + j < omega.size(); ++j) {
      omega[i + j] ^= mul(synd[i], lambda[j]);
    }
  }
  Bytes derivative(lambda.size() > 1 ? lambda.size() - 1 : 1, 0);
  for (std::size_t i = 1; i < lambda.size(); i += 2) derivative[i - 1] = lambda[i];

  for (std::size_t e : exponents) {
    const std::uint8_t x = gf256::exp(static_cast<int>(e));
    const std::uint8_t x_inv = gf256::inverse(x);
    const std::uint8_t denom = eval_low_first(derivative, x_inv);
    if (denom == 0) uncorrectable("zero locator derivative");
    const std::uint8_t magnitude = mul(x, gf256::div(eval_low_first(omega, x_inv), denom));
    word[n - 1 - e] ^= magnitude;
  }

  const Bytes residual = rs_syndromes(word, nsym);
  if (!std::all_of(residual.begin(), residual.end(), [](std::uint8_t s) { return s == 0; })) {
    uncorrectable("residual syndromes nonzero");
  }
  return Bytes(word.begin(), word.begin() + static_cast<std::ptrdiff_t>(data_len));
}

}  // namespace fleetline::qr
