#pragma once

#include <functional>
#include <optional>

#include "doctest.h"
#include "fleetline/error.hpp"

namespace fleetline::testing {

// Code of the fleetline::Error thrown by fn, or nullopt if none was thrown.
inline std::optional<ErrorCode> thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace fleetline::testing

#define CHECK_THROWS_CODE(expr, expected_code)                                       \
  CHECK(::fleetline::testing::thrown_code([&] { (void)(expr); }) ==                  \
        std::optional<::fleetline::ErrorCode>(expected_code))
