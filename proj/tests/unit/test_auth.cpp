#include <map>
#include <set>
#include <string>

#include "doctest.h"
#include "fleetline/service/auth.hpp"
#include "test_support.hpp"

using namespace fleetline;
using namespace fleetline::service;

namespace {

// Written out by hand, independently of the implementation's switch.
const std::set<std::string> kEveryone{"Login", "Logout", "RegisterProvider", "RegisterCustomer"};

const std::map<std::string, std::set<std::string>> kAllowed{
    {"admin",
     {"ApproveProvider", "ListProviders", "ListCustomers", "ListAllVehicles", "SpamReport", "ProviderRankings",
      "SentimentReport", "SeedScenario", "GetTrip", "PostTelemetry", "VehicleTrack"}},
    {"provider",
     {"ProviderProfile", "AddVehicle", "SetVehicleStatus", "AddDriver", "ListProviderRequests", "NotifyDriver",
      "VehicleSchedule", "ProviderHistory", "CancelTrip", "GetTrip", "PostTelemetry", "VehicleTrack"}},
    {"provider-pending", {"ProviderProfile"}},
    {"customer",
     {"SearchVehicles", "CreateRequest", "Recommendations", "TripPosition", "PayTrip", "SubmitReview", "TripQr",
      "CancelTrip", "GetTrip"}},
    {"driver",
     {"DriverRequests", "AcceptRequest", "DriverSchedule", "DriverNotifications", "StartTrip", "CompleteTrip",
      "GetTrip", "PostTelemetry", "VehicleTrack"}},
};

}  // namespace

TEST_CASE("authorization matrix, every role x approval x action") {
  std::set<std::string> names;
  for (Action a : kAllActions) names.insert(std::string(to_string(a)));
  CHECK(names.size() == std::size(kAllActions));

  int cells = 0;
  for (Role role : {Role::Admin, Role::Provider, Role::Customer, Role::Driver}) {
    for (Approval approval : {Approval::Approved, Approval::Pending}) {
      std::string key(to_string(role));
      if (role == Role::Provider && approval == Approval::Pending) key = "provider-pending";
      for (Action action : kAllActions) {
        const std::string name(to_string(action));
        const bool expected = kEveryone.contains(name) || kAllowed.at(key).contains(name);
        CAPTURE(key);
        CAPTURE(name);
        CHECK(authorize(role, approval, action) == expected);
        ++cells;
      }
    }
  }
  CHECK(cells == 4 * 2 * static_cast<int>(std::size(kAllActions)));
}

TEST_CASE("public actions") {
  for (Action a : kAllActions) {
    CHECK(is_public(a) == (a == Action::Login || a == Action::RegisterProvider || a == Action::RegisterCustomer));
  }
}

TEST_CASE("role names round trip") {
  for (Role r : {Role::Admin, Role::Provider, Role::Customer, Role::Driver}) {
    CHECK(role_from_string(to_string(r)) == r);
  }
  CHECK_FALSE(role_from_string("root"));
}

TEST_CASE("password hashing") {
  const PasswordHash h = hash_password("correct horse");
  CHECK(h.iterations == kPasswordIterations);
  CHECK(verify_password("correct horse", h));
  CHECK_FALSE(verify_password("correct horsE", h));
  CHECK_FALSE(verify_password("", h));
  CHECK(hash_password("correct horse").salt_hex != h.salt_hex);
  CHECK(verify_password("correct horse", PasswordHash::from_json(h.to_json())));
}

TEST_CASE("session store") {
  SessionStore store;
  const std::string t = store.issue("C0001", Role::Customer, 1000);
  CHECK(t.size() == 64);
  CHECK(store.resolve(t, 1000 + kSessionTtlMs - 1).account_id == "C0001");
  CHECK_THROWS_CODE(store.resolve(t, 1000 + kSessionTtlMs), ErrorCode::Unauthenticated);
  const std::string u = store.issue("C0001", Role::Customer, 1000);
  CHECK(u != t);
  store.revoke(u);
  CHECK_THROWS_CODE(store.resolve(u, 1001), ErrorCode::Unauthenticated);
}
