#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fleetline/geo.hpp"
#include "json.hpp"

namespace fleetline::service {

// One {"kind": ..., "payload": {...}} line of a scenario file. Kinds and
// payload fields follow the event log, with plaintext "password" fields:
//   scenario            {name}
//   provider.registered {providerId, login, name, password, approved?}
//   customer.registered {customerId, login, name, password}
//   driver.added        {driverId, providerId, name, login, password}
//   vehicle.added       {vehicleId, providerId, vehicleType, costPerKmMinor, home{lat,lon}}
//   rating.set          {customerId, vehicleId, rating}
//   review.submitted    {reviewId, customerId, providerId, text, stars, createdAt}
//   path                {name, points[{lat,lon}...]}   (simulator input only)
struct ScenarioRecord {
  std::size_t line = 0;
  std::string kind;
  nlohmann::json payload;
};

struct Scenario {
  std::optional<std::string> name;
  std::vector<ScenarioRecord> records;  // everything except scenario/path lines
  std::map<std::string, geo::Polyline> paths;
};

// Syntax-level parse; blank lines are skipped. Entity-level checks happen
// when seeding. Throws Error{ValidationError} "line N[, field F]: ...".
Scenario parse_scenario(std::istream& in);

[[noreturn]] void scenario_error(std::size_t line, const std::string& field, const std::string& message);

}  // namespace fleetline::service
