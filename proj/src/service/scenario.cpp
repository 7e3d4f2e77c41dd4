#include "fleetline/service/scenario.hpp"

#include <set>

#include "fleetline/error.hpp"

namespace fleetline::service {

using nlohmann::json;

void scenario_error(std::size_t line, const std::string& field, const std::string& message) {
  std::string where = "line " + std::to_string(line);
  if (!field.empty()) where += ", field " + field;
  fail(ErrorCode::ValidationError, where + ": " + message);
}

Scenario parse_scenario(std::istream& in) {
  static const std::set<std::string> kKinds{"provider.registered", "customer.registered", "driver.added",
                                            "vehicle.added",       "rating.set",          "review.submitted"};
  Scenario out;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception&) {
      scenario_error(line_no, "", "not a JSON object");
    }
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) scenario_error(line_no, "kind", "missing");
    if (!j.contains("payload") || !j["payload"].is_object()) scenario_error(line_no, "payload", "missing object");
    const std::string kind = j["kind"];
    const json& p = j["payload"];

    if (kind == "scenario") {
      if (out.name) scenario_error(line_no, "kind", "scenario name given twice");
      if (!p.contains("name") || !p["name"].is_string() || p["name"].get<std::string>().empty()) {
        scenario_error(line_no, "name", "non-empty string required");
      }
      out.name = p["name"].get<std::string>();
    } else if (kind == "path") {
      if (!p.contains("name") || !p["name"].is_string()) scenario_error(line_no, "name", "string required");
      if (!p.contains("points") || !p["points"].is_array()) scenario_error(line_no, "points", "array required");
      std::vector<geo::GeoPoint> pts;
      try {
        for (const auto& pt : p["points"]) pts.emplace_back(pt.at("lat").get<double>(), pt.at("lon").get<double>());
        out.paths.insert_or_assign(p["name"].get<std::string>(), geo::Polyline(std::move(pts)));
      } catch (const json::exception& e) {
        scenario_error(line_no, "points", e.what());
      } catch (const Error& e) {
        scenario_error(line_no, "points", e.what());
      }
    } else if (kKinds.contains(kind)) {
      out.records.push_back({line_no, kind, p});
    } else {
      scenario_error(line_no, "kind", "unsupported kind '" + kind + "'");
    }
  }
  if (in.bad()) fail(ErrorCode::IoError, "failed reading scenario");
  return out;
}

}  // namespace fleetline::service
