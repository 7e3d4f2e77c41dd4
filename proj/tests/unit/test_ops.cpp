#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fleetline/ops.hpp"
#include "fleetline/service/event_log.hpp"
#include "service_fixture.hpp"
#include "test_support.hpp"

#ifndef FLEETLINE_SCENARIO_DIR
#error "FLEETLINE_SCENARIO_DIR must point at the scenarios directory"
#endif

using namespace fleetline;
using namespace fleetline::testing;
using nlohmann::json;

namespace {

service::Scenario scenario_file(const std::string& name) {
  std::ifstream in(std::string(FLEETLINE_SCENARIO_DIR) + "/" + name);
  REQUIRE(in);
  return service::parse_scenario(in);
}

service::Scenario scenario_text(const std::string& text) {
  std::istringstream in(text);
  return service::parse_scenario(in);
}

std::size_t log_lines(const std::filesystem::path& dir) {
  std::ifstream in(dir / service::kEventLogFile);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  return n;
}

}  // namespace

TEST_CASE("tally scenarios seed and report 50/30/0 and 100/60/0") {
  TempDir a, b;
  const json first = ops::seed_data_dir(a.path, scenario_file("figure4.jsonl"), kAdminPassword);
  CHECK(first["status"] == "seeded");
  CHECK(first["created"]["reviews"] == 80);
  CHECK(ops::sentiment_csv(ops::report_data_dir(a.path)) == "positive,50\nnegative,30\nneutral,0\n");

  ops::seed_data_dir(b.path, scenario_file("figure4-doubled.jsonl"), kAdminPassword);
  CHECK(ops::report_data_dir(b.path) == reviews::SentimentCounts{100, 60, 0});

  // Both scenarios can share a data dir.
  ops::seed_data_dir(a.path, scenario_file("figure4-doubled.jsonl"), kAdminPassword);
  CHECK(ops::report_data_dir(a.path) == reviews::SentimentCounts{150, 90, 0});
}

TEST_CASE("seeding is idempotent per scenario name") {
  TempDir dir;
  ops::seed_data_dir(dir.path, scenario_file("figure4.jsonl"), kAdminPassword);
  const auto lines = log_lines(dir.path);
  const json again = ops::seed_data_dir(dir.path, scenario_file("figure4.jsonl"), kAdminPassword);
  CHECK(again["status"] == "already seeded");
  CHECK(again["events"] == 0);
  CHECK(log_lines(dir.path) == lines);
}

TEST_CASE("empty scenario and empty system") {
  TempDir dir;
  const json r = ops::seed_data_dir(dir.path, scenario_text(""), kAdminPassword);
  CHECK(r["events"] == 0);
  CHECK(ops::report_data_dir(dir.path) == reviews::SentimentCounts{0, 0, 0});
  TempDir bare;
  CHECK(ops::report_data_dir(bare.path) == reviews::SentimentCounts{0, 0, 0});
  CHECK_THROWS_CODE(ops::report_data_dir(bare.path / "missing"), ErrorCode::IoError);
}

TEST_CASE("invalid scenarios are refused before any mutation") {
  TempDir dir;
  const char* good_provider =
      R"({"kind":"provider.registered","payload":{"providerId":"P0001","login":"p","name":"P","password":"secret1"}})";
  struct Case {
    std::string body;
    std::string where;
  };
  const std::vector<Case> cases{
      {std::string(good_provider) + "\n" +
           R"({"kind":"vehicle.added","payload":{"vehicleId":"V0001","providerId":"P0009","vehicleType":"x","costPerKmMinor":100,"home":{"lat":1,"lon":1}}})",
       "line 2, field providerId"},
      {std::string(good_provider) + "\n" + good_provider, "line 2, field providerId"},
      {R"({"kind":"rating.set","payload":{"customerId":"C0001","vehicleId":"V0001","rating":3}})", "line 1, field customerId"},
      {"\n\nnot json", "line 3"},
      {R"({"kind":"trip.started","payload":{}})", "line 1, field kind"},
      {R"({"kind":"customer.registered","payload":{"customerId":"C0001","login":"c","name":"C","password":"123"}})",
       "line 1, field password"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.body);
    try {
      ops::seed_data_dir(dir.path, scenario_text(c.body), kAdminPassword);
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ValidationError);
      CHECK(std::string(e.what()).starts_with(c.where));
    }
  }
  CHECK(log_lines(dir.path) <= 1);  // only the bootstrap admin, if anything
}

TEST_CASE("report equals sentiment_counts over the raw review store") {
  FakeClock clock;
  TempDir dir;
  {
    service::Service svc(config(clock, dir.path));
    svc.seed_local(scenario_file("figure4.jsonl"));
    World w(svc);
    const json req = w.request(2.0);
    w.ride(clock, req["requestId"], req["trip"]["tripId"], 2.0);
    svc.pay_trip(w.customer, req["trip"]["tripId"]);
    svc.submit_review(w.customer, {{"tripId", req["trip"]["tripId"]}, {"text", "bad and sad"}, {"stars", 1}});
    const json live = svc.sentiment_report(w.admin);
    const auto offline = ops::report_data_dir(dir.path);
    CHECK(live["positive"] == offline.positive);
    CHECK(live["negative"] == offline.negative);
    CHECK(live["neutral"] == offline.neutral);
    CHECK(offline == reviews::SentimentCounts{50, 31, 0});
  }
}

TEST_CASE("simulate picks the scenario path") {
  const auto s = scenario_file("figure4.jsonl");
  ops::SimulateOptions o;
  o.vehicle_id = "V0001";
  o.interval_ms = 60'000;
  const auto fixes = ops::simulate(s, o);
  CHECK(fixes.size() == 14);  // 12.5 km at 1 km per fix: 0..12 plus the end point
  CHECK(fixes.front().seq == 1);
  o.path_name = "nope";
  CHECK_THROWS_CODE(ops::simulate(s, o), ErrorCode::ValidationError);
  o.path_name.clear();
  o.vehicle_id.clear();
  CHECK_THROWS_CODE(ops::simulate(s, o), ErrorCode::ValidationError);
}

TEST_CASE("demo: success, determinism, wrong passphrase, used data dir") {
  ops::DemoOptions o;
  o.seed = 11;
  std::ostringstream first, second;
  REQUIRE(ops::run_demo(o, first) == 0);
  CHECK(first.str().find("final_cost = 50.0") != std::string::npos);
  CHECK(first.str().find("qr-verify: ok") != std::string::npos);
  CHECK(first.str().find("replay: ok") != std::string::npos);
  REQUIRE(ops::run_demo(o, second) == 0);
  CHECK(first.str() == second.str());

  o.decode_passphrase = "not-the-passphrase";
  std::ostringstream wrong;
  CHECK(ops::run_demo(o, wrong) != 0);
  CHECK(wrong.str().find("failed at step \"qr-open\": AuthFailure") != std::string::npos);

  TempDir used;
  std::ofstream(used.path / "events.log") << "x\n";
  o.data_dir = used.path;
  o.decode_passphrase = ops::kDemoQrPassphrase;
  std::ostringstream refused;
  CHECK(ops::run_demo(o, refused) == ops::kExitValidation);
  CHECK(refused.str().find("DataDirNotEmpty") != std::string::npos);
}

TEST_CASE("exit code classes") {
  CHECK(ops::exit_code_for(ErrorCode::ValidationError) == 1);
  CHECK(ops::exit_code_for(ErrorCode::DataDirNotEmpty) == 1);
  CHECK(ops::exit_code_for(ErrorCode::IoError) == 2);
  CHECK(ops::exit_code_for(ErrorCode::AuthFailure) == 2);
}
