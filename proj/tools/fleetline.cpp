// fleetline: serve | seed | simulate | demo | report
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fleetline/ops.hpp"
#include "fleetline/service/http_server.hpp"
#include "fleetline/service/service.hpp"

using namespace fleetline;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + out_path);
  out << text;
  if (!out.flush()) fail(ErrorCode::IoError, "failed writing " + out_path);
}

service::Scenario load_scenario(const std::string& path) {
  std::istringstream in(read_file(path));
  return service::parse_scenario(in);
}

httplib::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

struct Options {
  std::string data_dir;
  std::string url;
  std::string scenario;
  std::string out;
  std::string login = "admin";
  std::string password;
  std::uint64_t seed = 1;
  // simulate
  std::string vehicle;
  std::string path_name;
  double speed_kmh = 60.0;
  std::int64_t interval_ms = 1000;
  std::int64_t start_ms = 0;
  std::uint64_t first_seq = 1;
};

std::string admin_password(const Options& o) {
  return o.password.empty() ? env_or("FLEETLINE_ADMIN_PASSWORD", "") : o.password;
}

ops::Remote remote(const Options& o) { return {o.url, o.login, admin_password(o)}; }

void require_one_target(const Options& o) {
  if (o.data_dir.empty() == o.url.empty()) fail(ErrorCode::ValidationError, "give exactly one of --data-dir or --url");
}

int cmd_serve(const Options& o) {
  service::ServiceConfig cfg;
  cfg.data_dir = o.data_dir.empty() ? env_or("FLEETLINE_DATA_DIR", "fleetline-data") : o.data_dir;
  cfg.admin_password = admin_password(o);
  if (const char* p = std::getenv("FLEETLINE_QR_PASSPHRASE"); p && *p) cfg.qr_passphrase = p;
  const std::string port_text = env_or("FLEETLINE_PORT", "8080");
  int port = 0;
  try {
    port = std::stoi(port_text);
  } catch (const std::exception&) {
    fail(ErrorCode::ValidationError, "FLEETLINE_PORT is not a number: " + port_text);
  }
  if (port <= 0 || port > 65535) fail(ErrorCode::ValidationError, "FLEETLINE_PORT out of range: " + port_text);

  service::Service svc(cfg);
  httplib::Server server;
  service::install_routes(server, svc);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "fleetline serving on 0.0.0.0:" << port << " (data dir " << cfg.data_dir.string() << ", "
            << svc.last_seq() << " events)\n";
  if (!server.listen("0.0.0.0", port)) fail(ErrorCode::IoError, "cannot listen on port " + std::to_string(port));
  g_server = nullptr;
  return ops::kExitOk;
}

int cmd_seed(const Options& o) {
  require_one_target(o);
  json result;
  if (!o.data_dir.empty()) {
    result = ops::seed_data_dir(o.data_dir, load_scenario(o.scenario), admin_password(o));
  } else {
    load_scenario(o.scenario);  // fail locally with line numbers before sending
    result = ops::seed_remote(remote(o), read_file(o.scenario));
  }
  std::cout << result.dump(2) << "\n";
  return ops::kExitOk;
}

int cmd_report(const Options& o) {
  require_one_target(o);
  const auto counts = o.data_dir.empty() ? ops::report_remote(remote(o)) : ops::report_data_dir(o.data_dir);
  write_output(o.out, ops::sentiment_csv(counts));
  return ops::kExitOk;
}

int cmd_simulate(const Options& o) {
  const auto fixes = ops::simulate(load_scenario(o.scenario), {o.vehicle, o.path_name, o.speed_kmh, o.interval_ms,
                                                               o.start_ms, o.first_seq});
  if (!o.url.empty()) {
    std::cout << ops::post_fixes(remote(o), fixes).dump() << "\n";
    return ops::kExitOk;
  }
  std::string lines;
  for (const auto& m : fixes) lines += tracking::to_json_line(m) + "\n";
  write_output(o.out, lines);
  return ops::kExitOk;
}

int cmd_demo(const Options& o) {
  ops::DemoOptions d;
  d.data_dir = o.data_dir;
  d.seed = o.seed;
  d.decode_passphrase = env_or("FLEETLINE_QR_PASSPHRASE", ops::kDemoQrPassphrase);
  return ops::run_demo(d, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fleetline: logistics service, scenario seeding, telemetry simulator, demo and reports"};
  app.require_subcommand(1);
  Options o;

  auto* serve = app.add_subcommand("serve", "run the HTTP service (FLEETLINE_PORT, FLEETLINE_DATA_DIR, "
                                            "FLEETLINE_QR_PASSPHRASE, FLEETLINE_ADMIN_PASSWORD)");
  serve->add_option("--data-dir", o.data_dir, "event log directory (overrides FLEETLINE_DATA_DIR)");
  serve->add_option("--password", o.password, "bootstrap admin password (overrides FLEETLINE_ADMIN_PASSWORD)");

  auto* seed = app.add_subcommand("seed", "load a scenario file into a data dir or a running service");
  seed->add_option("--scenario", o.scenario, "scenario JSONL file")->required();
  seed->add_option("--data-dir", o.data_dir, "target data dir");
  seed->add_option("--url", o.url, "target service, e.g. http://127.0.0.1:8080");
  seed->add_option("--login", o.login, "admin login for --url");
  seed->add_option("--password", o.password, "admin password (default FLEETLINE_ADMIN_PASSWORD)");

  auto* report = app.add_subcommand("report", "write sentiment counts as CSV rows label,count");
  report->add_option("--data-dir", o.data_dir, "source data dir");
  report->add_option("--url", o.url, "source service");
  report->add_option("--login", o.login, "admin login for --url");
  report->add_option("--password", o.password, "admin password (default FLEETLINE_ADMIN_PASSWORD)");
  report->add_option("--out", o.out, "CSV path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "emit transmitter fixes along a scenario path");
  simulate->add_option("--scenario", o.scenario, "scenario JSONL file with path lines")->required();
  simulate->add_option("--vehicle", o.vehicle, "vehicle id stamped on every fix")->required();
  simulate->add_option("--path", o.path_name, "path name (optional when the file has one path)");
  simulate->add_option("--speed-kmh", o.speed_kmh, "vehicle speed")->capture_default_str();
  simulate->add_option("--interval-ms", o.interval_ms, "time between fixes")->capture_default_str();
  simulate->add_option("--start-ms", o.start_ms, "timestamp of the first fix")->capture_default_str();
  simulate->add_option("--first-seq", o.first_seq, "sequence number of the first fix")->capture_default_str();
  simulate->add_option("--out", o.out, "JSONL output path (default stdout)");
  simulate->add_option("--url", o.url, "post the fixes to this service instead");
  simulate->add_option("--login", o.login, "login for --url");
  simulate->add_option("--password", o.password, "password for --url");

  auto* demo = app.add_subcommand("demo", "scripted end-to-end run over HTTP (FLEETLINE_QR_PASSPHRASE opens the QR)");
  demo->add_option("--data-dir", o.data_dir, "fresh data dir (default: temporary)");
  demo->add_option("--seed", o.seed, "random seed for the start point")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ops::kExitValidation;
  }

  try {
    if (*serve) return cmd_serve(o);
    if (*seed) return cmd_seed(o);
    if (*report) return cmd_report(o);
    if (*simulate) return cmd_simulate(o);
    if (*demo) return cmd_demo(o);
  } catch (const Error& e) {
    std::cerr << "fleetline: " << to_string(e.code()) << ": " << e.what() << "\n";
    return ops::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "fleetline: " << e.what() << "\n";
    return ops::kExitRuntime;
  }
  return ops::kExitRuntime;
}
