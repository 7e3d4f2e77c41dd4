#include "fleetline/service/http_server.hpp"

#include <sstream>

#include "fleetline/error.hpp"

namespace fleetline::service {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"code", code}, {"message", message}}.dump(), kJson);
}

// Runs `fn` and turns whatever it throws into a JSON error response.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), std::string(to_string(e.code())), e.what());
  } catch (const json::exception& e) {
    send_error(res, 422, "ValidationError", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "InternalError", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error&) {
    fail(ErrorCode::ValidationError, "request body is not valid JSON");
  }
}

Query query_of(const httplib::Request& req) {
  Query q;
  for (const auto& [k, v] : req.params) q.emplace(k, v);  // first value wins
  return q;
}

void reply(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

using Handler = std::function<json(const httplib::Request&, const std::string& token)>;

httplib::Server::Handler wrap(Handler h, int status = 200) {
  return [h = std::move(h), status](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, h(req, bearer_token(req)), status); });
  };
}

const std::string& param(const httplib::Request& req, const char* name) { return req.path_params.at(name); }

}  // namespace

std::string bearer_token(const httplib::Request& request) {
  const std::string header = request.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) return {};
  return header.substr(prefix.size());
}

void install_routes(httplib::Server& server, Service& svc) {
  Service* s = &svc;

  // Public
  server.Post("/api/auth/login", wrap([s](const auto& req, const auto&) {
                const json b = parse_body(req);
                if (!b.is_object() || !b.contains("login") || !b["login"].is_string() || !b.contains("password") ||
                    !b["password"].is_string()) {
                  fail(ErrorCode::ValidationError, "login and password strings required");
                }
                return s->login(b["login"], b["password"]);
              }));
  server.Post("/api/auth/logout", wrap([s](const auto&, const auto& token) {
                s->logout(token);
                return json{{"loggedOut", true}};
              }));
  server.Post("/api/providers/register",
              wrap([s](const auto& req, const auto&) { return s->register_provider(parse_body(req)); }, 201));
  server.Post("/api/customers/register",
              wrap([s](const auto& req, const auto&) { return s->register_customer(parse_body(req)); }, 201));

  // Admin
  server.Post("/api/admin/providers/:id/approve",
              wrap([s](const auto& req, const auto& t) { return s->approve_provider(t, param(req, "id")); }));
  server.Get("/api/admin/providers", wrap([s](const auto&, const auto& t) { return s->list_providers(t); }));
  server.Get("/api/admin/customers", wrap([s](const auto&, const auto& t) { return s->list_customers(t); }));
  server.Get("/api/admin/vehicles", wrap([s](const auto&, const auto& t) { return s->list_all_vehicles(t); }));
  server.Get("/api/admin/spam", wrap([s](const auto&, const auto& t) { return s->spam_report(t); }));
  server.Get("/api/admin/rankings", wrap([s](const auto&, const auto& t) { return s->provider_rankings(t); }));
  server.Get("/api/admin/sentiment", wrap([s](const auto&, const auto& t) { return s->sentiment_report(t); }));
  server.Post("/api/admin/seed", wrap([s](const auto& req, const auto& t) {
                std::istringstream in(req.body);
                return s->seed(t, parse_scenario(in));
              }));

  // Provider
  server.Get("/api/provider/profile", wrap([s](const auto&, const auto& t) { return s->provider_profile(t); }));
  server.Post("/api/vehicles", wrap([s](const auto& req, const auto& t) { return s->add_vehicle(t, parse_body(req)); }, 201));
  server.Post("/api/vehicles/:id/status", wrap([s](const auto& req, const auto& t) {
                return s->set_vehicle_status(t, param(req, "id"), parse_body(req));
              }));
  server.Post("/api/drivers", wrap([s](const auto& req, const auto& t) { return s->add_driver(t, parse_body(req)); }, 201));
  server.Get("/api/requests", wrap([s](const auto&, const auto& t) { return s->provider_requests(t); }));
  server.Post("/api/notifications",
              wrap([s](const auto& req, const auto& t) { return s->notify_driver(t, parse_body(req)); }, 201));
  server.Get("/api/schedule/:vehicleId",
             wrap([s](const auto& req, const auto& t) { return s->vehicle_schedule(t, param(req, "vehicleId")); }));
  server.Get("/api/history", wrap([s](const auto&, const auto& t) { return s->provider_history(t); }));

  // Customer
  server.Get("/api/vehicles", wrap([s](const auto& req, const auto& t) { return s->search_vehicles(t, query_of(req)); }));
  server.Post("/api/requests",
              wrap([s](const auto& req, const auto& t) { return s->create_request(t, parse_body(req)); }, 201));
  server.Get("/api/recommendations",
             wrap([s](const auto& req, const auto& t) { return s->recommendations(t, query_of(req)); }));
  server.Get("/api/trips/:id", wrap([s](const auto& req, const auto& t) { return s->get_trip(t, param(req, "id")); }));
  server.Get("/api/trips/:id/position",
             wrap([s](const auto& req, const auto& t) { return s->trip_position(t, param(req, "id")); }));
  server.Post("/api/trips/:id/payment",
              wrap([s](const auto& req, const auto& t) { return s->pay_trip(t, param(req, "id")); }, 201));
  server.Post("/api/trips/:id/cancel",
              wrap([s](const auto& req, const auto& t) { return s->cancel_trip(t, param(req, "id")); }));
  server.Post("/api/reviews",
              wrap([s](const auto& req, const auto& t) { return s->submit_review(t, parse_body(req)); }, 201));
  server.Get("/api/trips/:id/qr", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const QrImage img = s->trip_qr(bearer_token(req), param(req, "id"));
      res.set_header("X-Qr-Version", std::to_string(img.version));
      res.set_header("X-Qr-Ec-Level", img.ec_level);
      res.set_content(img.pbm, "image/x-portable-bitmap");
    });
  });

  // Driver
  server.Get("/api/driver/requests", wrap([s](const auto&, const auto& t) { return s->driver_requests(t); }));
  server.Post("/api/driver/requests/:id/accept",
              wrap([s](const auto& req, const auto& t) { return s->accept_request(t, param(req, "id")); }));
  server.Get("/api/driver/schedule", wrap([s](const auto&, const auto& t) { return s->driver_schedule(t); }));
  server.Get("/api/driver/notifications", wrap([s](const auto&, const auto& t) { return s->driver_notifications(t); }));
  server.Post("/api/driver/trips/:id/start",
              wrap([s](const auto& req, const auto& t) { return s->start_trip(t, param(req, "id")); }));
  server.Post("/api/driver/trips/:id/complete",
              wrap([s](const auto& req, const auto& t) { return s->complete_trip(t, param(req, "id")); }));

  // Telemetry
  server.Post("/api/telemetry", wrap([s](const auto& req, const auto& t) { return s->post_telemetry(t, req.body); }));
  server.Get("/api/vehicles/:id/track",
             wrap([s](const auto& req, const auto& t) { return s->vehicle_track(t, param(req, "id")); }));

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) send_error(res, 404, "NotFound", "no route for " + req.method + " " + req.path);
  });
}

}  // namespace fleetline::service
