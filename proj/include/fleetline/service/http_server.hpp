#pragma once

#include <string>

#include "fleetline/service/service.hpp"
#include "httplib.h"

namespace fleetline::service {

// Registers every /api route on `server`, forwarding to `service`.
// Authentication is a bearer token in the Authorization header; errors
// come back as {"code": ..., "message": ...} with the status from
// http_status(). The service must outlive the server.
void install_routes(httplib::Server& server, Service& service);

// Token from "Authorization: Bearer <token>", or "" when absent.
std::string bearer_token(const httplib::Request& request);

}  // namespace fleetline::service
