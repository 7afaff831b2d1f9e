#pragma once

#include <functional>
#include <string>

namespace lcrt {

std::string engine_version();

struct ServiceOptions {
  double deadline_s = 120;
  std::string cors_origin = "*";
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

// routing and envelope logic without sockets, so tests drive it directly
ApiResponse handle_request(const std::string& method, const std::string& path, const std::string& body,
                           const ServiceOptions& opts = {});

int http_status_for(const std::string& code);

// "host:port", falls back to CE_LCRT_BIND then 127.0.0.1:8080
std::pair<std::string, int> parse_bind(const std::string& bind);

// called once bound, with the actual port and a handle that stops the server
using ReadyHook = std::function<void(int port, std::function<void()> stop)>;

// blocks until the server stops; port 0 picks a free port
void serve(const std::string& host, int port, const ServiceOptions& opts, ReadyHook ready = nullptr);

}  // namespace lcrt
