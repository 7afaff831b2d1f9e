#include "lcrt/service.hpp"

// before httplib: resolv.h defines a _res macro that breaks Eigen
#include "lcrt/commands.hpp"
#include "lcrt/error.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>

#ifndef LCRT_VERSION
#define LCRT_VERSION "0.0.0"
#endif

namespace lcrt {

std::string engine_version() { return LCRT_VERSION; }

int http_status_for(const std::string& code) {
  if (code == malformed_request || code == invalid_input) return 400;
  if (code == deadline_exceeded) return 504;
  return 422;
}

namespace {

using steady = std::chrono::steady_clock;

json meta(steady::time_point start) {
  const double ms = std::chrono::duration<double, std::milli>(steady::now() - start).count();
  return {{"version", engine_version()}, {"elapsed_ms", ms}};
}

ApiResponse ok(const json& result, steady::time_point start) {
  return {200, json{{"status", "ok"}, {"result", result}, {"meta", meta(start)}}.dump()};
}

ApiResponse fail(int status, const json& err, steady::time_point start) {
  return {status, json{{"status", "error"}, {"error", err}, {"meta", meta(start)}}.dump()};
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw error(malformed_request, std::string("request body is not valid json: ") + e.what(), "");
  }
}

ApiResponse validate(const json& body, steady::time_point start) {
  const json report = validate_icc_report(body);
  if (report.at("ok").get<bool>()) return ok(report, start);
  const json& first = report.at("violations").front();
  const bool eig = first.at("constraint") == "eigenvalue";
  json err = error_json(eig ? not_positive_definite : constraint_violation,
                        first.at("constraint").get<std::string>() + ": " + first.at("message").get<std::string>(),
                        first.at("field").get<std::string>());
  err["details"] = report;
  return fail(422, err, start);
}

}  // namespace

ApiResponse handle_request(const std::string& method, const std::string& path, const std::string& body,
                           const ServiceOptions& opts) {
  const auto start = steady::now();
  try {
    if (path == "/api/v1/health") {
      if (method != "GET") return fail(405, error_json(malformed_request, "use GET", ""), start);
      return {200, json{{"status", "ok"}, {"version", engine_version()}}.dump()};
    }
    const std::string prefix = "/api/v1/";
    if (path.rfind(prefix, 0) != 0) return fail(404, error_json(malformed_request, "no such endpoint", ""), start);
    const std::string name = path.substr(prefix.size());
    const bool known = name == "validate-icc" || name == "lod" || name == "mmd" || name == "sweep" ||
                       name == "variance" || name == "power";
    if (!known) return fail(404, error_json(malformed_request, "no such endpoint", ""), start);
    if (method != "POST") return fail(405, error_json(malformed_request, "use POST", ""), start);
    const json j = parse_body(body);
    if (name == "validate-icc") return validate(j, start);
    RunConfig c = config_from_json(j);
    const bool asked = j.contains("options") && j.at("options").contains("deadline_s");
    c.deadline_s = asked ? std::min(c.deadline_s, opts.deadline_s) : opts.deadline_s;
    return ok(run_command(name, c), start);
  } catch (const error& e) {
    return fail(http_status_for(e.code()), error_json(e.code(), e.what(), e.field()), start);
  } catch (const std::exception& e) {
    return fail(500, error_json("INTERNAL", e.what(), ""), start);
  }
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
  std::string b = bind;
  if (b.empty())
    if (const char* env = std::getenv("CE_LCRT_BIND")) b = env;
  if (b.empty()) b = "127.0.0.1:8080";
  const auto colon = b.rfind(':');
  if (colon == std::string::npos) throw error(invalid_input, "bind address must be host:port", "bind");
  int port = 0;
  try {
    port = std::stoi(b.substr(colon + 1));
  } catch (const std::exception&) {
    throw error(invalid_input, "bind port is not a number", "bind");
  }
  if (port < 0 || port > 65535) throw error(invalid_input, "bind port out of range", "bind");
  return {b.substr(0, colon), port};
}

void serve(const std::string& host, int port, const ServiceOptions& opts, ReadyHook ready) {
  httplib::Server srv;
  auto cors = [opts](httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", opts.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  };
  auto route = [opts, cors](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = handle_request(req.method, req.path, req.body, opts);
    cors(res);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  srv.Get(R"(/api/v1/.*)", route);
  srv.Post(R"(/api/v1/.*)", route);
  srv.Options(R"(/api/v1/.*)", [cors](const httplib::Request&, httplib::Response& res) {
    cors(res);
    res.status = 204;
  });
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw error(invalid_input, "cannot listen on " + host + ":" + std::to_string(port), "bind");
  if (ready) ready(bound, [&srv] { srv.stop(); });
  srv.listen_after_bind();
}

}  // namespace lcrt
