#include "lcrt/cli.hpp"
#include "lcrt/commands.hpp"
#include "lcrt/error.hpp"
#include "lcrt/service.hpp"
#include "lcrt/tables.hpp"

#include <doctest.h>
#include <httplib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

using namespace lcrt;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> row1_flags(const std::string& cmd) {
  return {cmd, "--family", "crxo", "--J", "2", "--rho", "0.05,0.025,0.05,0.025,0.02,0.01,0.5", "--sigmaE", "1",
          "--sigmaC", "3000", "--lambda", "20000", "--beta1", "4000"};
}

json trial_config(const std::string& family, int J) {
  json c = {{"layout", {{"family", family}, {"J", J}}},
            {"rho", to_json(IccVector{0.048, 0.042, 0.020, 0.018, 0.007, 0.004, 0.75})},
            {"econ", {{"sigmaE", 6.48}, {"sigmaC", 11635}, {"lambda", 216}, {"beta1", 2089}}},
            {"budget", {{"B", 600000}}}};
  if (family == "sw" || family == "sw-incomplete") c["layout"]["Q"] = 7;
  return c;
}

json reference_config(const std::string& family, int J) {
  return {{"layout", {{"family", family}, {"J", J}}},
          {"rho", to_json(reference_rho(0.05, 0.025))},
          {"econ", to_json(reference_econ())},
          {"budget", to_json(reference_budget())}};
}

json api(const std::string& path, const json& body, int want, const ServiceOptions& o = {}) {
  const ApiResponse r = handle_request("POST", path, body.dump(), o);
  CHECK_MESSAGE(r.status == want, r.body);
  return json::parse(r.body);
}

std::string temp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_CASE("config round trip") {
  json j = reference_config("sw", 4);
  j["layout"]["Q"] = 3;
  j["box"] = to_json(reference_box(0.05, 0.1, 0.025, 0.04));
  j["options"] = {{"verbose", true}, {"deadline_s", 30}, {"search_J", {4, 9}}, {"seeds", {to_json(reference_rho(0.07, 0.03))}}};
  j["sweep"] = {{"axis", "cac"}, {"grid", {0.1, 0.2}}};
  j["design"] = {{"I", 30}, {"K", 7}};
  const json once = to_json(config_from_json(j));
  CHECK(to_json(config_from_json(once)) == once);

  json p = {{"layout", {{"family", "sw-incomplete"}, {"Q", 1}, {"pattern", {"01.", ".01"}}}}};
  const RunConfig c = config_from_json(p);
  CHECK(c.layout.J == 3);
  CHECK(to_json(c)["layout"]["pattern"] == json({"01.", ".01"}));
}

TEST_CASE("unknown keys name the offending field") {
  json j = reference_config("crxo", 2);
  j["econ"]["sigma"] = 1;
  try {
    config_from_json(j);
    FAIL("expected an error");
  } catch (const error& e) {
    CHECK(e.code() == invalid_input);
    CHECK(e.field() == "econ.sigma");
  }
}

TEST_CASE("grid and range parsing") {
  CHECK(parse_grid("0.1,0.3") == std::vector<double>{0.1, 0.3});
  CHECK(parse_grid("1:2:0.5").size() == 3);
  CHECK(parse_range("4..9") == std::pair{4, 9});
  CHECK(parse_range("5") == std::pair{5, 5});
}

TEST_CASE("variance command") {
  auto r = cmd_variance(config_from_json([] {
    json c = trial_config("crxo", 8);
    c["design"] = {{"I", 8}, {"K", 36}};
    return c;
  }()));
  CHECK(std::fabs(r["power"].get<double>() - 0.996) <= 0.002);
  CHECK(r.contains("intermediates"));

  json z = reference_config("crxo", 2);
  z["rho"] = to_json(IccVector{});
  z["design"] = {{"I", 10}, {"K", 7}};
  const auto e = reference_econ();
  const double want = 4 * (e.lambda * e.lambda * e.sigmaE * e.sigmaE + e.sigmaC * e.sigmaC) / (10.0 * 2 * 7);
  CHECK(cmd_variance(config_from_json(z))["variance"].get<double>() == doctest::Approx(want).epsilon(1e-10));

  const auto run = cli({"power", "--pattern", LCRT_DATA_DIR "/patterns/stagger_q7_j8.csv", "--Q", "7", "--I", "28",
                        "--K", "11", "--rho", "0.048,0.042,0.020,0.018,0.007,0.004,0.75", "--sigmaE", "6.48",
                        "--sigmaC", "11635", "--lambda", "216", "--beta1", "2089", "--B", "600000"});
  REQUIRE(run.code == 0);
  CHECK(std::fabs(json::parse(run.out)["result"]["power"].get<double>() - 0.866) <= 0.002);
}

TEST_CASE("lod through the cli") {
  auto run = cli(row1_flags("lod"));
  REQUIRE(run.code == 0);
  auto out = json::parse(run.out);
  CHECK(out["command"] == "lod");
  CHECK(out["result"]["integer"]["kind"] == "IntegerLOD");
  CHECK(out["result"]["integer"]["I"] == 30);
  CHECK(out["result"]["integer"]["K"] == 14);
  CHECK(std::fabs(out["result"]["integer"]["power"].get<double>() - 0.774) <= 0.002);
  CHECK(out["result"]["decimal"]["kind"] == "DecimalLOD");

  auto flags = row1_flags("lod");
  flags[2] = "sw";
  flags[4] = "9";
  flags.insert(flags.end(), {"--Q", "3", "--search-J", "4..9"});
  run = cli(flags);
  REQUIRE(run.code == 0);
  out = json::parse(run.out)["result"]["integer"];
  CHECK(out["J"] == 4);
  CHECK(out["I"] == 30);
  CHECK(out["K"] == 7);
  CHECK(std::fabs(out["power"].get<double>() - 0.436) <= 0.002);

  flags = row1_flags("lod");
  flags.insert(flags.end(), {"--B", "1000"});
  run = cli(flags);
  CHECK(run.code != 0);
  CHECK(run.err.find("EMPTY_FEASIBLE_SET") != std::string::npos);
}

TEST_CASE("cli output re-runs to identical bytes") {
  const auto first = cli(row1_flags("lod"));
  REQUIRE(first.code == 0);
  const std::string path = temp_path("lcrt_rerun.json");
  std::ofstream(path) << first.out;
  const auto second = cli({"lod", "--config", path});
  REQUIRE(second.code == 0);
  CHECK(second.out == first.out);
  std::remove(path.c_str());
}

TEST_CASE("mmd through the cli") {
  const IccBox b = reference_box(0.05, 0.10, 0.025, 0.040);
  auto csv = [](const IccVector& r) {
    std::string s;
    for (double v : r.to_array()) s += (s.empty() ? "" : ",") + std::to_string(v);
    return s;
  };
  const std::vector<std::string> flags = {"mmd", "--family", "pa", "--J", "4", "--rho-min", csv(b.min), "--rho-max",
                                          csv(b.max), "--sigmaE", "1", "--sigmaC", "3000", "--lambda", "20000"};
  auto run = cli(flags);
  REQUIRE_MESSAGE(run.code == 0, run.err);
  auto out = json::parse(run.out)["result"];
  CHECK(out["I"] == 42);
  CHECK(out["K"] == 4);
  CHECK(std::fabs(out["worst_re"].get<double>() - 0.963) <= 0.003);

  // singleton box equals the local optimum
  json c = reference_config("crxo", 4);
  c["box"] = {{"min", c["rho"]}, {"max", c["rho"]}};
  const json m = cmd_mmd(config_from_json(c));
  c.erase("box");
  const json l = cmd_lod(config_from_json(c));
  CHECK(m["I"] == l["integer"]["I"]);
  CHECK(m["K"] == l["integer"]["K"]);
}

TEST_CASE("tables command") {
  auto run = cli({"tables", "2"});
  REQUIRE(run.code == 0);
  const Table t = parse_table_csv(run.out);
  CHECK(t.rows.size() == 36);
  run = cli({"tables", "4", "--diff"});
  REQUIRE(run.code == 0);
  CHECK(run.out == "key,column,expected,actual\n");
  CHECK(run.err.rfind("0 mismatch", 0) == 0);
  run = cli({"tables", "9"});
  CHECK(run.code != 0);
  CHECK(run.err.find("INVALID_INPUT") != std::string::npos);
}

TEST_CASE("sweeps") {
  json c = reference_config("pa", 4);
  c["rho"] = to_json(IccVector{0.1, 0.01, 0.1, 0.01, 0.04, 0.004, 0.5});
  c["sweep"] = {{"axis", "cac"}, {"grid", {0.25, 0.4, 0.6, 0.8}}};
  const json s = cmd_sweep(config_from_json(c));
  CHECK(s["mode"] == "lod");
  double last = 1;
  for (const auto& row : s["rows"]) {
    CHECK(row["I"] == 50);
    CHECK(row["K"] == 3);
    CHECK(row["power"].get<double>() <= last);
    last = row["power"].get<double>();
  }

  json one = reference_config("crxo", 2);
  one["sweep"] = {{"axis", "cac"}, {"grid", {0.5}}};
  const json row = cmd_sweep(config_from_json(one))["rows"][0];
  one.erase("sweep");
  const json l = cmd_lod(config_from_json(one));
  CHECK(row["I"] == l["integer"]["I"]);
  CHECK(row["K"] == l["integer"]["K"]);
  CHECK(row["power"] == l["integer"]["power"]);

  const RunConfig base = config_from_json(reference_config("crxo", 2));
  const RunConfig p = sweep_point(base, SweepAxis::lambda_r, 2.0);
  CHECK(p.econ.lambda_r() == doctest::Approx(2.0));
}

TEST_CASE("csv and table rendering") {
  const json r = {{"I", 30}, {"K", 14}, {"nested", {{"a", 1}}}};
  CHECK(render(r, "csv") == "I,K,nested.a\n30,14,1\n");
  CHECK(render(r, "table").find("nested.a") != std::string::npos);
  CHECK_THROWS_AS(render(r, "xml"), error);
}

TEST_CASE("health and routing") {
  auto r = handle_request("GET", "/api/v1/health", "");
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["version"] == engine_version());
  CHECK(handle_request("GET", "/api/v1/nope", "").status == 404);
  CHECK(handle_request("GET", "/api/v1/lod", "").status == 405);
  CHECK(handle_request("POST", "/api/v1/lod", "{not json").status == 400);
  CHECK(http_status_for(deadline_exceeded) == 504);
  CHECK(http_status_for(empty_feasible_set) == 422);
}

TEST_CASE("validate-icc endpoint") {
  const json row1 = to_json(reference_rho(0.05, 0.025));
  auto out = api("/api/v1/validate-icc", {{"rho", row1}, {"J", 2}, {"K", 14}}, 200);
  CHECK(out["result"]["ok"] == true);
  CHECK(out["result"]["points"][0]["min_eigenvalue"].get<double>() > 0);

  json bad = row1;
  bad["rho1E"] = 0.06;
  out = api("/api/v1/validate-icc", {{"rho", bad}, {"J", 2}, {"K", 14}}, 422);
  CHECK(out["error"]["code"] == "CONSTRAINT_VIOLATION");
  CHECK(out["error"]["message"].get<std::string>().rfind("(i)", 0) == 0);

  const json eig = to_json(IccVector{0.1, 0, 0.1, 0, 0, 0, 0.9999});
  out = api("/api/v1/validate-icc", {{"rho", eig}, {"J", 2}, {"K", 2}}, 422);
  CHECK(out["error"]["code"] == "NOT_POSITIVE_DEFINITE");
  CHECK(out["error"]["message"].get<std::string>().rfind("eigenvalue", 0) == 0);

  api("/api/v1/validate-icc", {{"rho", row1}, {"J", 2}}, 400);
  api("/api/v1/validate-icc", {{"box", to_json(reference_box(0.05, 0.1, 0.025, 0.04))}, {"J", 2}, {"K", 10}}, 200);
}

TEST_CASE("api results equal cli results") {
  const auto run = cli(row1_flags("lod"));
  REQUIRE(run.code == 0);
  const json cli_out = json::parse(run.out);
  const json api_out = api("/api/v1/lod", cli_out["config"], 200);
  CHECK(api_out["result"].dump() == cli_out["result"].dump());

  json c = reference_config("crxo", 2);
  c["budget"]["B"] = 1000;
  CHECK(api("/api/v1/lod", c, 422)["error"]["code"] == "EMPTY_FEASIBLE_SET");

  json m = reference_config("crxo", 2);
  m.erase("rho");
  m["box"] = to_json(reference_box(0.05, 0.1, 0.025, 0.04));
  const json a = api("/api/v1/mmd", m, 200)["result"];
  CHECK(a.dump() == cmd_mmd(config_from_json(m)).dump());

  ServiceOptions quick;
  quick.deadline_s = 1e-9;
  CHECK(api("/api/v1/mmd", m, 504, quick)["error"]["code"] == "DEADLINE");
}

TEST_CASE("concurrent identical requests agree") {
  const std::string body = reference_config("pa", 4).dump();
  std::vector<std::future<ApiResponse>> jobs;
  for (int n = 0; n < 4; ++n)
    jobs.push_back(std::async(std::launch::async, [&] { return handle_request("POST", "/api/v1/lod", body); }));
  std::string first;
  for (auto& j : jobs) {
    const json r = json::parse(j.get().body);
    if (first.empty()) first = r["result"].dump();
    CHECK(r["result"].dump() == first);
  }
}

TEST_CASE("live server answers with cors headers") {
  std::promise<std::pair<int, std::function<void()>>> ready;
  auto f = ready.get_future();
  std::thread t([&] { serve("127.0.0.1", 0, {}, [&](int port, std::function<void()> stop) { ready.set_value({port, stop}); }); });
  auto [port, stop] = f.get();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/v1/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  res = client.Options("/api/v1/lod");
  REQUIRE(res);
  CHECK(res->status == 204);
  stop();
  t.join();
}
