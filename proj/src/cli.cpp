#include "lcrt/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <sstream>

#include "lcrt/commands.hpp"
#include "lcrt/error.hpp"
#include "lcrt/parallel.hpp"
#include "lcrt/service.hpp"
#include "lcrt/tables.hpp"

#ifndef LCRT_DATA_DIR
#define LCRT_DATA_DIR "data"
#endif

namespace lcrt {

namespace {

std::string slurp(const std::string& path, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(invalid_input, "cannot read " + path, field);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double to_number(const std::string& s, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw error(invalid_input, "'" + s + "' is not a number", field);
  }
}

int to_int(const std::string& s, const std::string& field) {
  const double v = to_number(s, field);
  if (v != std::floor(v)) throw error(invalid_input, "'" + s + "' is not an integer", field);
  return int(v);
}

json icc_flag(const std::string& s, const std::string& field) {
  std::vector<double> v;
  std::stringstream in(s);
  std::string t;
  while (std::getline(in, t, ',')) v.push_back(to_number(t, field));
  if (v.size() != 7) throw error(invalid_input, "expected 7 comma-separated icc values", field);
  json j;
  for (int k = 0; k < 7; ++k) j[icc_names[k]] = v[k];
  return j;
}

// every flag is kept as text; empty means not given
struct Flags {
  std::map<std::string, std::string> v;
  std::vector<std::string> seeds;
  bool verbose = false;
  bool diff = false;
  int table = 0;

  bool has(const std::string& k) const {
    auto it = v.find(k);
    return it != v.end() && !it->second.empty();
  }
  const std::string& get(const std::string& k) const { return v.at(k); }
};

void add_common(CLI::App* c, Flags& f) {
  auto opt = [&](const std::string& name, const std::string& help) { c->add_option("--" + name, f.v[name], help); };
  opt("config", "json config file; flags override its values");
  opt("format", "json, csv or table");
  opt("family", "crxo, pa, sw or sw-incomplete");
  opt("J", "number of periods");
  opt("pi", "allocation fraction, e.g. 1/2");
  opt("Q", "stepped wedge sequences");
  opt("pattern", "design pattern csv (0/1/. cells)");
  opt("stagger-tail", "incomplete sw: trailing periods dropped by the first half of clusters");
  opt("stagger-head", "incomplete sw: leading periods dropped by the second half of clusters");
  opt("rho", "rho0E,rho1E,rho0C,rho1C,rho0EC,rho1EC,rho2EC");
  opt("rho-min", "lower corner of the icc box");
  opt("rho-max", "upper corner of the icc box");
  opt("sigmaE", "effect standard deviation");
  opt("sigmaC", "cost standard deviation");
  opt("lambda", "ceiling ratio");
  opt("beta1", "incremental net monetary benefit");
  opt("alpha", "two-sided type I error");
  opt("B", "total budget");
  opt("c1", "cost per cluster");
  opt("c2", "cost per individual per period");
  opt("I-max", "largest number of clusters");
  opt("K-max", "largest cluster-period size");
  opt("I", "number of clusters");
  opt("K", "cluster-period size");
  opt("search-J", "J range lo..hi");
  opt("deadline", "wall-clock budget in seconds");
  opt("axis", "sweep axis: cac, lambda_r or rho1E_max");
  opt("grid", "sweep values: a,b,c or lo:hi:step");
  opt("threads", "worker threads (also CE_LCRT_THREADS)");
  c->add_option("--seed", f.seeds, "extra maximin starting point (7 values), repeatable");
  c->add_flag("--verbose", f.verbose, "include the inner optimizer trace");
}

json flags_to_json(const Flags& f) {
  json j = json::object();
  auto set = [&](const char* flag, const char* section, const char* key, bool whole) {
    if (!f.has(flag)) return;
    const std::string field = std::string(section) + "." + key;
    j[section][key] = whole ? json(to_int(f.get(flag), field)) : json(to_number(f.get(flag), field));
  };
  if (f.has("family")) j["layout"]["family"] = f.get("family");
  set("J", "layout", "J", true);
  set("Q", "layout", "Q", true);
  if (f.has("pi")) j["layout"]["pi"] = f.get("pi");
  if (f.has("pattern")) {
    const DesignPattern p = parse_pattern_csv(slurp(f.get("pattern"), "layout.pattern"));
    json rows = json::array();
    for (const auto& r : p.rows) {
      std::string s;
      for (Cell c : r) s.push_back(char(c));
      rows.push_back(s);
    }
    j["layout"]["pattern"] = rows;
    if (!f.has("family")) j["layout"]["family"] = "sw-incomplete";
  }
  if (f.has("stagger-tail")) j["layout"]["stagger"]["tail_first_half"] = to_int(f.get("stagger-tail"), "layout.stagger");
  if (f.has("stagger-head")) j["layout"]["stagger"]["head_second_half"] = to_int(f.get("stagger-head"), "layout.stagger");
  if (f.has("rho")) j["rho"] = icc_flag(f.get("rho"), "rho");
  if (f.has("rho-min")) j["box"]["min"] = icc_flag(f.get("rho-min"), "box.min");
  if (f.has("rho-max")) j["box"]["max"] = icc_flag(f.get("rho-max"), "box.max");
  set("sigmaE", "econ", "sigmaE", false);
  set("sigmaC", "econ", "sigmaC", false);
  set("lambda", "econ", "lambda", false);
  set("beta1", "econ", "beta1", false);
  set("alpha", "econ", "alpha", false);
  set("B", "budget", "B", false);
  set("c1", "budget", "c1", false);
  set("c2", "budget", "c2", false);
  set("I-max", "budget", "I_max", true);
  set("K-max", "budget", "K_max", true);
  set("I", "design", "I", true);
  set("K", "design", "K", true);
  if (f.has("search-J")) {
    auto [lo, hi] = parse_range(f.get("search-J"));
    j["options"]["search_J"] = {lo, hi};
  }
  set("deadline", "options", "deadline_s", false);
  if (f.verbose) j["options"]["verbose"] = true;
  if (!f.seeds.empty()) {
    j["options"]["seeds"] = json::array();
    for (const auto& s : f.seeds) j["options"]["seeds"].push_back(icc_flag(s, "options.seeds"));
  }
  if (f.has("axis")) j["sweep"]["axis"] = f.get("axis");
  if (f.has("grid")) j["sweep"]["grid"] = parse_grid(f.get("grid"));
  return j;
}

RunConfig load_config(const Flags& f) {
  json base = json::object();
  if (f.has("config")) {
    try {
      base = json::parse(slurp(f.get("config"), "config"));
    } catch (const json::exception& e) {
      throw error(malformed_request, std::string("config is not valid json: ") + e.what(), "config");
    }
    // accept a previous run's output as input
    if (base.is_object() && base.contains("config") && base.contains("result")) base = base.at("config");
  }
  merge_into(base, flags_to_json(f));
  return config_from_json(base);
}

std::string format_of(const Flags& f, const std::string& fallback) { return f.has("format") ? f.get("format") : fallback; }

void apply_threads(const Flags& f) {
  apply_thread_env();
  if (f.has("threads")) set_threads(to_int(f.get("threads"), "threads"));
}

int run_tables(const Flags& f, std::ostream& out, std::ostream& err) {
  const int id = f.table;
  key_columns(id);
  const Table t = reproduce_table(id);
  const std::string fmt = format_of(f, "csv");
  if (!f.diff) {
    if (fmt == "csv") {
      out << table_csv(t);
    } else {
      json rows = json::array();
      for (const auto& r : t.rows) {
        json o;
        for (std::size_t n = 0; n < t.header.size(); ++n) o[t.header[n]] = r[n];
        rows.push_back(o);
      }
      out << render({{"table", id}, {"rows", rows}}, fmt);
    }
    return 0;
  }
  const std::string dir = f.has("golden-dir") ? f.get("golden-dir") : std::string(LCRT_DATA_DIR) + "/golden";
  const Table g = read_table_csv(dir + "/table" + std::to_string(id) + ".csv");
  const auto m = diff_tables(id, t, g);
  out << "key,column,expected,actual\n";
  for (const auto& x : m) out << x.key << "," << x.column << "," << x.expected << "," << x.actual << "\n";
  err << m.size() << " mismatch(es) against " << g.rows.size() << " reference rows\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cost-effectiveness design optimizer for longitudinal cluster randomized trials", "lcrt"};
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"variance", "variance of the INMB estimator with intermediates"},
      {"power", "power of a fixed design"},
      {"lod", "locally optimal design (decimal and integer)"},
      {"mmd", "maximin design over an icc box"},
      {"sweep", "lod or mmd across a parameter grid"}};
  for (auto [name, help] : commands) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], f);
  }
  CLI::App* tables = app.add_subcommand("tables", "reproduce a reference table as csv");
  tables->add_option("id", f.table, "table id: 2, 3, 4 or 5")->required();
  tables->add_flag("--diff", f.diff, "report cellwise mismatches against the bundled reference csv");
  tables->add_option("--golden-dir", f.v["golden-dir"], "directory holding tableN.csv");
  tables->add_option("--format", f.v["format"], "csv, json or table");
  tables->add_option("--threads", f.v["threads"], "worker threads");
  CLI::App* serve_cmd = app.add_subcommand("serve", "run the http service");
  serve_cmd->add_option("--bind", f.v["bind"], "host:port (also CE_LCRT_BIND)");
  serve_cmd->add_option("--deadline", f.v["deadline"], "per-request wall-clock budget in seconds");
  serve_cmd->add_option("--threads", f.v["threads"], "worker threads");

  std::vector<std::string> argv_s = {"lcrt"};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_s) argv.push_back(s.data());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    apply_threads(f);
    if (tables->parsed()) return run_tables(f, out, err);
    if (serve_cmd->parsed()) {
      ServiceOptions so;
      if (f.has("deadline")) so.deadline_s = to_number(f.get("deadline"), "deadline");
      auto [host, port] = parse_bind(f.has("bind") ? f.get("bind") : "");
      err << "listening on " << host << ":" << port << "\n";
      serve(host, port, so);
      return 0;
    }
    for (auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const RunConfig c = load_config(f);
      const json result = run_command(name, c);
      const std::string fmt = format_of(f, "json");
      if (fmt == "json")
        out << json{{"command", name}, {"config", to_json(c)}, {"result", result}}.dump(2) << "\n";
      else
        out << render(result, fmt);
      return 0;
    }
  } catch (const error& e) {
    err << json{{"status", "error"}, {"error", error_json(e.code(), e.what(), e.field())}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << json{{"status", "error"}, {"error", error_json("INTERNAL", e.what(), "")}}.dump() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace lcrt
