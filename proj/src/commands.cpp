#include "lcrt/commands.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "lcrt/error.hpp"

namespace lcrt {

namespace {

std::pair<int, int> fixed_design(const RunConfig& c) {
  if (!c.I || !c.K) throw error(invalid_input, "this command needs design.I and design.K", c.I ? "design.K" : "design.I");
  return {*c.I, *c.K};
}

MaximinOptions mmd_options(const RunConfig& c, std::chrono::steady_clock::time_point deadline) {
  MaximinOptions o;
  o.seeds = c.seeds;
  o.trace = c.verbose;
  o.deadline = deadline;
  return o;
}

DesignSolution decimal_for(const RunConfig& c, const TrialLayout& layout) {
  if (closed_form(layout.family)) return decimal_lod_closed(layout.family, c.point(), c.econ, c.budget, layout.J, layout.pi);
  return decimal_lod_numeric(layout, c.point(), c.econ, c.budget);
}

json lod_result(const RunConfig& c) {
  c.validate();
  const IccVector& rho = c.point();
  TrialLayout layout = c.layout;
  json out;
  DesignSolution integer;
  if (c.search_J) {
    integer = lod_search_over_J(layout, c.search_J->first, c.search_J->second, rho, c.econ, c.budget);
    layout.J = integer.J;
    out["search_J"] = {c.search_J->first, c.search_J->second};
  } else {
    integer = lod_search(layout, rho, c.econ, c.budget);
  }
  out["integer"] = to_json(integer);
  out["decimal"] = to_json(decimal_for(c, layout));
  return out;
}

json mmd_result(const RunConfig& c, std::chrono::steady_clock::time_point deadline) {
  c.validate();
  const MaximinSolution s = mmd_search(c.layout, c.range(), c.econ, c.budget, mmd_options(c, deadline));
  return to_json(s, c.verbose);
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt(v.get<double>());
  return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array() && !j.empty() && j.front().is_structured()) {
    for (std::size_t n = 0; n < j.size(); ++n) flatten(j[n], prefix + "[" + std::to_string(n) + "]", out);
  } else if (j.is_array()) {
    std::string s;
    for (std::size_t n = 0; n < j.size(); ++n) s += (n ? " " : "") + cell(j[n]);
    out.emplace_back(prefix, s);
  } else {
    out.emplace_back(prefix, cell(j));
  }
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

json cmd_variance(const RunConfig& c) {
  c.validate();
  auto [I, K] = fixed_design(c);
  const VarianceReport r = design_variance(c.layout, I, K, c.point(), c.econ);
  json out = to_json(r);
  out["I"] = I;
  out["K"] = K;
  out["J"] = c.layout.J;
  out["power"] = power(r.variance, c.econ.beta1, c.econ.alpha);
  return out;
}

json cmd_power(const RunConfig& c) {
  c.validate();
  auto [I, K] = fixed_design(c);
  const double v = design_variance(c.layout, I, K, c.point(), c.econ).variance;
  return {{"I", I}, {"K", K}, {"J", c.layout.J}, {"variance", v}, {"power", power(v, c.econ.beta1, c.econ.alpha)}};
}

json cmd_lod(const RunConfig& c) { return lod_result(c); }

json cmd_mmd(const RunConfig& c) {
  return mmd_result(c, std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                             std::chrono::duration<double>(c.deadline_s)));
}

RunConfig sweep_point(const RunConfig& c, SweepAxis axis, double value) {
  RunConfig p = c;
  auto cac = [value](IccVector& r) {
    r.rho1E = value * r.rho0E;
    r.rho1C = value * r.rho0C;
    r.rho1EC = value * r.rho0EC;
  };
  switch (axis) {
    case SweepAxis::cac:
      if (!(value >= 0 && value <= 1)) throw error(invalid_input, "cac must lie in [0, 1]", "sweep.grid");
      if (p.rho) cac(*p.rho);
      if (p.box) {
        cac(p.box->min);
        cac(p.box->max);
      }
      break;
    case SweepAxis::lambda_r:
      if (!(value > 0)) throw error(invalid_input, "lambda_r must be positive", "sweep.grid");
      if (!(p.econ.lambda > 0)) throw error(invalid_input, "lambda_r sweep needs lambda > 0", "econ.lambda");
      p.econ.sigmaC = p.econ.lambda * p.econ.sigmaE / value;
      break;
    case SweepAxis::rho1E_max: {
      if (!p.box) throw error(invalid_input, "rho1E_max sweep needs an icc box", "box");
      const double ratio = p.box->max.rho1E > 0 ? p.box->max.rho1C / p.box->max.rho1E : 0.8;
      p.box->max.rho1E = value;
      p.box->max.rho1C = ratio * value;
      if (p.box->max.rho1E < p.box->min.rho1E || p.box->max.rho1C < p.box->min.rho1C)
        throw error(invalid_input, "rho1E_max falls below the box minimum", "sweep.grid");
      break;
    }
  }
  return p;
}

json cmd_sweep(const RunConfig& c) {
  c.validate();
  if (!c.sweep) throw error(invalid_input, "sweep needs an axis and a grid", "sweep");
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(c.deadline_s));
  const bool robust = c.box.has_value();
  if (!robust && !c.rho) throw error(invalid_input, "sweep needs rho or box", "rho");
  json rows = json::array();
  for (double v : c.sweep->grid) {
    const RunConfig p = sweep_point(c, c.sweep->axis, v);
    json row = {{"value", v}};
    if (robust) {
      json m = mmd_result(p, deadline);
      row["J"] = m["J"];
      row["I"] = m["I"];
      row["K"] = m["K"];
      row["re"] = m["worst_re"];
    } else {
      if (std::chrono::steady_clock::now() > deadline)
        throw error(deadline_exceeded, "sweep exceeded its wall-clock budget", "deadline");
      json l = lod_result(p);
      row["J"] = l["integer"]["J"];
      row["I"] = l["integer"]["I"];
      row["K"] = l["integer"]["K"];
      row["power"] = l["integer"]["power"];
      row["decimal_I"] = l["decimal"]["I"];
      row["decimal_K"] = l["decimal"]["K"];
      row["decimal_power"] = l["decimal"]["power"];
    }
    rows.push_back(row);
  }
  return {{"axis", axis_name(c.sweep->axis)}, {"mode", robust ? "mmd" : "lod"}, {"rows", rows}};
}

json validate_icc_report(const json& body) {
  if (!body.is_object()) throw error(malformed_request, "body must be a json object", "");
  for (auto it = body.begin(); it != body.end(); ++it)
    if (it.key() != "rho" && it.key() != "box" && it.key() != "J" && it.key() != "K")
      throw error(invalid_input, "unknown key '" + it.key() + "'", it.key());
  if (body.contains("rho") == body.contains("box")) throw error(invalid_input, "give exactly one of rho or box", "rho");
  auto whole = [&](const char* key) {
    if (!body.contains(key) || !body.at(key).is_number_integer() || body.at(key).get<long>() < 1 ||
        body.at(key).get<long>() > 100000)
      throw error(invalid_input, std::string(key) + " must be a positive integer", key);
    return int(body.at(key).get<long>());
  };
  const int J = whole("J"), K = whole("K");
  std::vector<std::pair<std::string, IccVector>> points;
  if (body.contains("rho")) {
    points.emplace_back("rho", icc_from_json(body.at("rho"), "rho"));
  } else {
    const json& b = body.at("box");
    if (!b.is_object() || !b.contains("min") || !b.contains("max")) throw error(invalid_input, "box needs min and max", "box");
    IccBox box{icc_from_json(b.at("min"), "box.min"), icc_from_json(b.at("max"), "box.max")};
    box.validate();
    points.emplace_back("box.min", box.min);
    points.emplace_back("box.max", box.max);
  }
  static const char* ids[] = {"range", "(i)", "(ii)", "(iii)", "(iv)", "(v)"};
  json reports = json::array();
  json violations = json::array();
  bool ok = true;
  for (const auto& [where, r] : points) {
    const auto v = validate_ordering(r);
    json cons = json::array();
    for (const char* id : ids) {
      json entry = {{"id", id}, {"ok", true}};
      for (const auto& x : v)
        if (x.constraint == id) {
          entry["ok"] = false;
          entry["field"] = where + "." + x.field;
          entry["message"] = x.message;
        }
      cons.push_back(entry);
    }
    for (const auto& x : v)
      violations.push_back({{"constraint", x.constraint}, {"field", where + "." + x.field}, {"message", x.message}});
    const EigenSpectrum s = eigen_spectrum(r, J, K);
    const bool pd = s.min() > pd_tolerance;
    if (!pd)
      violations.push_back({{"constraint", "eigenvalue"},
                            {"field", where},
                            {"message", "smallest eigenvalue " + fmt(s.min()) + " is not positive"}});
    ok = ok && v.empty() && pd;
    reports.push_back({{"point", where},
                       {"constraints", cons},
                       {"min_eigenvalue", s.min()},
                       {"positive_definite", pd},
                       {"spectrum", to_json(s)}});
  }
  return {{"ok", ok}, {"J", J}, {"K", K}, {"points", reports}, {"violations", violations}};
}

json run_command(const std::string& name, const RunConfig& c) {
  if (name == "variance") return cmd_variance(c);
  if (name == "power") return cmd_power(c);
  if (name == "lod") return cmd_lod(c);
  if (name == "mmd") return cmd_mmd(c);
  if (name == "sweep") return cmd_sweep(c);
  throw error(invalid_input, "unknown command '" + name + "'", "command");
}

std::string render(const json& result, const std::string& format) {
  if (format == "json") return result.dump(2) + "\n";
  if (format != "csv" && format != "table") throw error(invalid_input, "format must be json, csv or table", "format");
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  if (result.contains("rows") && result.at("rows").is_array()) {
    for (const auto& r : result.at("rows")) {
      std::vector<std::pair<std::string, std::string>> f;
      flatten(r, "", f);
      if (header.empty())
        for (auto& [k, v] : f) header.push_back(k);
      std::vector<std::string> line;
      for (auto& [k, v] : f) line.push_back(v);
      rows.push_back(line);
    }
  } else if (format == "csv") {
    std::vector<std::pair<std::string, std::string>> f;
    flatten(result, "", f);
    std::vector<std::string> line;
    for (auto& [k, v] : f) {
      header.push_back(k);
      line.push_back(v);
    }
    rows.push_back(line);
  } else {
    std::vector<std::pair<std::string, std::string>> f;
    flatten(result, "", f);
    header = {"field", "value"};
    for (auto& [k, v] : f) rows.push_back({k, v});
  }
  std::ostringstream out;
  if (format == "csv") {
    for (std::size_t n = 0; n < header.size(); ++n) out << (n ? "," : "") << quote(header[n]);
    out << "\n";
    for (const auto& r : rows) {
      for (std::size_t n = 0; n < r.size(); ++n) out << (n ? "," : "") << quote(r[n]);
      out << "\n";
    }
    return out.str();
  }
  std::vector<std::size_t> w(header.size(), 0);
  for (std::size_t n = 0; n < header.size(); ++n) w[n] = header[n].size();
  for (const auto& r : rows)
    for (std::size_t n = 0; n < r.size() && n < w.size(); ++n) w[n] = std::max(w[n], r[n].size());
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t n = 0; n < r.size() && n < w.size(); ++n) {
      out << r[n];
      if (n + 1 < r.size()) out << std::string(w[n] - r[n].size() + 2, ' ');
    }
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

}  // namespace lcrt
