#include "lcrt/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "lcrt/error.hpp"

namespace lcrt {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw error(invalid_input, "expected an object", path);
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw error(invalid_input, "unknown key '" + it.key() + "'", join(path, it.key()));
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw error(invalid_input, "expected a number", path);
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number()) throw error(invalid_input, "expected an integer", path);
  const double v = j.get<double>();
  if (v != std::floor(v) || std::fabs(v) > 1e9) throw error(invalid_input, "expected an integer", path);
  return int(v);
}

template <class T, class F>
void maybe(const json& j, const char* key, const std::string& path, T& out, F read) {
  if (j.contains(key)) out = read(j.at(key), join(path, key));
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Fraction parse_fraction(const json& j, const std::string& path) {
  Fraction f;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) throw std::invalid_argument(s);
      std::size_t a = 0, b = 0;
      f.num = std::stol(s.substr(0, slash), &a);
      f.den = std::stol(s.substr(slash + 1), &b);
      if (a != slash || b != s.size() - slash - 1) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw error(invalid_input, "allocation must look like 1/2", path);
    }
  } else if (j.is_object()) {
    only_keys(j, path, {"num", "den"});
    f.num = integer(j.at("num"), join(path, "num"));
    f.den = integer(j.at("den"), join(path, "den"));
  } else {
    throw error(invalid_input, "allocation must be a string like 1/2", path);
  }
  if (f.den <= 0 || f.num <= 0 || f.num >= f.den) throw error(invalid_input, "allocation must be a fraction in (0,1)", path);
  return f;
}

std::string row_string(const std::vector<Cell>& row) {
  std::string s;
  for (Cell c : row) s.push_back(char(c));
  return s;
}

}  // namespace

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::cac: return "cac";
    case SweepAxis::lambda_r: return "lambda_r";
    case SweepAxis::rho1E_max: return "rho1E_max";
  }
  return "cac";
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "cac" || s == "CAC") return SweepAxis::cac;
  if (s == "lambda_r") return SweepAxis::lambda_r;
  if (s == "rho1E_max") return SweepAxis::rho1E_max;
  throw error(invalid_input, "unknown sweep axis '" + s + "'", "sweep.axis");
}

json to_json(const IccVector& r) {
  json j = json::object();
  auto a = r.to_array();
  for (int k = 0; k < 7; ++k) j[icc_names[k]] = a[k];
  return j;
}

IccVector icc_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw error(invalid_input, "expected an icc object", path);
  std::array<double, 7> a{};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(icc_names.begin(), icc_names.end(), it.key()) == icc_names.end())
      throw error(invalid_input, "unknown key '" + it.key() + "'", join(path, it.key()));
  for (int k = 0; k < 7; ++k) {
    if (!j.contains(icc_names[k])) throw error(invalid_input, "missing icc value", join(path, icc_names[k]));
    a[k] = number(j.at(icc_names[k]), join(path, icc_names[k]));
    if (!std::isfinite(a[k])) throw error(invalid_input, "icc must be finite", join(path, icc_names[k]));
  }
  return IccVector::from_array(a);
}

json to_json(const IccBox& b) { return {{"min", to_json(b.min)}, {"max", to_json(b.max)}}; }

IccBox box_from_json(const json& j, const std::string& path) {
  only_keys(j, path, {"min", "max"});
  if (!j.contains("min") || !j.contains("max")) throw error(invalid_input, "box needs min and max", path);
  IccBox b{icc_from_json(j.at("min"), join(path, "min")), icc_from_json(j.at("max"), join(path, "max"))};
  b.validate();
  return b;
}

json to_json(const TrialLayout& l) {
  json j = {{"family", family_name(l.family)}, {"J", l.J}};
  if (l.family == Family::crxo || l.family == Family::pa)
    j["pi"] = std::to_string(l.pi.num) + "/" + std::to_string(l.pi.den);
  if (l.family == Family::sw || l.family == Family::sw_incomplete) j["Q"] = l.Q;
  if (l.family == Family::sw_incomplete) {
    if (l.pattern) {
      json rows = json::array();
      for (const auto& r : l.pattern->rows) rows.push_back(row_string(r));
      j["pattern"] = rows;
    } else {
      j["stagger"] = {{"tail_first_half", l.stagger.tail_first_half}, {"head_second_half", l.stagger.head_second_half}};
    }
  }
  return j;
}

TrialLayout layout_from_json(const json& j) {
  const std::string p = "layout";
  only_keys(j, p, {"family", "J", "pi", "Q", "pattern", "stagger"});
  TrialLayout l;
  if (!j.contains("family") || !j.at("family").is_string()) throw error(invalid_input, "family is required", "layout.family");
  l.family = parse_family(j.at("family").get<std::string>());
  maybe(j, "J", p, l.J, integer);
  maybe(j, "Q", p, l.Q, integer);
  if (j.contains("pi")) l.pi = parse_fraction(j.at("pi"), "layout.pi");
  if (j.contains("pattern")) {
    const json& rows = j.at("pattern");
    if (!rows.is_array()) throw error(invalid_input, "pattern must be an array of row strings", "layout.pattern");
    std::string csv;
    for (const auto& r : rows) {
      if (!r.is_string()) throw error(invalid_input, "pattern must be an array of row strings", "layout.pattern");
      const std::string s = r.get<std::string>();
      for (std::size_t n = 0; n < s.size(); ++n) {
        if (n) csv.push_back(',');
        csv.push_back(s[n]);
      }
      csv.push_back('\n');
    }
    l.pattern = parse_pattern_csv(csv);
    if (!j.contains("J")) l.J = l.pattern->periods();
  }
  if (j.contains("stagger")) {
    const json& s = j.at("stagger");
    only_keys(s, "layout.stagger", {"tail_first_half", "head_second_half"});
    maybe(s, "tail_first_half", "layout.stagger", l.stagger.tail_first_half, integer);
    maybe(s, "head_second_half", "layout.stagger", l.stagger.head_second_half, integer);
  }
  return l;
}

json to_json(const EconModel& e) {
  return {{"sigmaE", e.sigmaE}, {"sigmaC", e.sigmaC}, {"lambda", e.lambda}, {"beta1", e.beta1}, {"alpha", e.alpha}};
}

json to_json(const BudgetModel& b) {
  return {{"B", b.B}, {"c1", b.c1}, {"c2", b.c2}, {"I_max", b.I_max}, {"K_max", b.K_max}};
}

void RunConfig::validate() const {
  layout.validate();
  econ.validate();
  budget.validate();
  if (rho) {
    auto v = validate_ordering(*rho);
    if (!v.empty()) throw error(constraint_violation, v.front().constraint + ": " + v.front().message, "rho." + v.front().field);
  }
  if (box) box->validate();
  if (I && *I < 1) throw error(invalid_input, "I must be positive", "design.I");
  if (K && *K < 1) throw error(invalid_input, "K must be positive", "design.K");
  if (search_J && (search_J->first < 1 || search_J->first > search_J->second))
    throw error(invalid_input, "J range must be lo..hi with 1 <= lo <= hi", "options.search_J");
  if (!(deadline_s > 0)) throw error(invalid_input, "deadline must be positive", "options.deadline_s");
}

const IccVector& RunConfig::point() const {
  if (!rho) throw error(invalid_input, "this command needs a point icc vector", "rho");
  return *rho;
}

const IccBox& RunConfig::range() const {
  if (!box) throw error(invalid_input, "this command needs an icc box", "box");
  return *box;
}

json to_json(const RunConfig& c) {
  json j;
  j["layout"] = to_json(c.layout);
  if (c.rho) j["rho"] = to_json(*c.rho);
  if (c.box) j["box"] = to_json(*c.box);
  j["econ"] = to_json(c.econ);
  j["budget"] = to_json(c.budget);
  if (c.I || c.K) {
    json d = json::object();
    if (c.I) d["I"] = *c.I;
    if (c.K) d["K"] = *c.K;
    j["design"] = d;
  }
  json o = {{"verbose", c.verbose}, {"deadline_s", c.deadline_s}};
  if (c.search_J) o["search_J"] = {c.search_J->first, c.search_J->second};
  if (!c.seeds.empty()) {
    o["seeds"] = json::array();
    for (const auto& s : c.seeds) o["seeds"].push_back(to_json(s));
  }
  j["options"] = o;
  if (c.sweep) j["sweep"] = {{"axis", axis_name(c.sweep->axis)}, {"grid", c.sweep->grid}};
  return j;
}

RunConfig config_from_json(const json& j) {
  only_keys(j, "", {"layout", "rho", "box", "econ", "budget", "design", "options", "sweep"});
  RunConfig c;
  if (!j.contains("layout")) throw error(invalid_input, "layout is required", "layout");
  c.layout = layout_from_json(j.at("layout"));
  if (j.contains("rho")) c.rho = icc_from_json(j.at("rho"), "rho");
  if (j.contains("box")) c.box = box_from_json(j.at("box"), "box");
  if (j.contains("econ")) {
    const json& e = j.at("econ");
    only_keys(e, "econ", {"sigmaE", "sigmaC", "lambda", "beta1", "alpha"});
    maybe(e, "sigmaE", "econ", c.econ.sigmaE, number);
    maybe(e, "sigmaC", "econ", c.econ.sigmaC, number);
    maybe(e, "lambda", "econ", c.econ.lambda, number);
    maybe(e, "beta1", "econ", c.econ.beta1, number);
    maybe(e, "alpha", "econ", c.econ.alpha, number);
  }
  if (j.contains("budget")) {
    const json& b = j.at("budget");
    only_keys(b, "budget", {"B", "c1", "c2", "I_max", "K_max"});
    maybe(b, "B", "budget", c.budget.B, number);
    maybe(b, "c1", "budget", c.budget.c1, number);
    maybe(b, "c2", "budget", c.budget.c2, number);
    maybe(b, "I_max", "budget", c.budget.I_max, integer);
    maybe(b, "K_max", "budget", c.budget.K_max, integer);
  }
  if (j.contains("design")) {
    const json& d = j.at("design");
    only_keys(d, "design", {"I", "K"});
    if (d.contains("I")) c.I = integer(d.at("I"), "design.I");
    if (d.contains("K")) c.K = integer(d.at("K"), "design.K");
  }
  if (j.contains("options")) {
    const json& o = j.at("options");
    only_keys(o, "options", {"verbose", "deadline_s", "search_J", "seeds"});
    if (o.contains("verbose")) {
      if (!o.at("verbose").is_boolean()) throw error(invalid_input, "expected a boolean", "options.verbose");
      c.verbose = o.at("verbose").get<bool>();
    }
    maybe(o, "deadline_s", "options", c.deadline_s, number);
    if (o.contains("search_J")) {
      const json& r = o.at("search_J");
      if (!r.is_array() || r.size() != 2) throw error(invalid_input, "search_J must be [lo, hi]", "options.search_J");
      c.search_J = std::pair{integer(r[0], "options.search_J"), integer(r[1], "options.search_J")};
    }
    if (o.contains("seeds")) {
      const json& s = o.at("seeds");
      if (!s.is_array()) throw error(invalid_input, "seeds must be an array", "options.seeds");
      for (std::size_t n = 0; n < s.size(); ++n)
        c.seeds.push_back(icc_from_json(s[n], "options.seeds[" + std::to_string(n) + "]"));
    }
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    only_keys(s, "sweep", {"axis", "grid"});
    SweepSpec sp;
    if (!s.contains("axis") || !s.at("axis").is_string()) throw error(invalid_input, "sweep axis is required", "sweep.axis");
    sp.axis = parse_axis(s.at("axis").get<std::string>());
    if (!s.contains("grid") || !s.at("grid").is_array() || s.at("grid").empty())
      throw error(invalid_input, "sweep grid must be a non-empty array", "sweep.grid");
    for (const auto& v : s.at("grid")) sp.grid.push_back(number(v, "sweep.grid"));
    c.sweep = sp;
  }
  return c;
}

void merge_into(json& base, const json& over) {
  if (!base.is_object() || !over.is_object()) {
    base = over;
    return;
  }
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object() && it.key() != "rho")
      merge_into(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

json to_json(const DesignSolution& s) {
  json j;
  j["kind"] = s.kind == SolutionKind::decimal ? "DecimalLOD" : "IntegerLOD";
  j["J"] = s.J;
  if (s.kind == SolutionKind::integer) {
    j["I"] = int(s.I);
    j["K"] = int(s.K);
  } else {
    j["I"] = finite_or_null(s.I);
    j["K"] = finite_or_null(s.K);
    j["interior"] = s.interior;
    j["theta"] = finite_or_null(s.theta);
  }
  j["variance"] = finite_or_null(s.variance);
  j["power"] = finite_or_null(s.power);
  return j;
}

json to_json(const MaximinSolution& s, bool with_trace) {
  json j = {{"I", s.I}, {"K", s.K}, {"J", s.J}, {"worst_re", s.worst_re}, {"worst_rho", to_json(s.worst_rho)},
            {"evaluated", s.evaluated}};
  if (with_trace) {
    json t = json::array();
    for (const auto& e : s.inner_trace)
      t.push_back({{"start", to_json(e.start)}, {"end", to_json(e.end)}, {"re", finite_or_null(e.re)}});
    j["inner_trace"] = t;
  }
  return j;
}

json to_json(const VarianceReport& r) {
  json j = {{"variance", r.variance}};
  if (r.has_intermediates) {
    const auto& m = r.intermediates;
    j["intermediates"] = {{"kappaE", m.kappa.E}, {"kappaC", m.kappa.C}, {"kappaEC", m.kappa.EC},
                          {"Delta", m.Delta},    {"DeltaStar", m.DeltaStar}, {"phi", m.phi},
                          {"eta", m.eta},        {"U", m.U},                 {"V", m.V},
                          {"W", m.W}};
  }
  return j;
}

json to_json(const EigenSpectrum& s) {
  json vals = json::array();
  for (auto [v, m] : s.with_multiplicity()) vals.push_back({{"value", v}, {"multiplicity", m}});
  return {{"J", s.J},
          {"K", s.K},
          {"first_plus", s.first_plus},
          {"first_minus", s.first_minus},
          {"second_plus", s.second_plus},
          {"second_minus", s.second_minus},
          {"third_plus", s.third_plus},
          {"third_minus", s.third_minus},
          {"min", s.min()},
          {"eigenvalues", vals}};
}

json error_json(const std::string& code, const std::string& message, const std::string& field) {
  json e = {{"code", code}, {"message", message}};
  e["field"] = field.empty() ? json(nullptr) : json(field);
  return e;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::stringstream in(s);
      std::string a, b, c;
      std::getline(in, a, ':');
      std::getline(in, b, ':');
      std::getline(in, c, ':');
      const double lo = std::stod(a), hi = std::stod(b), step = std::stod(c);
      if (!(step > 0) || hi < lo) throw std::invalid_argument(s);
      const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
      if (n > 100000) throw std::invalid_argument(s);
      for (long k = 0; k <= n; ++k) out.push_back(lo + k * step);
    } else {
      std::stringstream in(s);
      std::string t;
      while (std::getline(in, t, ',')) out.push_back(std::stod(t));
    }
  } catch (const std::exception&) {
    throw error(invalid_input, "grid must be 'a,b,c' or 'lo:hi:step'", "sweep.grid");
  }
  if (out.empty()) throw error(invalid_input, "grid is empty", "sweep.grid");
  return out;
}

std::pair<int, int> parse_range(const std::string& s) {
  try {
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
      int v = std::stoi(s);
      return {v, v};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw error(invalid_input, "J range must look like 4..9", "options.search_J");
  }
}

}  // namespace lcrt
