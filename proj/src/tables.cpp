#include "lcrt/tables.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lcrt/error.hpp"

namespace lcrt {

namespace {

struct Pair {
  double r0, r1;
};
struct Range {
  double r0lo, r0hi, r1lo, r1hi;
};

const Pair pairs[] = {{0.05, 0.025}, {0.05, 0.040}, {0.10, 0.050}, {0.10, 0.080}, {0.20, 0.100}, {0.20, 0.160}};
const Range ranges[] = {{0.05, 0.10, 0.025, 0.040}, {0.05, 0.10, 0.025, 0.045}, {0.05, 0.20, 0.025, 0.040},
                        {0.05, 0.20, 0.025, 0.045}, {0.10, 0.20, 0.050, 0.080}, {0.10, 0.20, 0.050, 0.090}};

std::string num(double v, const char* f = "%g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string value(double v) { return num(v, "%.4f"); }

std::string normalize(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return num(v, "%.6g");
  } catch (const std::exception&) {
  }
  std::string low = s;
  for (char& ch : low) ch = char(std::tolower(static_cast<unsigned char>(ch)));
  return low;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t n = 0; n < line.size(); ++n) {
    const char ch = line[n];
    if (quoted) {
      if (ch == '"' && n + 1 < line.size() && line[n + 1] == '"') {
        cur.push_back('"');
        ++n;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

TrialLayout crxo_pa(Family f, int J) {
  TrialLayout l;
  l.family = f;
  l.J = J;
  return l;
}

TrialLayout stepped(int Q, int J) {
  TrialLayout l;
  l.family = Family::sw;
  l.Q = Q;
  l.J = J;
  return l;
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t n = 0; n < header.size(); ++n)
    if (header[n] == name) return int(n);
  return -1;
}

int key_columns(int id) {
  switch (id) {
    case 2: return 4;
    case 3: return 6;
    case 4: return 4;
    case 5: return 6;
  }
  throw error(invalid_input, "unknown table id " + std::to_string(id) + "; expected 2, 3, 4 or 5", "table");
}

double table_tolerance(int id) {
  key_columns(id);
  return (id == 2 || id == 4) ? 0.002 : 0.005;
}

EconModel reference_econ() { return {1, 3000, 20000, 4000, 0.05}; }
BudgetModel reference_budget() { return {}; }

IccVector reference_rho(double r0, double r1) { return {r0, r1, r0, r1, 0.4 * r0, 0.4 * r1, 0.5}; }

IccBox reference_box(double r0lo, double r0hi, double r1lo, double r1hi) {
  return {{r0lo, r1lo, 0.8 * r0lo, 0.8 * r1lo, 0.01, 0.005, 0.5}, {r0hi, r1hi, 0.8 * r0hi, 0.8 * r1hi, 0.02, 0.01, 0.8}};
}

Table reproduce_table(int id) {
  key_columns(id);
  const EconModel econ = reference_econ();
  const BudgetModel budget = reference_budget();
  Table t;
  if (id == 2) {
    t.header = {"family", "rho0E", "rho1E", "J", "I", "K", "power"};
    for (Family f : {Family::crxo, Family::pa})
      for (const Pair& p : pairs)
        for (int J : {2, 4, 6}) {
          const auto s = lod_search(crxo_pa(f, J), reference_rho(p.r0, p.r1), econ, budget);
          t.rows.push_back({family_name(f), num(p.r0), num(p.r1), std::to_string(J), num(s.I), num(s.K), value(s.power)});
        }
  } else if (id == 4) {
    t.header = {"Q", "rho0E", "rho1E", "scenario", "J", "I", "K", "power"};
    for (int Q : {3, 5, 7})
      for (const Pair& p : pairs)
        for (const char* sc : {"unconstrained", "J9"}) {
          const IccVector rho = reference_rho(p.r0, p.r1);
          const bool free = std::string(sc) == "unconstrained";
          const auto s = free ? lod_search_over_J(stepped(Q, 9), std::max(4, Q + 1), 9, rho, econ, budget)
                              : lod_search(stepped(Q, 9), rho, econ, budget);
          t.rows.push_back({std::to_string(Q), num(p.r0), num(p.r1), sc, std::to_string(s.J), num(s.I), num(s.K),
                            value(s.power)});
        }
  } else if (id == 3) {
    t.header = {"family", "rho0E_min", "rho0E_max", "rho1E_min", "rho1E_max", "J", "I", "K", "re"};
    for (Family f : {Family::crxo, Family::pa})
      for (const Range& r : ranges)
        for (int J : {2, 4, 6}) {
          const auto s = mmd_search(crxo_pa(f, J), reference_box(r.r0lo, r.r0hi, r.r1lo, r.r1hi), econ, budget);
          t.rows.push_back({family_name(f), num(r.r0lo), num(r.r0hi), num(r.r1lo), num(r.r1hi), std::to_string(J),
                            std::to_string(s.I), std::to_string(s.K), value(s.worst_re)});
        }
  } else {
    t.header = {"Q", "rho0E_min", "rho0E_max", "rho1E_min", "rho1E_max", "scenario", "J", "I", "K", "re"};
    for (int Q : {3, 5, 7})
      for (const Range& r : ranges)
        for (const char* sc : {"minimal", "J9"}) {
          const int J = std::string(sc) == "minimal" ? Q + 1 : 9;
          const auto s = mmd_search(stepped(Q, J), reference_box(r.r0lo, r.r0hi, r.r1lo, r.r1hi), econ, budget);
          t.rows.push_back({std::to_string(Q), num(r.r0lo), num(r.r0hi), num(r.r1lo), num(r.r1hi), sc, std::to_string(J),
                            std::to_string(s.I), std::to_string(s.K), value(s.worst_re)});
        }
  }
  return t;
}

std::string table_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t n = 0; n < t.header.size(); ++n) out << (n ? "," : "") << t.header[n];
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t n = 0; n < r.size(); ++n) out << (n ? "," : "") << r[n];
    out << "\n";
  }
  return out.str();
}

Table parse_table_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (t.header.empty())
      t.header = cells;
    else
      t.rows.push_back(cells);
  }
  return t;
}

Table read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(invalid_input, "cannot read " + path, "golden");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_table_csv(ss.str());
}

std::vector<Mismatch> diff_tables(int id, const Table& computed, const Table& golden) {
  const int keys = key_columns(id);
  const double tol = table_tolerance(id);
  auto key_of = [keys](const std::vector<std::string>& r) {
    std::string k;
    for (int n = 0; n < keys && n < int(r.size()); ++n) k += (n ? "/" : "") + normalize(r[n]);
    return k;
  };
  std::map<std::string, const std::vector<std::string>*> have;
  for (const auto& r : computed.rows) have[key_of(r)] = &r;
  const int plateau = golden.column("plateau");
  std::vector<Mismatch> out;
  for (const auto& g : golden.rows) {
    const std::string k = key_of(g);
    auto it = have.find(k);
    if (it == have.end()) {
      out.push_back({k, "row", "present", "missing"});
      continue;
    }
    const auto& c = *it->second;
    const bool floor_only = plateau >= 0 && plateau < int(g.size()) && g[plateau] == "1";
    const int last = int(computed.header.size()) - 1;
    for (int n = keys; n <= last; ++n) {
      const std::string& name = computed.header[n];
      const int gi = golden.column(name);
      if (gi < 0 || gi >= int(g.size())) continue;
      if (n == last) {
        const double e = std::stod(g[gi]), a = std::stod(c[n]);
        const bool ok = floor_only ? a >= e - tol : std::fabs(a - e) <= tol;
        if (!ok) out.push_back({k, name, g[gi], c[n]});
      } else if (!floor_only && normalize(g[gi]) != normalize(c[n])) {
        out.push_back({k, name, g[gi], c[n]});
      }
    }
  }
  return out;
}

}  // namespace lcrt
