#include "lcrt/design.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lcrt/error.hpp"

namespace lcrt {

std::string family_name(Family f) {
  switch (f) {
    case Family::crxo: return "CRXO";
    case Family::pa: return "PA";
    case Family::sw: return "SW";
    case Family::sw_incomplete: return "SW_INCOMPLETE";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  std::string u;
  for (char c : s) u += (c == '-') ? '_' : char(std::toupper(static_cast<unsigned char>(c)));
  if (u == "CRXO") return Family::crxo;
  if (u == "PA") return Family::pa;
  if (u == "SW") return Family::sw;
  if (u == "SW_INCOMPLETE") return Family::sw_incomplete;
  throw error(invalid_input, "unknown design family '" + s + "'", "layout.family");
}

bool closed_form(Family f) { return f == Family::crxo || f == Family::pa; }

void DesignPattern::validate() const {
  if (rows.empty()) throw error(invalid_input, "pattern has no rows", "pattern");
  const std::size_t J = rows.front().size();
  if (J == 0) throw error(invalid_input, "pattern has no periods", "pattern");
  std::vector<int> col_seen(J, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != J) throw error(invalid_input, "pattern rows have unequal length", "pattern");
    bool treated = false;
    int seen = 0;
    for (std::size_t j = 0; j < J; ++j) {
      if (r[j] == Cell::missing) continue;
      ++seen;
      ++col_seen[j];
      if (r[j] == Cell::treatment) treated = true;
      else if (treated)
        throw error(invalid_input, "pattern row " + std::to_string(i + 1) + " switches back to control", "pattern");
    }
    if (seen < 2)
      throw error(invalid_input, "pattern row " + std::to_string(i + 1) + " has fewer than two observed periods", "pattern");
  }
  for (std::size_t j = 0; j < J; ++j)
    if (col_seen[j] == 0)
      throw error(invalid_input, "pattern period " + std::to_string(j + 1) + " is never observed", "pattern");
}

static std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

DesignPattern parse_pattern_csv(const std::string& text) {
  std::string body = text;
  if (body.rfind("\xEF\xBB\xBF", 0) == 0) body.erase(0, 3);
  DesignPattern p;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<Cell> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      cell = trim(cell);
      if (cell == "0") row.push_back(Cell::control);
      else if (cell == "1") row.push_back(Cell::treatment);
      else if (cell == ".") row.push_back(Cell::missing);
      else throw error(invalid_input, "bad pattern cell '" + cell + "'", "pattern");
    }
    p.rows.push_back(std::move(row));
  }
  p.validate();
  return p;
}

std::string pattern_to_csv(const DesignPattern& p) {
  std::string out;
  for (const auto& r : p.rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out += ',';
      out += char(r[j]);
    }
    out += '\n';
  }
  return out;
}

static Schedule fill_schedule(const TrialLayout& layout, int I);

void TrialLayout::validate() const {
  auto check_pi = [&] {
    if (pi.den <= 0 || pi.num <= 0 || pi.num >= pi.den)
      throw error(invalid_input, "allocation must be a fraction in (0,1)", "layout.pi");
  };
  switch (family) {
    case Family::crxo:
      check_pi();
      if (J < 2 || J % 2 != 0) throw error(invalid_input, "CRXO needs an even number of periods", "layout.J");
      break;
    case Family::pa:
      check_pi();
      if (J < 1) throw error(invalid_input, "J must be positive", "layout.J");
      break;
    case Family::sw:
      if (Q < 1) throw error(invalid_input, "Q must be positive", "layout.Q");
      if (J < Q + 1) throw error(invalid_input, "stepped wedge needs J >= Q + 1", "layout.J");
      break;
    case Family::sw_incomplete:
      if (pattern) {
        pattern->validate();
        if (J != pattern->periods()) throw error(invalid_input, "J does not match the pattern width", "layout.J");
        break;
      }
      if (Q < 1) throw error(invalid_input, "Q must be positive", "layout.Q");
      if (J < Q + 1) throw error(invalid_input, "stepped wedge needs J >= Q + 1", "layout.J");
      if (stagger.tail_first_half < 0 || stagger.head_second_half < 0)
        throw error(invalid_input, "stagger offsets must be non-negative", "layout.stagger");
      {
        // the generated block must itself be a valid pattern
        Schedule s = fill_schedule(*this, cluster_step());
        DesignPattern p;
        for (int i = 0; i < s.clusters(); ++i) {
          std::vector<Cell> row;
          for (int j = 0; j < s.periods(); ++j)
            row.push_back(!s.observed(i, j) ? Cell::missing : (s.Z(i, j) ? Cell::treatment : Cell::control));
          p.rows.push_back(std::move(row));
        }
        p.validate();
      }
      break;
  }
}

int TrialLayout::cluster_step() const {
  switch (family) {
    case Family::crxo:
    case Family::pa: return int(pi.den / std::gcd(pi.num, pi.den));
    case Family::sw: return Q;
    case Family::sw_incomplete: return pattern ? pattern->clusters() : std::lcm(Q, 2);
  }
  return 1;
}

static Schedule fill_schedule(const TrialLayout& layout, int I) {
  const int step = layout.cluster_step();
  if (I < 1 || I % step != 0)
    throw error(invalid_input, "I = " + std::to_string(I) + " is not a multiple of " + std::to_string(step), "I");
  const int J = layout.J;
  Schedule s;
  s.Z = Eigen::MatrixXi::Zero(I, J);
  s.observed = Mask::Constant(I, J, true);
  const long n1 = long(I) * layout.pi.num / layout.pi.den;
  switch (layout.family) {
    case Family::crxo:
      for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j) s.Z(i, j) = ((j % 2 == 0) == (i < n1)) ? 1 : 0;
      break;
    case Family::pa:
      for (int i = 0; i < n1; ++i) s.Z.row(i).setOnes();
      break;
    case Family::sw:
    case Family::sw_incomplete:
      if (layout.family == Family::sw_incomplete && layout.pattern) {
        const auto& rows = layout.pattern->rows;
        const int block = I / int(rows.size());
        for (int i = 0; i < I; ++i)
          for (int j = 0; j < J; ++j) {
            Cell c = rows[i / block][j];
            s.observed(i, j) = c != Cell::missing;
            s.Z(i, j) = c == Cell::treatment ? 1 : 0;
          }
        break;
      }
      {
        const int per = I / layout.Q;
        for (int i = 0; i < I; ++i) {
          const int q = i / per;
          for (int j = q + 1; j < J; ++j) s.Z(i, j) = 1;
        }
      }
      if (layout.family == Family::sw_incomplete) {
        const int half = I / 2;
        for (int i = 0; i < I; ++i) {
          if (i < half)
            for (int j = std::max(0, J - layout.stagger.tail_first_half); j < J; ++j) s.observed(i, j) = false;
          else
            for (int j = 0; j < std::min(J, layout.stagger.head_second_half); ++j) s.observed(i, j) = false;
        }
        for (int i = 0; i < I; ++i)
          for (int j = 0; j < J; ++j)
            if (!s.observed(i, j)) s.Z(i, j) = 0;
      }
      break;
  }
  return s;
}

Schedule build_schedule(const TrialLayout& layout, int I) {
  layout.validate();
  return fill_schedule(layout, I);
}

DesignConstants design_constants(const Eigen::MatrixXi& Z) {
  DesignConstants d;
  d.U = double(Z.sum());
  for (int i = 0; i < Z.rows(); ++i) {
    const double r = Z.row(i).sum();
    d.V += r * r;
  }
  for (int j = 0; j < Z.cols(); ++j) {
    const double c = Z.col(j).sum();
    d.W += c * c;
  }
  return d;
}

void BudgetModel::validate() const {
  if (!(B > 0)) throw error(invalid_input, "budget must be positive", "budget.B");
  if (!(c1 > 0)) throw error(invalid_input, "cluster cost must be positive", "budget.c1");
  if (!(c2 > 0)) throw error(invalid_input, "individual cost must be positive", "budget.c2");
  if (I_max < 2) throw error(invalid_input, "I_max must be at least 2", "budget.I_max");
  if (K_max < 2) throw error(invalid_input, "K_max must be at least 2", "budget.K_max");
}

double periods_per_cluster(const TrialLayout& layout) {
  if (layout.family != Family::sw_incomplete) return layout.J;
  const int step = layout.cluster_step();
  return double(build_schedule(layout, step).observed_cells()) / step;
}

double cost_per_cluster(const TrialLayout& layout, double K, const BudgetModel& budget) {
  return budget.c1 + budget.c2 * K * periods_per_cluster(layout);
}

static double cost_with(double ppc, int I, int K, const BudgetModel& b) {
  // whole observed cells, so the comparison against B stays exact
  const double cells = std::round(ppc * I);
  return I * b.c1 + b.c2 * K * cells;
}

double design_cost(const TrialLayout& layout, int I, int K, const BudgetModel& budget) {
  return cost_with(periods_per_cluster(layout), I, K, budget);
}

std::vector<Candidate> feasible_designs(const TrialLayout& layout, const BudgetModel& budget) {
  budget.validate();
  const int step = layout.cluster_step();
  const double ppc = periods_per_cluster(layout);
  std::vector<Candidate> out;
  const int first = ((2 + step - 1) / step) * step;
  for (int I = first; I <= budget.I_max; I += step)
    for (int K = 2; K <= budget.K_max; ++K) {
      if (cost_with(ppc, I, K, budget) > budget.B) break;
      out.push_back({I, K});
    }
  return out;
}

}  // namespace lcrt
