#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace lcrt {

enum class Family { crxo, pa, sw, sw_incomplete };

std::string family_name(Family f);
Family parse_family(const std::string& s);
bool closed_form(Family f);

// exact allocation proportion, e.g. 1/2
struct Fraction {
  long num = 1;
  long den = 2;
  double value() const { return double(num) / double(den); }
};

enum class Cell : char { control = '0', treatment = '1', missing = '.' };

struct DesignPattern {
  std::vector<std::vector<Cell>> rows;

  int clusters() const { return int(rows.size()); }
  int periods() const { return rows.empty() ? 0 : int(rows.front().size()); }
  void validate() const;
};

DesignPattern parse_pattern_csv(const std::string& text);
std::string pattern_to_csv(const DesignPattern& p);

// incomplete stepped wedge: first half of clusters lose trailing periods,
// second half lose leading periods
struct Stagger {
  int tail_first_half = 1;
  int head_second_half = 2;
};

struct TrialLayout {
  Family family = Family::crxo;
  int J = 2;
  Fraction pi;
  int Q = 0;
  std::optional<DesignPattern> pattern;  // explicit rows, replicated in blocks
  Stagger stagger;

  void validate() const;
  // I must be a multiple of this
  int cluster_step() const;
};

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Schedule {
  Eigen::MatrixXi Z;  // I x J, 1 = treatment
  Mask observed;      // I x J

  int clusters() const { return int(Z.rows()); }
  int periods() const { return int(Z.cols()); }
  bool complete() const { return observed.all(); }
  long observed_cells() const { return long(observed.count()); }
};

Schedule build_schedule(const TrialLayout& layout, int I);

struct DesignConstants {
  double U = 0;
  double V = 0;
  double W = 0;
};

DesignConstants design_constants(const Eigen::MatrixXi& Z);

struct BudgetModel {
  double B = 300000;
  double c1 = 3000;
  double c2 = 250;
  int I_max = 100;
  int K_max = 200;

  void validate() const;
};

// observed cluster-periods per cluster (J for complete layouts)
double periods_per_cluster(const TrialLayout& layout);
// c1 + c2 * K * observed periods, averaged per cluster
double cost_per_cluster(const TrialLayout& layout, double K, const BudgetModel& budget);
double design_cost(const TrialLayout& layout, int I, int K, const BudgetModel& budget);

struct Candidate {
  int I = 0;
  int K = 0;
};

// I-major, K ascending
std::vector<Candidate> feasible_designs(const TrialLayout& layout, const BudgetModel& budget);

}  // namespace lcrt
