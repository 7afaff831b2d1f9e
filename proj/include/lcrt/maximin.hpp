#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "lcrt/optimal.hpp"

namespace lcrt {

struct TraceEntry {
  IccVector start;
  IccVector end;
  double re = 0;
};

struct WorstCase {
  IccVector rho;
  double re = 0;
  std::vector<TraceEntry> trace;
};

struct MaximinOptions {
  std::vector<IccVector> seeds;  // extra user starting points
  int scan_points = 512;
  int keep = 8;
  int max_iter = 400;
  double tol = 1e-7;
  bool trace = false;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct MaximinSolution {
  int I = 0;
  int K = 0;
  int J = 0;
  double worst_re = 0;
  IccVector worst_rho;
  std::vector<TraceEntry> inner_trace;
  int evaluated = 0;  // candidates whose inner problem was solved
};

// V_dec / V(I, K); +inf when theta <= 0 or a variance is not usable
class Efficiency {
 public:
  Efficiency(const TrialLayout& layout, const EconModel& econ, const BudgetModel& budget);
  double decimal_variance(const IccVector& rho) const;
  double operator()(const IccVector& rho, double I, double K) const;
  // same, with V_dec supplied (numeric families)
  double with_decimal(const IccVector& rho, double v_dec, double I, double K) const;
  const TrialLayout& layout() const { return sv_.layout(); }
  const BudgetModel& budget() const { return budget_; }

 private:
  ScaledVariance sv_;
  EconModel econ_;
  BudgetModel budget_;
};

double relative_efficiency(const TrialLayout& layout, const IccVector& rho, double I, double K, const EconModel& econ,
                           const BudgetModel& budget);

WorstCase worst_case_icc(const TrialLayout& layout, const IccBox& box, int I, int K, const EconModel& econ,
                         const BudgetModel& budget, const MaximinOptions& opts = {});

MaximinSolution mmd_search(const TrialLayout& layout, const IccBox& box, const EconModel& econ,
                           const BudgetModel& budget, const MaximinOptions& opts = {});
// full I-major scan, one thread
MaximinSolution mmd_search_serial(const TrialLayout& layout, const IccBox& box, const EconModel& econ,
                                  const BudgetModel& budget, const MaximinOptions& opts = {});

struct CandidateEfficiency {
  int I = 0;
  int K = 0;
  double re = 0;
  IccVector rho;
};

// worst-case RE of every feasible candidate
std::vector<CandidateEfficiency> mmd_scan(const TrialLayout& layout, const IccBox& box, const EconModel& econ,
                                          const BudgetModel& budget, const MaximinOptions& opts = {});

}  // namespace lcrt
