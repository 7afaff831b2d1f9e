#pragma once

#include <memory>

#include "lcrt/variance.hpp"

namespace lcrt {

enum class SolutionKind { decimal, integer };

struct DesignSolution {
  double I = 0;
  double K = 0;
  int J = 0;
  double variance = 0;
  double power = 0;
  SolutionKind kind = SolutionKind::integer;
  bool interior = true;  // false: theta <= 0, no interior decimal optimum
  double theta = 0;
};

double theta_crxo(const IccVector& rho, double lambda_r);
double theta_pa(const IccVector& rho, double lambda_r, int J);
double theta_for(Family f, const IccVector& rho, double lambda_r, int J);

DesignSolution decimal_lod_closed(Family f, const IccVector& rho, const EconModel& econ, const BudgetModel& budget, int J,
                                  Fraction pi = {});

// variance at fractional (I, K), scaling one replicated block of clusters
class ScaledVariance {
 public:
  ScaledVariance(const TrialLayout& layout, const EconModel& econ);
  // +inf when the correlation is not positive definite at K
  double operator()(const IccVector& rho, double I, double K) const;
  const TrialLayout& layout() const { return layout_; }

 private:
  TrialLayout layout_;
  EconModel econ_;
  int block_ = 1;
  DesignConstants per_cluster_;  // U/I, V/I, W/I^2
  std::shared_ptr<Schedule> base_;
};

// continuous-K minimizer of variance along the budget line, K in [2, K_max]
DesignSolution decimal_lod_numeric(const TrialLayout& layout, const IccVector& rho, const EconModel& econ,
                                   const BudgetModel& budget);
DesignSolution decimal_lod_numeric(const ScaledVariance& sv, const IccVector& rho, const BudgetModel& budget);

DesignSolution lod_search(const TrialLayout& layout, const IccVector& rho, const EconModel& econ,
                          const BudgetModel& budget);
DesignSolution lod_search_serial(const TrialLayout& layout, const IccVector& rho, const EconModel& econ,
                                 const BudgetModel& budget);

DesignSolution lod_search_over_J(TrialLayout layout, int J_lo, int J_hi, const IccVector& rho, const EconModel& econ,
                                 const BudgetModel& budget);

// lambda*r minimizing the CRXO theta
double optimal_lambda_r(const IccVector& rho);

}  // namespace lcrt
