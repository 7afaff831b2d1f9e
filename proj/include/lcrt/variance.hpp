#pragma once

#include "lcrt/correlation.hpp"
#include "lcrt/design.hpp"

namespace lcrt {

struct EconModel {
  double sigmaE = 1;
  double sigmaC = 1;
  double lambda = 0;
  double beta1 = 0;
  double alpha = 0.05;

  void validate() const;
  double lambda_r() const { return lambda * sigmaE / sigmaC; }
};

struct Intermediates {
  Kappa kappa;
  double Delta = 0;
  double DeltaStar = 0;
  double phi = 0;
  double eta = 0;
  double U = 0;
  double V = 0;
  double W = 0;
};

struct VarianceReport {
  double variance = 0;
  bool has_intermediates = false;
  Intermediates intermediates;
};

// closed form for complete schedules; I and K may be fractional
VarianceReport variance_from_constants(const DesignConstants& dc, double I, int J, double K, const IccVector& rho,
                                       const EconModel& econ);

VarianceReport variance_general(const TrialLayout& layout, int I, int K, const IccVector& rho, const EconModel& econ);
VarianceReport variance_crxo(int J, double I, double K, Fraction pi, const IccVector& rho, const EconModel& econ);
VarianceReport variance_pa(int J, double I, double K, Fraction pi, const IccVector& rho, const EconModel& econ);

// matrix route over cluster-period means; handles missing cells
VarianceReport variance_gls(const Schedule& schedule, double K, const IccVector& rho, const EconModel& econ);

// variance_general for complete layouts, variance_gls otherwise
VarianceReport design_variance(const TrialLayout& layout, int I, int K, const IccVector& rho, const EconModel& econ);

double normal_cdf(double x);
double normal_quantile(double p);
double power(double variance, double beta1, double alpha);

}  // namespace lcrt
