#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace lcrt {

struct IccVector {
  double rho0E = 0;
  double rho1E = 0;
  double rho0C = 0;
  double rho1C = 0;
  double rho0EC = 0;
  double rho1EC = 0;
  double rho2EC = 0;

  std::array<double, 7> to_array() const { return {rho0E, rho1E, rho0C, rho1C, rho0EC, rho1EC, rho2EC}; }
  static IccVector from_array(const std::array<double, 7>& a) { return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]}; }
  bool operator==(const IccVector&) const = default;
};

inline constexpr std::array<const char*, 7> icc_names = {"rho0E", "rho1E", "rho0C", "rho1C",
                                                         "rho0EC", "rho1EC", "rho2EC"};

struct IccBox {
  IccVector min;
  IccVector max;

  static IccBox point(const IccVector& r) { return {r, r}; }
  bool contains(const IccVector& r, double tol = 0) const;
  void validate() const;
};

struct Violation {
  std::string constraint;  // "(i)".."(v)" or "range"
  std::string field;
  std::string message;
};

// range bounds plus ordering constraints (i)-(v); empty means ok
std::vector<Violation> validate_ordering(const IccVector& r);
bool satisfies_ordering(const IccVector& r, double tol = 0);

inline constexpr double pd_tolerance = 1e-10;

struct EigenSpectrum {
  double first_plus = 1, first_minus = 1;    // multiplicity 1
  double second_plus = 1, second_minus = 1;  // multiplicity J - 1
  double third_plus = 1, third_minus = 1;    // multiplicity J(K - 1)
  int J = 1;
  int K = 1;

  double min() const;
  // value/multiplicity pairs, sorted ascending by value
  std::vector<std::pair<double, int>> with_multiplicity() const;
};

EigenSpectrum eigen_spectrum(const IccVector& r, int J, int K);
// K is allowed to be fractional so continuous-K searches can gate on it
double min_eigenvalue(const IccVector& r, int J, double K);
bool is_positive_definite(const IccVector& r, int J, int K);

Eigen::MatrixXd assemble_correlation(const IccVector& r, int J, int K);

struct VarianceComponents {
  Eigen::Matrix2d cluster;         // between-cluster
  Eigen::Matrix2d cluster_period;  // cluster-by-period
  Eigen::Matrix2d individual;      // residual
};

VarianceComponents icc_to_covariance(const IccVector& r, double sigmaE, double sigmaC);
IccVector covariance_to_icc(const VarianceComponents& v);

struct Kappa {
  double E = 1;
  double C = 1;
  double EC = 0;
};

Kappa kappas(const IccVector& r, double K);

// cluster autocorrelation ratios, undefined for zero within-period icc
double cac_effect(const IccVector& r);
double cac_cost(const IccVector& r);
double cac_cross(const IccVector& r);

}  // namespace lcrt
