#include "lcrt/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "lcrt/error.hpp"

namespace lcrt {

bool IccBox::contains(const IccVector& r, double tol) const {
  auto a = r.to_array(), lo = min.to_array(), hi = max.to_array();
  for (int k = 0; k < 7; ++k)
    if (a[k] < lo[k] - tol || a[k] > hi[k] + tol) return false;
  return true;
}

void IccBox::validate() const {
  auto lo = min.to_array(), hi = max.to_array();
  for (int k = 0; k < 7; ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]))
      throw error(invalid_input, "box bounds must be finite", std::string("box.") + icc_names[k]);
    if (lo[k] > hi[k])
      throw error(invalid_input, std::string("box min exceeds max for ") + icc_names[k],
                  std::string("box.") + icc_names[k]);
  }
}

std::vector<Violation> validate_ordering(const IccVector& r) {
  std::vector<Violation> out;
  auto a = r.to_array();
  for (int k = 0; k < 7; ++k) {
    const bool cross = k >= 4;
    const double v = a[k];
    const bool ok = cross ? (v > -1 && v < 1) : (v >= 0 && v < 1);
    if (!std::isfinite(v) || !ok)
      out.push_back({"range", icc_names[k],
                     std::string(icc_names[k]) + (cross ? " must lie in (-1, 1)" : " must lie in [0, 1)")});
  }
  if (r.rho1E > r.rho0E) out.push_back({"(i)", "rho1E", "rho1E exceeds rho0E"});
  if (r.rho1C > r.rho0C) out.push_back({"(ii)", "rho1C", "rho1C exceeds rho0C"});
  if (r.rho0EC > std::min(r.rho0E, r.rho0C)) out.push_back({"(iii)", "rho0EC", "rho0EC exceeds min(rho0E, rho0C)"});
  if (r.rho1EC > std::min(r.rho1E, r.rho1C)) out.push_back({"(iv)", "rho1EC", "rho1EC exceeds min(rho1E, rho1C)"});
  if (r.rho1EC > r.rho0EC || r.rho0EC > r.rho2EC)
    out.push_back({"(v)", "rho0EC", "need rho1EC <= rho0EC <= rho2EC"});
  return out;
}

bool satisfies_ordering(const IccVector& r, double tol) {
  return r.rho1E <= r.rho0E + tol && r.rho1C <= r.rho0C + tol && r.rho0EC <= std::min(r.rho0E, r.rho0C) + tol &&
         r.rho1EC <= std::min(r.rho1E, r.rho1C) + tol && r.rho1EC <= r.rho0EC + tol && r.rho0EC <= r.rho2EC + tol;
}

namespace {

// eigenvalues of [[a, b], [b, c]]
void sym2(double a, double b, double c, double& plus, double& minus) {
  const double m = 0.5 * (a + c);
  const double d = std::sqrt(b * b + 0.25 * (a - c) * (a - c));
  plus = m + d;
  minus = m - d;
}

struct Blocks {
  double e1, c1, x1;  // first block entries (E, C, cross)
  double e2, c2, x2;
  double e3, c3, x3;
};

Blocks blocks(const IccVector& r, int J, double K) {
  Blocks b;
  b.e1 = 1 + (K - 1) * r.rho0E + (J - 1) * K * r.rho1E;
  b.c1 = 1 + (K - 1) * r.rho0C + (J - 1) * K * r.rho1C;
  b.x1 = r.rho2EC + (K - 1) * r.rho0EC + (J - 1) * K * r.rho1EC;
  b.e2 = 1 + (K - 1) * r.rho0E - K * r.rho1E;
  b.c2 = 1 + (K - 1) * r.rho0C - K * r.rho1C;
  b.x2 = r.rho2EC + (K - 1) * r.rho0EC - K * r.rho1EC;
  b.e3 = 1 - r.rho0E;
  b.c3 = 1 - r.rho0C;
  b.x3 = r.rho2EC - r.rho0EC;
  return b;
}

}  // namespace

EigenSpectrum eigen_spectrum(const IccVector& r, int J, int K) {
  if (J < 1 || K < 1) throw error(invalid_input, "J and K must be positive", "J");
  Blocks b = blocks(r, J, K);
  EigenSpectrum s;
  s.J = J;
  s.K = K;
  sym2(b.e1, b.x1, b.c1, s.first_plus, s.first_minus);
  sym2(b.e2, b.x2, b.c2, s.second_plus, s.second_minus);
  sym2(b.e3, b.x3, b.c3, s.third_plus, s.third_minus);
  return s;
}

double EigenSpectrum::min() const {
  double m = std::min(first_plus, first_minus);
  if (J > 1) m = std::min({m, second_plus, second_minus});
  if (K > 1) m = std::min({m, third_plus, third_minus});
  return m;
}

std::vector<std::pair<double, int>> EigenSpectrum::with_multiplicity() const {
  std::vector<std::pair<double, int>> v = {{first_plus, 1},          {first_minus, 1},
                                           {second_plus, J - 1},     {second_minus, J - 1},
                                           {third_plus, J * (K - 1)}, {third_minus, J * (K - 1)}};
  std::erase_if(v, [](const auto& p) { return p.second == 0; });
  std::sort(v.begin(), v.end());
  return v;
}

double min_eigenvalue(const IccVector& r, int J, double K) {
  Blocks b = blocks(r, J, K);
  double p, m, out;
  sym2(b.e1, b.x1, b.c1, p, m);
  out = m;
  if (J > 1) {
    sym2(b.e2, b.x2, b.c2, p, m);
    out = std::min(out, m);
  }
  if (K > 1) {
    sym2(b.e3, b.x3, b.c3, p, m);
    out = std::min(out, m);
  }
  return out;
}

bool is_positive_definite(const IccVector& r, int J, int K) { return eigen_spectrum(r, J, K).min() > pd_tolerance; }

Eigen::MatrixXd assemble_correlation(const IccVector& r, int J, int K) {
  if (J < 1 || K < 1) throw error(invalid_input, "J and K must be positive", "J");
  const long n = 2L * J * K;
  if (n > 4096) throw error(invalid_input, "dense correlation capped at 4096 rows", "K");
  Eigen::Matrix2d g0, g1, g2;
  g0 << r.rho0E, r.rho0EC, r.rho0EC, r.rho0C;
  g1 << r.rho1E, r.rho1EC, r.rho1EC, r.rho1C;
  g2 << 1, r.rho2EC, r.rho2EC, 1;
  Eigen::MatrixXd R(n, n);
  // rows ordered (period, individual, outcome)
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k)
      for (int jj = 0; jj < J; ++jj)
        for (int kk = 0; kk < K; ++kk) {
          const Eigen::Matrix2d& g = (j != jj) ? g1 : (k != kk ? g0 : g2);
          R.block<2, 2>(2 * (j * K + k), 2 * (jj * K + kk)) = g;
        }
  return R;
}

VarianceComponents icc_to_covariance(const IccVector& r, double sigmaE, double sigmaC) {
  if (!(sigmaE > 0) || !(sigmaC > 0)) throw error(invalid_input, "standard deviations must be positive", "econ.sigmaE");
  Eigen::Matrix2d L = Eigen::Vector2d(sigmaE, sigmaC).asDiagonal();
  Eigen::Matrix2d g0, g1, g2;
  g0 << r.rho0E, r.rho0EC, r.rho0EC, r.rho0C;
  g1 << r.rho1E, r.rho1EC, r.rho1EC, r.rho1C;
  g2 << 1, r.rho2EC, r.rho2EC, 1;
  VarianceComponents v;
  v.cluster = L * g1 * L;
  v.cluster_period = L * (g0 - g1) * L;
  v.individual = L * (g2 - g0) * L;
  return v;
}

IccVector covariance_to_icc(const VarianceComponents& v) {
  Eigen::Matrix2d total = v.cluster + v.cluster_period + v.individual;
  const double sE = std::sqrt(total(0, 0)), sC = std::sqrt(total(1, 1));
  Eigen::Matrix2d Li = Eigen::Vector2d(1 / sE, 1 / sC).asDiagonal();
  Eigen::Matrix2d g1 = Li * v.cluster * Li;
  Eigen::Matrix2d g0 = Li * (v.cluster + v.cluster_period) * Li;
  Eigen::Matrix2d g2 = Li * total * Li;
  return {g0(0, 0), g1(0, 0), g0(1, 1), g1(1, 1), g0(0, 1), g1(0, 1), g2(0, 1)};
}

Kappa kappas(const IccVector& r, double K) {
  return {1 + (K - 1) * r.rho0E - K * r.rho1E, 1 + (K - 1) * r.rho0C - K * r.rho1C,
          r.rho2EC + (K - 1) * r.rho0EC - K * r.rho1EC};
}

static double ratio(double num, double den, const char* what) {
  if (den == 0) throw error(invalid_input, std::string(what) + " undefined for zero within-period icc", what);
  return num / den;
}

double cac_effect(const IccVector& r) { return ratio(r.rho1E, r.rho0E, "cac_effect"); }
double cac_cost(const IccVector& r) { return ratio(r.rho1C, r.rho0C, "cac_cost"); }
double cac_cross(const IccVector& r) { return ratio(r.rho1EC, r.rho0EC, "cac_cross"); }

}  // namespace lcrt
