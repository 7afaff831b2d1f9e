#include "lcrt/variance.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <map>
#include <string>

#include "lcrt/error.hpp"

namespace lcrt {

void EconModel::validate() const {
  if (!(sigmaE > 0)) throw error(invalid_input, "sigmaE must be positive", "econ.sigmaE");
  if (!(sigmaC > 0)) throw error(invalid_input, "sigmaC must be positive", "econ.sigmaC");
  if (!(lambda >= 0)) throw error(invalid_input, "lambda must be non-negative", "econ.lambda");
  if (!std::isfinite(beta1)) throw error(invalid_input, "beta1 must be finite", "econ.beta1");
  if (!(alpha > 0 && alpha < 1)) throw error(invalid_input, "alpha must lie in (0, 1)", "econ.alpha");
}

VarianceReport variance_from_constants(const DesignConstants& dc, double I, int J, double K, const IccVector& r,
                                       const EconModel& e) {
  const double sE = e.sigmaE, sC = e.sigmaC, lam = e.lambda;
  const double s2 = sE * sE * sC * sC;
  const Kappa k = kappas(r, K);
  Intermediates m;
  m.kappa = k;
  m.U = dc.U;
  m.V = dc.V;
  m.W = dc.W;
  m.Delta = s2 * (k.E * k.C - k.EC * k.EC) / (K * K);
  m.DeltaStar = m.Delta + J * s2 *
                              ((k.E * r.rho1C + k.C * r.rho1E - 2 * k.EC * r.rho1EC) / K +
                               J * (r.rho1E * r.rho1C - r.rho1EC * r.rho1EC));
  const double a = dc.U * dc.U - I * dc.V;
  const double b = I * dc.U - dc.W;
  m.phi = J * b / m.Delta + a * (1 / m.Delta - 1 / m.DeltaStar);
  m.eta = m.phi * J * b +
          double(J) * J / m.DeltaStar * a * s2 * (r.rho1E * r.rho1C - r.rho1EC * r.rho1EC) * (m.phi + a / m.DeltaStar);
  if (!(m.eta > 0) || !std::isfinite(m.eta))
    throw error(singular_design, "design is not identifiable (eta <= 0)", "layout");
  const double within = lam * lam * k.E * sE / sC - 2 * lam * k.EC + k.C * sC / sE;
  const double between = lam * lam * r.rho1E * sE / sC - 2 * lam * r.rho1EC + r.rho1C * sC / sE;
  VarianceReport out;
  out.variance = I * J * sE * sC / m.eta * (m.phi / K * within - J / m.DeltaStar * a * between);
  out.has_intermediates = true;
  out.intermediates = m;
  if (!(out.variance > 0) || !std::isfinite(out.variance))
    throw error(singular_design, "variance is not positive", "layout");
  return out;
}

static void require_pd(const IccVector& rho, int J, double K) {
  if (!(min_eigenvalue(rho, J, K) > pd_tolerance))
    throw error(not_positive_definite, "correlation matrix is not positive definite at this (J, K)", "rho");
}

VarianceReport variance_general(const TrialLayout& layout, int I, int K, const IccVector& rho, const EconModel& econ) {
  layout.validate();
  if (layout.family == Family::sw_incomplete)
    throw error(invalid_input, "closed form needs a complete layout; use the matrix route", "layout.family");
  require_pd(rho, layout.J, K);
  Schedule s = build_schedule(layout, I);
  return variance_from_constants(design_constants(s.Z), I, layout.J, K, rho, econ);
}

static DesignConstants closed_constants(Family f, int J, double I, double p) {
  if (f == Family::crxo) return {I * J / 2.0, I * J * J / 4.0, I * I * J / 2.0 * (p * p + (1 - p) * (1 - p))};
  return {p * I * J, p * I * J * J, p * p * I * I * J};
}

VarianceReport variance_crxo(int J, double I, double K, Fraction pi, const IccVector& r, const EconModel& e) {
  if (J < 2 || J % 2) throw error(invalid_input, "CRXO needs an even number of periods", "layout.J");
  require_pd(r, J, K);
  const double p = pi.value();
  const Kappa k = kappas(r, K);
  const double sE = e.sigmaE, sC = e.sigmaC, lam = e.lambda;
  VarianceReport out = variance_from_constants(closed_constants(Family::crxo, J, I, p), I, J, K, r, e);
  out.variance = (k.C * sC * sC - 2 * lam * k.EC * sC * sE + lam * lam * k.E * sE * sE) / (I * J * K * p * (1 - p));
  return out;
}

VarianceReport variance_pa(int J, double I, double K, Fraction pi, const IccVector& r, const EconModel& e) {
  if (J < 1) throw error(invalid_input, "J must be positive", "layout.J");
  require_pd(r, J, K);
  const double p = pi.value();
  const Kappa k = kappas(r, K);
  const double sE = e.sigmaE, sC = e.sigmaC, lam = e.lambda;
  VarianceReport out = variance_from_constants(closed_constants(Family::pa, J, I, p), I, J, K, r, e);
  out.variance = (k.C * sC * sC - 2 * lam * k.EC * sC * sE + lam * lam * k.E * sE * sE) / (I * J * K * p * (1 - p)) +
                 (r.rho1C * sC * sC - 2 * lam * r.rho1EC * sC * sE + lam * lam * r.rho1E * sE * sE) / (I * p * (1 - p));
  return out;
}

VarianceReport variance_gls(const Schedule& s, double K, const IccVector& r, const EconModel& e) {
  const int J = s.periods();
  const int p = 2 * J + 2;
  // standardized outcomes; rescaled at the end
  Eigen::Matrix2d g0, g1, g2;
  g0 << r.rho0E, r.rho0EC, r.rho0EC, r.rho0C;
  g1 << r.rho1E, r.rho1EC, r.rho1EC, r.rho1C;
  g2 << 1, r.rho2EC, r.rho2EC, 1;
  const Eigen::Matrix2d within = (g0 - g1) + (g2 - g0) / K;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * J, 2 * J);
  for (int j = 0; j < J; ++j)
    for (int jj = 0; jj < J; ++jj) G.block<2, 2>(2 * j, 2 * jj) = g1 + (j == jj ? within : Eigen::Matrix2d::Zero());

  // identical clusters share one contribution
  std::map<std::string, int> groups;
  std::map<std::string, int> first;
  for (int i = 0; i < s.clusters(); ++i) {
    std::string key(2 * J, ' ');
    for (int j = 0; j < J; ++j) {
      key[2 * j] = s.observed(i, j) ? 'o' : '.';
      key[2 * j + 1] = s.Z(i, j) ? '1' : '0';
    }
    if (groups[key]++ == 0) first[key] = i;
  }

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [key, count] : groups) {
    const int i = first[key];
    std::vector<int> obs;
    for (int j = 0; j < J; ++j)
      if (s.observed(i, j)) obs.push_back(j);
    const int n = int(obs.size());
    if (n == 0) continue;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2 * n, p);
    Eigen::MatrixXd Gs(2 * n, 2 * n);
    for (int a = 0; a < n; ++a) {
      D(2 * a, 2 * obs[a]) = 1;
      D(2 * a + 1, 2 * obs[a] + 1) = 1;
      if (s.Z(i, obs[a])) {
        D(2 * a, p - 2) = 1;
        D(2 * a + 1, p - 1) = 1;
      }
      for (int b = 0; b < n; ++b) Gs.block<2, 2>(2 * a, 2 * b) = G.block<2, 2>(2 * obs[a], 2 * obs[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Gs);
    if (llt.info() != Eigen::Success)
      throw error(not_positive_definite, "cluster-period covariance is not positive definite", "rho");
    M += count * (D.transpose() * llt.solve(D));
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw error(singular_design, "information matrix is singular (unidentifiable pattern)", "pattern");
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(p, 2);
  E(p - 2, 0) = 1;
  E(p - 1, 1) = 1;
  Eigen::Matrix2d C = (lu.solve(E)).bottomRows<2>();
  const double le = e.lambda * e.sigmaE, sc = e.sigmaC;
  VarianceReport out;
  out.variance = le * le * C(0, 0) + sc * sc * C(1, 1) - 2 * le * sc * C(0, 1);
  if (!(out.variance > 0) || !std::isfinite(out.variance))
    throw error(singular_design, "variance is not positive", "layout");
  if (s.complete()) {
    out.has_intermediates = true;
    out.intermediates.kappa = kappas(r, K);
    DesignConstants dc = design_constants(s.Z);
    out.intermediates.U = dc.U;
    out.intermediates.V = dc.V;
    out.intermediates.W = dc.W;
  }
  return out;
}

VarianceReport design_variance(const TrialLayout& layout, int I, int K, const IccVector& rho, const EconModel& econ) {
  if (layout.family != Family::sw_incomplete) return variance_general(layout, I, K, rho, econ);
  layout.validate();
  require_pd(rho, layout.J, K);
  return variance_gls(build_schedule(layout, I), K, rho, econ);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0 && p < 1)) throw error(invalid_input, "probability must lie in (0, 1)", "alpha");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double power(double variance, double beta1, double alpha) {
  if (!(variance > 0)) throw error(invalid_input, "variance must be positive", "variance");
  if (!(alpha > 0 && alpha < 1)) throw error(invalid_input, "alpha must lie in (0, 1)", "econ.alpha");
  return normal_cdf(std::fabs(beta1) / std::sqrt(variance) - normal_quantile(1 - alpha / 2));
}

}  // namespace lcrt
