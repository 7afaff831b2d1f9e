#include "lcrt/optimal.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "lcrt/error.hpp"

namespace lcrt {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double inv_lr(double lambda_r) {
  if (!(lambda_r > 0)) throw error(invalid_input, "lambda*r must be positive", "econ.lambda");
  return std::isinf(lambda_r) ? 0.0 : 1.0 / lambda_r;
}

double ratio_minus_one(double num, double den) {
  if (den == 0) throw error(invalid_input, "theta denominator vanishes", "rho");
  return num / den - 1;
}

}  // namespace

double theta_crxo(const IccVector& r, double lambda_r) {
  const double a = inv_lr(lambda_r);
  const double num = (1 - r.rho1E) + 2 * (r.rho1EC - r.rho2EC) * a + (1 - r.rho1C) * a * a;
  const double den = (r.rho0E - r.rho1E) + 2 * (r.rho1EC - r.rho0EC) * a + (r.rho0C - r.rho1C) * a * a;
  return ratio_minus_one(num, den);
}

double theta_pa(const IccVector& r, double lambda_r, int J) {
  const double a = inv_lr(lambda_r);
  const double num = (1 + J * r.rho1E - r.rho1E) + 2 * (r.rho1EC - J * r.rho1EC - r.rho2EC) * a +
                     (1 + J * r.rho1C - r.rho1C) * a * a;
  const double den = (J * r.rho1E + r.rho0E - r.rho1E) + 2 * (-J * r.rho1EC - r.rho0EC + r.rho1EC) * a +
                     (J * r.rho1C + r.rho0C - r.rho1C) * a * a;
  return ratio_minus_one(num, den);
}

double theta_for(Family f, const IccVector& rho, double lambda_r, int J) {
  if (f == Family::crxo) return theta_crxo(rho, lambda_r);
  if (f == Family::pa) return theta_pa(rho, lambda_r, J);
  throw error(invalid_input, "theta has a closed form only for CRXO and PA", "layout.family");
}

DesignSolution decimal_lod_closed(Family f, const IccVector& rho, const EconModel& econ, const BudgetModel& budget,
                                  int J, Fraction pi) {
  econ.validate();
  budget.validate();
  DesignSolution s;
  s.kind = SolutionKind::decimal;
  s.J = J;
  s.theta = theta_for(f, rho, econ.lambda_r(), J);
  if (!(s.theta > 0)) {
    s.interior = false;
    s.I = s.K = s.variance = s.power = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.K = std::sqrt(budget.c1 * s.theta / (budget.c2 * J));
  s.I = budget.B / (budget.c1 + std::sqrt(s.theta * budget.c1 * budget.c2 * J));
  try {
    s.variance = (f == Family::crxo ? variance_crxo(J, s.I, s.K, pi, rho, econ) : variance_pa(J, s.I, s.K, pi, rho, econ))
                     .variance;
    s.power = power(s.variance, econ.beta1, econ.alpha);
  } catch (const error&) {
    s.variance = s.power = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

ScaledVariance::ScaledVariance(const TrialLayout& layout, const EconModel& econ) : layout_(layout), econ_(econ) {
  layout_.validate();
  econ_.validate();
  block_ = layout_.cluster_step();
  if (layout_.family == Family::sw) {
    Schedule s = build_schedule(layout_, block_);
    DesignConstants d = design_constants(s.Z);
    per_cluster_ = {d.U / block_, d.V / block_, d.W / (double(block_) * block_)};
  } else if (layout_.family == Family::sw_incomplete) {
    base_ = std::make_shared<Schedule>(build_schedule(layout_, block_));
  }
}

double ScaledVariance::operator()(const IccVector& r, double I, double K) const {
  const int J = layout_.J;
  if (!(min_eigenvalue(r, J, K) > pd_tolerance)) return inf;
  const double sE = econ_.sigmaE, sC = econ_.sigmaC, lam = econ_.lambda;
  switch (layout_.family) {
    case Family::crxo:
    case Family::pa: {
      const double p = layout_.pi.value();
      const Kappa k = kappas(r, K);
      double v = (k.C * sC * sC - 2 * lam * k.EC * sC * sE + lam * lam * k.E * sE * sE) / (I * J * K * p * (1 - p));
      if (layout_.family == Family::pa)
        v += (r.rho1C * sC * sC - 2 * lam * r.rho1EC * sC * sE + lam * lam * r.rho1E * sE * sE) / (I * p * (1 - p));
      return v > 0 ? v : inf;
    }
    case Family::sw: {
      DesignConstants d{per_cluster_.U * I, per_cluster_.V * I, per_cluster_.W * I * I};
      try {
        return variance_from_constants(d, I, J, K, r, econ_).variance;
      } catch (const error&) {
        return inf;
      }
    }
    case Family::sw_incomplete:
      try {
        return variance_gls(*base_, K, r, econ_).variance * block_ / I;
      } catch (const error&) {
        return inf;
      }
  }
  return inf;
}

DesignSolution decimal_lod_numeric(const ScaledVariance& sv, const IccVector& rho, const BudgetModel& budget) {
  const double ppc = periods_per_cluster(sv.layout());
  auto clusters = [&](double K) { return budget.B / (budget.c1 + budget.c2 * K * ppc); };
  auto f = [&](double K) { return sv(rho, clusters(K), K); };
  // golden-section on [2, K_max]
  const double g = (std::sqrt(5.0) - 1) / 2;
  double a = 2, b = budget.K_max;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-6) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  double K = 0.5 * (a + b), best = f(K);
  for (double edge : {2.0, double(budget.K_max)}) {
    const double fe = f(edge);
    if (fe < best) {
      best = fe;
      K = edge;
    }
  }
  DesignSolution s;
  s.kind = SolutionKind::decimal;
  s.J = sv.layout().J;
  s.K = K;
  s.I = clusters(K);
  s.variance = best;
  s.interior = std::isfinite(best);
  s.theta = std::numeric_limits<double>::quiet_NaN();  // no closed form here
  return s;
}

DesignSolution decimal_lod_numeric(const TrialLayout& layout, const IccVector& rho, const EconModel& econ,
                                   const BudgetModel& budget) {
  budget.validate();
  ScaledVariance sv(layout, econ);
  DesignSolution s = decimal_lod_numeric(sv, rho, budget);
  s.power = std::isfinite(s.variance) ? power(s.variance, econ.beta1, econ.alpha)
                                      : std::numeric_limits<double>::quiet_NaN();
  return s;
}

namespace {

std::vector<Candidate> candidates_or_throw(const TrialLayout& layout, const BudgetModel& budget) {
  auto c = feasible_designs(layout, budget);
  if (c.empty()) throw error(empty_feasible_set, "no design fits the budget", "budget.B");
  return c;
}

DesignSolution pick(const std::vector<Candidate>& cand, const std::vector<double>& var, const TrialLayout& layout,
                    const EconModel& econ) {
  DesignSolution best;
  best.power = -1;
  for (std::size_t n = 0; n < cand.size(); ++n) {
    if (!(var[n] > 0) || !std::isfinite(var[n])) continue;
    const double p = power(var[n], econ.beta1, econ.alpha);
    if (p > best.power) {
      best.I = cand[n].I;
      best.K = cand[n].K;
      best.variance = var[n];
      best.power = p;
    }
  }
  if (best.power < 0) throw error(empty_feasible_set, "no feasible design has a valid variance", "rho");
  best.J = layout.J;
  best.kind = SolutionKind::integer;
  return best;
}

}  // namespace

DesignSolution lod_search(const TrialLayout& layout, const IccVector& rho, const EconModel& econ,
                          const BudgetModel& budget) {
  layout.validate();
  econ.validate();
  const auto cand = candidates_or_throw(layout, budget);
  const int step = layout.cluster_step();
  const int J = layout.J;
  // schedules depend on I only
  std::vector<DesignConstants> dc(budget.I_max + 1);
  std::vector<std::shared_ptr<Schedule>> sched(budget.I_max + 1);
  for (int I = step; I <= budget.I_max; I += step) {
    auto s = std::make_shared<Schedule>(build_schedule(layout, I));
    if (layout.family == Family::sw_incomplete) sched[I] = s;
    else dc[I] = design_constants(s->Z);
  }
  std::vector<double> var(cand.size(), -1);
  const long n = long(cand.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long c = 0; c < n; ++c) {
    const int I = cand[c].I, K = cand[c].K;
    if (!(min_eigenvalue(rho, J, K) > pd_tolerance)) continue;
    try {
      var[c] = layout.family == Family::sw_incomplete ? variance_gls(*sched[I], K, rho, econ).variance
                                                      : variance_from_constants(dc[I], I, J, K, rho, econ).variance;
    } catch (const error&) {
    }
  }
  return pick(cand, var, layout, econ);
}

DesignSolution lod_search_serial(const TrialLayout& layout, const IccVector& rho, const EconModel& econ,
                                 const BudgetModel& budget) {
  layout.validate();
  econ.validate();
  const auto cand = candidates_or_throw(layout, budget);
  std::vector<double> var(cand.size(), -1);
  for (std::size_t c = 0; c < cand.size(); ++c) {
    if (!is_positive_definite(rho, layout.J, cand[c].K)) continue;
    try {
      var[c] = design_variance(layout, cand[c].I, cand[c].K, rho, econ).variance;
    } catch (const error&) {
    }
  }
  return pick(cand, var, layout, econ);
}

DesignSolution lod_search_over_J(TrialLayout layout, int J_lo, int J_hi, const IccVector& rho, const EconModel& econ,
                                 const BudgetModel& budget) {
  if (layout.family == Family::sw_incomplete && layout.pattern)
    throw error(invalid_input, "an explicit pattern fixes J", "layout.pattern");
  if (layout.family == Family::sw || layout.family == Family::sw_incomplete) J_lo = std::max(J_lo, layout.Q + 1);
  if (J_lo > J_hi) throw error(invalid_input, "empty J range", "search_J");
  DesignSolution best;
  best.power = -1;
  for (int J = J_lo; J <= J_hi; ++J) {
    layout.J = J;
    if (layout.family == Family::crxo && J % 2) continue;
    try {
      DesignSolution s = lod_search(layout, rho, econ, budget);
      if (s.power > best.power) best = s;
    } catch (const error& e) {
      if (e.code() != empty_feasible_set) throw;
    }
  }
  if (best.power < 0) throw error(empty_feasible_set, "no design fits the budget for any J", "budget.B");
  return best;
}

double optimal_lambda_r(const IccVector& r) {
  const double A = 1 - r.rho1E, Bc = r.rho1EC - r.rho2EC, C = 1 - r.rho1C;
  const double a = r.rho0E - r.rho1E, b = r.rho1EC - r.rho0EC, c = r.rho0C - r.rho1C;
  const double t2 = 2 * A * b - 2 * Bc * a;
  const double t1 = 2 * A * c - 2 * C * a;
  const double t0 = 2 * Bc * c - 2 * C * b;
  auto denom = [&](double x) { return a * x * x + 2 * b * x + c; };
  auto theta = [&](double x) { return (A * x * x + 2 * Bc * x + C) / denom(x) - 1; };
  std::vector<double> roots;
  if (std::fabs(t2) < 1e-14) {
    if (t1 == 0) throw error(no_admissible_root, "degenerate quadratic for lambda*r", "rho");
    roots.push_back(-t0 / t1);
  } else {
    const double disc = t1 * t1 - 4 * t2 * t0;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      roots.push_back((-t1 + sq) / (2 * t2));
      roots.push_back((-t1 - sq) / (2 * t2));
    }
  }
  double best = std::numeric_limits<double>::quiet_NaN(), best_theta = inf;
  for (double x : roots) {
    if (!(x > 0) || !(denom(x) > 0)) continue;
    const double t = theta(x);
    if (t < best_theta) {
      best_theta = t;
      best = x;
    }
  }
  if (std::isnan(best)) throw error(no_admissible_root, "no admissible positive root for lambda*r", "rho");
  return best;
}

}  // namespace lcrt
