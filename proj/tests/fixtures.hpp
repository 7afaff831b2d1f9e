#pragma once

#include <random>

#include "lcrt/maximin.hpp"
#include "lcrt/tables.hpp"

namespace fx {

using namespace lcrt;

inline TrialLayout crxo(int J) { return {Family::crxo, J}; }
inline TrialLayout pa(int J) { return {Family::pa, J}; }
inline TrialLayout sw(int Q, int J) {
  TrialLayout l{Family::sw, J};
  l.Q = Q;
  return l;
}
inline TrialLayout incomplete(int Q, int J) {
  TrialLayout l{Family::sw_incomplete, J};
  l.Q = Q;
  return l;
}

// fitted trial values used by the worked example
inline IccVector trial_rho() { return {0.048, 0.042, 0.020, 0.018, 0.007, 0.004, 0.75}; }
inline EconModel trial_econ() { return {6.48, 11635, 216, 2089, 0.05}; }
inline BudgetModel trial_budget() {
  BudgetModel b;
  b.B = 600000;
  return b;
}
inline IccBox trial_box() {
  IccVector lo = trial_rho(), hi = trial_rho();
  lo.rho0EC = 0, lo.rho1EC = 0, lo.rho2EC = 0.5;
  hi.rho0EC = 0.01, hi.rho1EC = 0.005, hi.rho2EC = 0.8;
  return {lo, hi};
}

// rejection sample of a valid, positive definite icc vector
inline IccVector random_rho(std::mt19937& g, int J, int K, double top = 0.3) {
  std::uniform_real_distribution<double> u(0, 1);
  for (;;) {
    IccVector r;
    r.rho0E = top * u(g);
    r.rho1E = r.rho0E * u(g);
    r.rho0C = top * u(g);
    r.rho1C = r.rho0C * u(g);
    r.rho2EC = -0.3 + 1.2 * u(g);
    r.rho0EC = std::min({r.rho0E, r.rho0C, r.rho2EC}) * u(g);
    r.rho1EC = std::min({r.rho1E, r.rho1C, r.rho0EC}) * u(g);
    if (satisfies_ordering(r) && is_positive_definite(r, J, K)) return r;
  }
}

inline EconModel random_econ(std::mt19937& g) {
  std::uniform_real_distribution<double> u(0, 1);
  return {0.5 + 2 * u(g), 500 + 5000 * u(g), 1000 + 30000 * u(g), 1000 + 4000 * u(g), 0.05};
}

inline double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace fx
