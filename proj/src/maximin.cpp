#include "lcrt/maximin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lcrt/error.hpp"
#include "lcrt/parallel.hpp"

namespace lcrt {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double radical_inverse(unsigned n, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0;
  while (n) {
    r += f * (n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

constexpr unsigned primes[7] = {2, 3, 5, 7, 11, 13, 17};

bool in_range(const IccVector& r) {
  auto a = r.to_array();
  for (int k = 0; k < 4; ++k)
    if (!(a[k] >= 0 && a[k] < 1)) return false;
  for (int k = 4; k < 7; ++k)
    if (!(a[k] > -1 && a[k] < 1)) return false;
  return true;
}

// pull a box point toward the ordering constraints, then back into the box
IccVector repair(IccVector r, const IccBox& box) {
  r.rho1E = std::min(r.rho1E, r.rho0E);
  r.rho1C = std::min(r.rho1C, r.rho0C);
  r.rho0EC = std::min({r.rho0EC, r.rho0E, r.rho0C, r.rho2EC});
  r.rho1EC = std::min({r.rho1EC, r.rho1E, r.rho1C, r.rho0EC});
  auto a = r.to_array(), lo = box.min.to_array(), hi = box.max.to_array();
  for (int k = 0; k < 7; ++k) a[k] = std::clamp(a[k], lo[k], hi[k]);
  return IccVector::from_array(a);
}

struct Probe {
  IccVector rho;
  double v_dec = 0;
};

class Inner {
 public:
  Inner(const Efficiency& eff, const IccBox& box, const MaximinOptions& opts) : eff_(eff), box_(box), opts_(opts) {
    box_.validate();
    lo_ = box.min.to_array();
    hi_ = box.max.to_array();
    for (int k = 0; k < 7; ++k)
      if (hi_[k] > lo_[k]) free_.push_back(k);
    build_probes();
  }

  bool any_static_feasible() const { return !probes_.empty(); }

  WorstCase solve(int I, int K) const {
    const int J = eff_.layout().J;
    struct Scored {
      double value;
      std::size_t index;
    };
    std::vector<Scored> scored;
    bool any_feasible = false;
    std::size_t first_feasible = 0;
    for (std::size_t n = 0; n < probes_.size(); ++n) {
      const Probe& p = probes_[n];
      if (!(min_eigenvalue(p.rho, J, K) > pd_tolerance)) continue;
      if (!any_feasible) first_feasible = n;
      any_feasible = true;
      const double v = numeric_ ? eff_.with_decimal(p.rho, p.v_dec, I, K) : eff_(p.rho, I, K);
      if (std::isfinite(v)) scored.push_back({v, n});
    }
    if (!any_feasible) throw error(infeasible_box, "no feasible icc point in the box at this (J, K)", "box");
    WorstCase best;
    best.re = inf;
    best.rho = probes_[first_feasible].rho;
    if (scored.empty()) return best;
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.value < b.value; });
    best.re = scored.front().value;
    best.rho = probes_[scored.front().index].rho;

    // user seeds always start a descent, then the best probes
    std::vector<std::size_t> starts;
    for (const auto& s : scored)
      if (s.index < seed_count_) starts.push_back(s.index);
    for (const auto& s : scored) {
      if (int(starts.size()) >= opts_.keep + int(seed_count_)) break;
      const IccVector& r = probes_[s.index].rho;
      bool dup = std::any_of(starts.begin(), starts.end(), [&](std::size_t t) { return probes_[t].rho == r; });
      if (!dup) starts.push_back(s.index);
    }
    if (free_.empty()) return best;
    for (std::size_t t : starts) {
      std::vector<double> x = to_x(probes_[t].rho);
      double fx = 0;
      std::vector<double> xmin = simplex(x, I, K, fx);
      const IccVector end = at(xmin);
      if (opts_.trace) best.trace.push_back({probes_[t].rho, end, fx});
      if (fx < best.re) {
        best.re = fx;
        best.rho = end;
      }
    }
    return best;
  }

 private:
  const Efficiency& eff_;
  IccBox box_;
  const MaximinOptions& opts_;
  std::array<double, 7> lo_{}, hi_{};
  std::vector<int> free_;
  std::vector<Probe> probes_;
  bool numeric_ = false;
  std::size_t seed_count_ = 0;

  IccVector at(const std::vector<double>& x) const {
    auto a = lo_;
    for (std::size_t i = 0; i < free_.size(); ++i) {
      const int k = free_[i];
      a[k] = lo_[k] + x[i] * (hi_[k] - lo_[k]);
    }
    return IccVector::from_array(a);
  }

  std::vector<double> to_x(const IccVector& r) const {
    auto a = r.to_array();
    std::vector<double> x(free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) {
      const int k = free_[i];
      x[i] = (a[k] - lo_[k]) / (hi_[k] - lo_[k]);
    }
    return x;
  }

  bool static_ok(const IccVector& r) const { return box_.contains(r) && in_range(r) && satisfies_ordering(r); }

  void add_probe(const IccVector& r) {
    if (!static_ok(r)) return;
    probes_.push_back({r, 0});
  }

  void build_probes() {
    const int d = int(free_.size());
    const IccVector center = IccVector::from_array([&] {
      auto a = lo_;
      for (int k = 0; k < 7; ++k) a[k] = 0.5 * (lo_[k] + hi_[k]);
      return a;
    }());
    for (const auto& s : opts_.seeds) add_probe(s);
    seed_count_ = probes_.size();
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      auto a = lo_;
      for (int i = 0; i < d; ++i) a[free_[i]] = (mask >> i & 1u) ? hi_[free_[i]] : lo_[free_[i]];
      add_probe(repair(IccVector::from_array(a), box_));
    }
    add_probe(repair(center, box_));
    for (int i = 0; i < d; ++i)
      for (double edge : {lo_[free_[i]], hi_[free_[i]]}) {
        auto a = center.to_array();
        a[free_[i]] = edge;
        add_probe(repair(IccVector::from_array(a), box_));
      }
    if (d > 0)
      for (int n = 1; n <= opts_.scan_points; ++n) {
        std::vector<double> x(d);
        for (int i = 0; i < d; ++i) x[i] = radical_inverse(unsigned(n), primes[i]);
        add_probe(at(x));
      }
    numeric_ = !closed_form(eff_.layout().family);
    if (numeric_)
      for (auto& p : probes_) p.v_dec = eff_.decimal_variance(p.rho);
  }

  double objective(const std::vector<double>& x, int I, int K) const {
    for (double v : x)
      if (v < 0 || v > 1) return inf;
    const IccVector r = at(x);
    if (!in_range(r) || !satisfies_ordering(r)) return inf;
    if (!(min_eigenvalue(r, eff_.layout().J, K) > pd_tolerance)) return inf;
    return eff_(r, I, K);
  }

  // Nelder-Mead in scaled coordinates; infeasible probes score +inf
  std::vector<double> simplex(const std::vector<double>& x0, int I, int K, double& fbest) const {
    const int d = int(x0.size());
    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> f(d + 1);
    for (int i = 0; i < d; ++i) pts[i + 1][i] += (x0[i] + 0.1 <= 1) ? 0.1 : -0.1;
    for (int i = 0; i <= d; ++i) f[i] = objective(pts[i], I, K);
    std::vector<int> order(d + 1);
    auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
      std::vector<double> p(d);
      for (int i = 0; i < d; ++i) p[i] = c[i] + t * (w[i] - c[i]);
      return p;
    };
    for (int it = 0; it < opts_.max_iter; ++it) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
      const int b = order.front(), w = order.back(), sw = order[d - 1];
      double diam = 0;
      for (int i = 0; i <= d; ++i)
        for (int k = 0; k < d; ++k) diam = std::max(diam, std::fabs(pts[i][k] - pts[b][k]));
      if (diam < opts_.tol) break;
      std::vector<double> c(d, 0.0);
      for (int i = 0; i <= d; ++i)
        if (i != w)
          for (int k = 0; k < d; ++k) c[k] += pts[i][k] / d;
      auto xr = point(c, pts[w], -1.0);
      const double fr = objective(xr, I, K);
      if (fr < f[b]) {
        auto xe = point(c, pts[w], -2.0);
        const double fe = objective(xe, I, K);
        if (fe < fr) {
          pts[w] = xe;
          f[w] = fe;
        } else {
          pts[w] = xr;
          f[w] = fr;
        }
        continue;
      }
      if (fr < f[sw]) {
        pts[w] = xr;
        f[w] = fr;
        continue;
      }
      const bool outside = fr < f[w];
      auto xc = outside ? point(c, xr, 0.5) : point(c, pts[w], 0.5);
      const double fc = objective(xc, I, K);
      if (fc < (outside ? fr : f[w])) {
        pts[w] = xc;
        f[w] = fc;
        continue;
      }
      for (int i = 0; i <= d; ++i) {
        if (i == b) continue;
        pts[i] = point(pts[b], pts[i], 0.5);
        f[i] = objective(pts[i], I, K);
      }
    }
    int b = int(std::min_element(f.begin(), f.end()) - f.begin());
    fbest = f[b];
    return pts[b];
  }
};

bool better(const CandidateEfficiency& a, const CandidateEfficiency& b) {
  if (a.re != b.re) return a.re > b.re;
  if (a.I != b.I) return a.I < b.I;
  return a.K < b.K;
}

bool admissible(double re) { return re > 0 && re <= 1; }

void check_deadline(const MaximinOptions& opts) {
  if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline)
    throw error(deadline_exceeded, "maximin search exceeded its wall-clock budget", "deadline");
}

void validate_inputs(const TrialLayout& layout, const IccBox& box, const EconModel& econ, const BudgetModel& budget) {
  layout.validate();
  box.validate();
  econ.validate();
  budget.validate();
}

}  // namespace

Efficiency::Efficiency(const TrialLayout& layout, const EconModel& econ, const BudgetModel& budget)
    : sv_(layout, econ), econ_(econ), budget_(budget) {
  budget_.validate();
}

double Efficiency::decimal_variance(const IccVector& rho) const {
  const TrialLayout& l = sv_.layout();
  if (closed_form(l.family)) {
    double th;
    try {
      th = theta_for(l.family, rho, econ_.lambda_r(), l.J);
    } catch (const error&) {
      return inf;
    }
    if (!(th > 0)) return inf;
    const double K = std::sqrt(budget_.c1 * th / (budget_.c2 * l.J));
    const double I = budget_.B / (budget_.c1 + std::sqrt(th * budget_.c1 * budget_.c2 * l.J));
    return sv_(rho, I, K);
  }
  return decimal_lod_numeric(sv_, rho, budget_).variance;
}

double Efficiency::with_decimal(const IccVector& rho, double v_dec, double I, double K) const {
  if (!std::isfinite(v_dec) || !(v_dec > 0)) return inf;
  const double v = sv_(rho, I, K);
  if (!std::isfinite(v) || !(v > 0)) return inf;
  return v_dec / v;
}

double Efficiency::operator()(const IccVector& rho, double I, double K) const {
  const TrialLayout& l = sv_.layout();
  if (closed_form(l.family)) {
    double th;
    try {
      th = theta_for(l.family, rho, econ_.lambda_r(), l.J);
    } catch (const error&) {
      return inf;
    }
    if (!(th > 0)) return inf;
    const double c1 = budget_.c1, c2 = budget_.c2;
    const double g = std::pow(std::sqrt(c1) + std::sqrt(th * c2 * l.J), 2);
    // closed form assumes the whole budget is spent; scale by the share actually used
    return g / (th + K) * K / (c1 + l.J * K * c2) * (I * (c1 + c2 * l.J * K) / budget_.B);
  }
  return with_decimal(rho, decimal_variance(rho), I, K);
}

double relative_efficiency(const TrialLayout& layout, const IccVector& rho, double I, double K, const EconModel& econ,
                           const BudgetModel& budget) {
  return Efficiency(layout, econ, budget)(rho, I, K);
}

WorstCase worst_case_icc(const TrialLayout& layout, const IccBox& box, int I, int K, const EconModel& econ,
                         const BudgetModel& budget, const MaximinOptions& opts) {
  validate_inputs(layout, box, econ, budget);
  Efficiency eff(layout, econ, budget);
  Inner inner(eff, box, opts);
  if (!inner.any_static_feasible()) throw error(infeasible_box, "box has no point satisfying the ordering constraints", "box");
  return inner.solve(I, K);
}

namespace {

struct Job {
  Candidate c;
  double bound;
  std::size_t order;
};

CandidateEfficiency run_one(const Inner& inner, const Candidate& c, WorstCase* keep) {
  CandidateEfficiency out{c.I, c.K, inf, {}};
  try {
    WorstCase w = inner.solve(c.I, c.K);
    out.re = w.re;
    out.rho = w.rho;
    if (keep) *keep = std::move(w);
  } catch (const error& e) {
    if (e.code() != infeasible_box) throw;
  }
  return out;
}

MaximinSolution finish(const TrialLayout& layout, const CandidateEfficiency& best, WorstCase trace, int evaluated) {
  if (!admissible(best.re)) throw error(empty_feasible_set, "no candidate has worst-case RE in (0, 1]", "box");
  MaximinSolution s;
  s.I = best.I;
  s.K = best.K;
  s.J = layout.J;
  s.worst_re = best.re;
  s.worst_rho = best.rho;
  s.inner_trace = std::move(trace.trace);
  s.evaluated = evaluated;
  return s;
}

}  // namespace

MaximinSolution mmd_search(const TrialLayout& layout, const IccBox& box, const EconModel& econ,
                           const BudgetModel& budget, const MaximinOptions& opts) {
  validate_inputs(layout, box, econ, budget);
  const auto cand = feasible_designs(layout, budget);
  if (cand.empty()) throw error(empty_feasible_set, "no design fits the budget", "budget.B");
  Efficiency eff(layout, econ, budget);
  MaximinOptions quiet = opts;
  quiet.trace = false;
  Inner inner(eff, box, quiet);
  if (!inner.any_static_feasible()) throw error(infeasible_box, "box has no point satisfying the ordering constraints", "box");

  // RE <= I * cost / B, so candidates are visited by that bound and the scan
  // stops once no remaining candidate can reach the incumbent
  std::vector<Job> jobs;
  for (std::size_t n = 0; n < cand.size(); ++n)
    jobs.push_back({cand[n], design_cost(layout, cand[n].I, cand[n].K, budget) / budget.B, n});
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.bound > b.bound; });

  CandidateEfficiency best{0, 0, -inf, {}};
  int evaluated = 0;
  const std::size_t chunk = std::size_t(std::max(1, 4 * max_threads()));
  std::size_t next = 0;
  while (next < jobs.size()) {
    check_deadline(opts);
    if (best.re > -inf && jobs[next].bound < best.re) break;
    const std::size_t end = std::min(jobs.size(), next + chunk);
    std::vector<CandidateEfficiency> res(end - next);
    bool failed = false;
    std::string what;
#pragma omp parallel for schedule(dynamic, 1)
    for (long n = long(next); n < long(end); ++n) {
      try {
        res[n - next] = run_one(inner, jobs[n].c, nullptr);
      } catch (const std::exception& e) {
#pragma omp critical
        {
          failed = true;
          what = e.what();
        }
      }
    }
    if (failed) throw error(invalid_input, what, "box");
    for (const auto& r : res) {
      ++evaluated;
      if (admissible(r.re) && (best.re == -inf || better(r, best))) best = r;
    }
    next = end;
  }
  WorstCase trace;
  if (opts.trace && admissible(best.re)) {
    Inner traced(eff, box, opts);
    trace = traced.solve(best.I, best.K);
  }
  return finish(layout, best, std::move(trace), evaluated);
}

MaximinSolution mmd_search_serial(const TrialLayout& layout, const IccBox& box, const EconModel& econ,
                                  const BudgetModel& budget, const MaximinOptions& opts) {
  validate_inputs(layout, box, econ, budget);
  const auto cand = feasible_designs(layout, budget);
  if (cand.empty()) throw error(empty_feasible_set, "no design fits the budget", "budget.B");
  Efficiency eff(layout, econ, budget);
  Inner inner(eff, box, opts);
  if (!inner.any_static_feasible()) throw error(infeasible_box, "box has no point satisfying the ordering constraints", "box");
  CandidateEfficiency best{0, 0, 0, {}};
  WorstCase best_trace;
  int evaluated = 0;
  for (const auto& c : cand) {
    check_deadline(opts);
    WorstCase w;
    CandidateEfficiency r = run_one(inner, c, opts.trace ? &w : nullptr);
    ++evaluated;
    if (admissible(r.re) && r.re > best.re) {
      best = r;
      best_trace = std::move(w);
    }
  }
  return finish(layout, best, std::move(best_trace), evaluated);
}

std::vector<CandidateEfficiency> mmd_scan(const TrialLayout& layout, const IccBox& box, const EconModel& econ,
                                          const BudgetModel& budget, const MaximinOptions& opts) {
  validate_inputs(layout, box, econ, budget);
  const auto cand = feasible_designs(layout, budget);
  Efficiency eff(layout, econ, budget);
  MaximinOptions quiet = opts;
  quiet.trace = false;
  Inner inner(eff, box, quiet);
  std::vector<CandidateEfficiency> out(cand.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long n = 0; n < long(cand.size()); ++n) out[n] = run_one(inner, cand[n], nullptr);
  return out;
}

}  // namespace lcrt
