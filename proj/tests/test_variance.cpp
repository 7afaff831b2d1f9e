#include <doctest.h>

#include "fixtures.hpp"
#include "lcrt/error.hpp"

using namespace lcrt;

namespace {

const IccVector row1{0.05, 0.025, 0.05, 0.025, 0.02, 0.010, 0.5};
const EconModel ref = reference_econ();

}  // namespace

TEST_CASE("matrix route agrees with the design-constant route on random complete designs") {
  std::mt19937 g(2024);
  int n = 0;
  for (; n < 600; ++n) {
    TrialLayout l;
    const int kind = n % 3;
    if (kind == 0) l = fx::crxo(2 * (1 + int(g() % 4)));
    if (kind == 1) l = fx::pa(1 + int(g() % 8));
    if (kind == 2) {
      const int Q = 2 + int(g() % 5);
      l = fx::sw(Q, Q + 1 + int(g() % 3));
    }
    const int I = l.cluster_step() * (2 + int(g() % 5));
    const int K = 1 + int(g() % 40);
    const IccVector r = fx::random_rho(g, l.J, K);
    const EconModel e = fx::random_econ(g);
    const double a = variance_general(l, I, K, r, e).variance;
    const double b = variance_gls(build_schedule(l, I), K, r, e).variance;
    REQUIRE_MESSAGE(fx::rel(a, b) < 1e-9, "case " << n);
  }
  CHECK(n >= 500);
}

TEST_CASE("family closed forms agree with the general form") {
  std::mt19937 g(5);
  for (int n = 0; n < 200; ++n) {
    const int J = 2 * (1 + int(g() % 4)), I = 2 * (1 + int(g() % 40)), K = 2 + int(g() % 60);
    const IccVector r = fx::random_rho(g, J, K);
    const EconModel e = fx::random_econ(g);
    CHECK(fx::rel(variance_crxo(J, I, K, {}, r, e).variance, variance_general(fx::crxo(J), I, K, r, e).variance) < 1e-10);
    CHECK(fx::rel(variance_pa(J, I, K, {}, r, e).variance, variance_general(fx::pa(J), I, K, r, e).variance) < 1e-10);
  }
  CHECK(fx::rel(variance_crxo(2, 30, 14, {}, row1, ref).variance,
                variance_general(fx::crxo(2), 30, 14, row1, ref).variance) < 1e-10);
}

TEST_CASE("frozen oracle variances") {
  CHECK(fx::rel(variance_general(fx::crxo(2), 30, 14, row1, ref).variance, 2177619.047619047) < 1e-12);
  CHECK(fx::rel(variance_general(fx::pa(2), 30, 14, row1, ref).variance, 3380952.3809523806) < 1e-12);
  const double v = variance_general(fx::sw(3, 4), 30, 7, row1, ref).variance;
  CHECK(fx::rel(v, 4945834.746058933) < 1e-12);
  CHECK(power(v, ref.beta1, ref.alpha) == doctest::Approx(0.4359125008).epsilon(1e-9));
}

TEST_CASE("reference powers") {
  CHECK(power(variance_crxo(2, 30, 14, {}, row1, ref).variance, 4000, 0.05) == doctest::Approx(0.774).epsilon(0.002 / 0.774));
  CHECK(power(variance_pa(2, 40, 9, {}, row1, ref).variance, 4000, 0.05) == doctest::Approx(0.610).epsilon(0.002 / 0.61));
  const auto e = fx::trial_econ();
  const auto r = fx::trial_rho();
  CHECK(std::fabs(power(variance_crxo(8, 8, 36, {}, r, e).variance, e.beta1, e.alpha) - 0.996) <= 0.002);
  CHECK(std::fabs(power(variance_pa(8, 66, 3, {}, r, e).variance, e.beta1, e.alpha) - 0.893) <= 0.002);
}

TEST_CASE("independent data reduces to a difference of means") {
  const IccVector zero{};
  for (int J : {2, 4}) {
    const double I = 10, K = 7;
    const double want = 4 * (ref.lambda * ref.lambda * ref.sigmaE * ref.sigmaE + ref.sigmaC * ref.sigmaC) / (I * J * K);
    CHECK(fx::rel(variance_crxo(J, I, K, {}, zero, ref).variance, want) < 1e-10);
    CHECK(fx::rel(variance_pa(J, I, K, {}, zero, ref).variance, want) < 1e-10);
  }
}

TEST_CASE("without between-period icc parallel arm matches crossover") {
  IccVector r = row1;
  r.rho1E = r.rho1C = r.rho1EC = 0;
  for (int J : {2, 4, 6})
    CHECK(fx::rel(variance_pa(J, 20, 9, {}, r, ref).variance, variance_crxo(J, 20, 9, {}, r, ref).variance) < 1e-10);
}

TEST_CASE("incomplete stepped wedge through the matrix route") {
  const auto e = fx::trial_econ();
  const double v = design_variance(fx::incomplete(7, 8), 28, 11, fx::trial_rho(), e).variance;
  CHECK(std::fabs(power(v, e.beta1, e.alpha) - 0.866) <= 0.002);
}

TEST_CASE("singular information is reported") {
  Schedule s;
  s.Z = Eigen::MatrixXi::Zero(1, 2);
  s.observed = Mask::Constant(1, 2, true);
  try {
    variance_gls(s, 5, row1, ref);
    FAIL("expected an error");
  } catch (const error& err) {
    CHECK(err.code() == singular_design);
  }
}

TEST_CASE("power examples") {
  CHECK(power(1e6, 0, 0.05) == doctest::Approx(0.025).epsilon(1e-12));
  const double z = normal_quantile(0.975);
  CHECK(power(4.0, 2 * z, 0.05) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_cdf(normal_quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("power is monotone in effect size and in variance") {
  double last = 0;
  for (double b = 0; b <= 10000; b += 250) {
    const double p = power(2e6, b, 0.05);
    CHECK(p >= last);
    CHECK(power(2e6, -b, 0.05) == doctest::Approx(p));
    last = p;
  }
  last = 1;
  for (double v = 1e5; v <= 1e8; v *= 1.5) {
    const double p = power(v, 4000, 0.05);
    CHECK(p <= last);
    last = p;
  }
}

TEST_CASE("variance falls with more clusters and larger clusters") {
  for (const TrialLayout& l : {fx::crxo(4), fx::pa(4), fx::sw(3, 4)}) {
    const int step = l.cluster_step();
    for (int K : {2, 5, 20}) {
      double last = INFINITY;
      for (int I = step; I <= 30 * step; I += step) {
        const double v = variance_general(l, I, K, row1, ref).variance;
        CHECK(v < last);
        last = v;
      }
    }
    double last = INFINITY;
    for (int K = 2; K <= 100; ++K) {
      const double v = variance_general(l, 6 * step, K, row1, ref).variance;
      CHECK(v <= last * (1 + 1e-12));
      last = v;
    }
  }
}

TEST_CASE("rescaling sigmaE against lambda leaves the variance unchanged") {
  std::mt19937 g(9);
  for (int n = 0; n < 50; ++n) {
    EconModel e = fx::random_econ(g), f = e;
    f.sigmaE *= 3.7;
    f.lambda /= 3.7;
    const IccVector r = fx::random_rho(g, 4, 10);
    CHECK(fx::rel(variance_general(fx::sw(3, 4), 6, 10, r, e).variance,
                  variance_general(fx::sw(3, 4), 6, 10, r, f).variance) < 1e-12);
  }
}

TEST_CASE("intermediates are reported") {
  const auto rep = variance_general(fx::crxo(2), 30, 14, row1, ref);
  REQUIRE(rep.has_intermediates);
  CHECK(rep.intermediates.U == 30);
  CHECK(rep.intermediates.kappa.E == doctest::Approx(kappas(row1, 14).E));
}
