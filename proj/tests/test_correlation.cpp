#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "lcrt/error.hpp"

using namespace lcrt;

namespace {

const IccVector row1{0.05, 0.025, 0.05, 0.025, 0.02, 0.010, 0.5};

std::vector<double> expand(const EigenSpectrum& s) {
  std::vector<double> v;
  for (auto [value, mult] : s.with_multiplicity()) v.insert(v.end(), mult, value);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> dense(const IccVector& r, int J, int K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_correlation(r, J, K), Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

bool violates(const IccVector& r, const std::string& id) {
  for (const auto& v : validate_ordering(r))
    if (v.constraint == id) return true;
  return false;
}

}  // namespace

TEST_CASE("ordering examples") {
  CHECK(validate_ordering(row1).empty());
  IccVector r = row1;
  r.rho1E = 0.06;
  CHECK(violates(r, "(i)"));
  r = row1;
  r.rho0EC = 0.03;
  r.rho1EC = 0.028;
  CHECK(violates(r, "(iv)"));
  r = row1;
  r.rho0E = 1.2;
  CHECK(violates(r, "range"));
}

TEST_CASE("spectrum of zero icc is all ones") {
  const auto s = eigen_spectrum(IccVector{}, 3, 4);
  for (double v : expand(s)) CHECK(v == doctest::Approx(1.0));
  CHECK(expand(s).size() == 2u * 3 * 4);
}

TEST_CASE("effect-only spectrum simplifies") {
  IccVector r;
  r.rho0E = 0.1;
  r.rho1E = 0.04;
  const int J = 4, K = 5;
  std::vector<double> want;
  want.push_back(1 + (K - 1) * r.rho0E + (J - 1) * K * r.rho1E);
  want.insert(want.end(), J - 1, 1 + (K - 1) * r.rho0E - K * r.rho1E);
  want.insert(want.end(), J * (K - 1), 1 - r.rho0E);
  want.insert(want.end(), J * K, 1.0);
  std::sort(want.begin(), want.end());
  const auto got = expand(eigen_spectrum(r, J, K));
  REQUIRE(got.size() == want.size());
  for (std::size_t n = 0; n < got.size(); ++n) CHECK(got[n] == doctest::Approx(want[n]).epsilon(1e-14));
}

TEST_CASE("closed-form spectrum matches dense diagonalization with multiplicity") {
  std::mt19937 g(7);
  CHECK(expand(eigen_spectrum(row1, 2, 3)).size() == 12u);
  int cases = 0;
  for (int J = 1; J <= 100; ++J)
    for (int K = 1; 2 * J * K <= 200; ++K) {
      const IccVector r = (J == 2 && K == 3) ? row1 : fx::random_rho(g, J, K, 0.5);
      const auto a = expand(eigen_spectrum(r, J, K)), b = dense(r, J, K);
      REQUIRE(a.size() == b.size());
      double worst = 0;
      for (std::size_t n = 0; n < a.size(); ++n) worst = std::max(worst, std::fabs(a[n] - b[n]));
      CHECK_MESSAGE(worst < 1e-9, "J=" << J << " K=" << K);
      ++cases;
    }
  CHECK(cases > 400);
}

TEST_CASE("eigenvalues sum to the trace") {
  std::mt19937 g(11);
  for (int n = 0; n < 200; ++n) {
    const int J = 1 + int(g() % 10), K = 1 + int(g() % 50);
    const auto s = eigen_spectrum(fx::random_rho(g, J, K, 0.6), J, K);
    double sum = 0;
    for (auto [v, m] : s.with_multiplicity()) sum += v * m;
    CHECK(sum == doctest::Approx(2.0 * J * K).epsilon(1e-12));
  }
}

TEST_CASE("positive definiteness examples") {
  CHECK(is_positive_definite(IccVector{}, 3, 3));
  IccVector r;
  r.rho0E = r.rho0C = 0.1;
  r.rho2EC = 0.9999;
  for (int J : {1, 2, 5}) CHECK_FALSE(is_positive_definite(r, J, 2));
  CHECK(min_eigenvalue(r, 2, 2) < 0);
  CHECK(is_positive_definite(row1, 6, 8));
}

TEST_CASE("dense correlation layout") {
  IccVector r;
  r.rho2EC = 0.3;
  auto R = assemble_correlation(r, 1, 1);
  Eigen::Matrix2d want;
  want << 1, 0.3, 0.3, 1;
  CHECK(R.isApprox(want));

  r = {};
  r.rho0E = 0.2;
  R = assemble_correlation(r, 1, 2);
  CHECK(R(0, 2) == 0.2);
  CHECK(R(1, 3) == 0);

  R = assemble_correlation(row1, 2, 2);
  // (period, individual, outcome) ordering
  auto at = [&](int j, int k, int o, int jj, int kk, int oo) { return R(2 * (j * 2 + k) + o, 2 * (jj * 2 + kk) + oo); };
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int o = 0; o < 2; ++o)
        for (int jj = 0; jj < 2; ++jj)
          for (int kk = 0; kk < 2; ++kk)
            for (int oo = 0; oo < 2; ++oo) {
              double e;
              if (j != jj)
                e = o != oo ? row1.rho1EC : (o == 0 ? row1.rho1E : row1.rho1C);
              else if (k != kk)
                e = o != oo ? row1.rho0EC : (o == 0 ? row1.rho0E : row1.rho0C);
              else
                e = o != oo ? row1.rho2EC : 1.0;
              CHECK(at(j, k, o, jj, kk, oo) == e);
            }
}

TEST_CASE("icc and covariance components") {
  auto v = icc_to_covariance(IccVector{}, 1, 1);
  CHECK(v.cluster.isZero());
  CHECK(v.cluster_period.isZero());
  CHECK(v.individual.isIdentity());

  v = icc_to_covariance(row1, 1, 3000);
  CHECK(v.cluster(0, 0) == doctest::Approx(0.025));
  CHECK(v.cluster_period(0, 0) == doctest::Approx(0.025));
  CHECK(v.individual(0, 0) == doctest::Approx(0.95));

  std::mt19937 g(3);
  for (int n = 0; n < 100; ++n) {
    const IccVector r = fx::random_rho(g, 3, 3, 0.8);
    const auto back = covariance_to_icc(icc_to_covariance(r, 2.5, 700)).to_array();
    const auto a = r.to_array();
    for (int k = 0; k < 7; ++k) CHECK(back[k] == doctest::Approx(a[k]).epsilon(1e-12));
  }
}

TEST_CASE("collapsed kappas") {
  const Kappa k = kappas(row1, 14);
  CHECK(k.E == doctest::Approx(1 + 13 * 0.05 - 14 * 0.025));
  CHECK(k.C == doctest::Approx(1 + 13 * 0.05 - 14 * 0.025));
  CHECK(k.EC == doctest::Approx(0.5 + 13 * 0.02 - 14 * 0.01));
}

TEST_CASE("autocorrelation helpers") {
  CHECK(cac_effect(row1) == doctest::Approx(0.5));
  CHECK(cac_cross(row1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(cac_cost(IccVector{}), error);
}

TEST_CASE("box validation") {
  IccBox b{row1, row1};
  CHECK_NOTHROW(b.validate());
  CHECK(b.contains(row1));
  b.max.rho0E = 0.01;
  CHECK_THROWS_AS(b.validate(), error);
}
