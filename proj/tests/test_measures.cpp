#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "equilib/measures.hpp"

using namespace equilib;

namespace {

KernelMatrix two_point_kernel() {
  MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  return make_explicit_kernel(m);
}

KernelMatrix identity_kernel(int n) {
  return make_explicit_kernel(MatrixXd::Identity(n, n));
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("potentials are matrix-vector products") {
  KernelMatrix id = identity_kernel(2);
  CHECK(potential(id, vec2(1, 2)) == vec2(1, 2));

  KernelMatrix K = two_point_kernel();
  // unit mass at a point extracts a kernel column
  CHECK(potential(K, vec2(0, 1)) == vec2(1, 2));
  CHECK(potential(K, vec2(0.5, 0.5)) == vec2(1.5, 1.5));
  CHECK_THROWS_AS(potential(K, VectorXd::Zero(3)), Error);
}

TEST_CASE("energy inner product basics") {
  KernelMatrix K = two_point_kernel();
  CHECK(inner_product(K, vec2(0, 1), vec2(0, 1)) == doctest::Approx(2.0));
  CHECK(inner_product(K, vec2(0.5, 0.5), vec2(0.5, 0.5)) ==
        doctest::Approx(1.5));
  KernelMatrix id = identity_kernel(2);
  CHECK(inner_product(id, vec2(1, 0), vec2(0, 1)) == doctest::Approx(0.0));
}

TEST_CASE("inner product is bilinear, symmetric, Cauchy-Schwarz") {
  MatrixXd base = MatrixXd::Random(5, 5);
  KernelMatrix K =
      make_explicit_kernel(base * base.transpose() + 5 * MatrixXd::Identity(5, 5));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 50; ++t) {
    VectorXd u(5), v(5), w(5);
    for (int i = 0; i < 5; ++i) {
      u[i] = gauss(rng);
      v[i] = gauss(rng);
      w[i] = gauss(rng);
    }
    const double a = gauss(rng), b = gauss(rng);
    CHECK(inner_product(K, u, v) ==
          doctest::Approx(inner_product(K, v, u)).epsilon(1e-12));
    CHECK(inner_product(K, a * u + b * w, v) ==
          doctest::Approx(a * inner_product(K, u, v) +
                          b * inner_product(K, w, v))
              .epsilon(1e-10));
    CHECK(std::abs(inner_product(K, u, v)) <=
          energy_norm(K, u) * energy_norm(K, v) + 1e-10);
    // linearity of the potential
    CHECK((potential(K, a * u + b * v) -
           (a * potential(K, u) + b * potential(K, v)))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("field values for both admissible forms") {
  KernelMatrix K = two_point_kernel();
  ExternalField zero = ExternalField::zero(2);
  CHECK(zero.values(K) == vec2(0, 0));

  ExternalField h2p = ExternalField::minus_potential(vec2(0, 1));
  CHECK(h2p.values(K) == vec2(-1, -2));

  ExternalField inf_field =
      ExternalField::psi_plus_potential(vec2(0, kInf), vec2(0, 0));
  VectorXd f = inf_field.values(K);
  CHECK(f[0] == 0);
  CHECK(std::isinf(f[1]));

  CHECK_THROWS_AS(ExternalField::psi_plus_potential(vec2(0, -kInf), vec2(0, 0)),
                  Error);
  CHECK_THROWS_AS(ExternalField::minus_potential(vec2(-0.1, 0)), Error);
  CHECK_THROWS_AS(ExternalField::minus_potential(vec2(0.7, 0.7)), Error);
}

TEST_CASE("weighted potential") {
  KernelMatrix K = two_point_kernel();
  const VectorXd mu = vec2(1, 0);
  CHECK(weighted_potential(K, vec2(0, 0), mu) == potential(K, mu));
  CHECK(weighted_potential(K, -potential(K, mu), mu) == vec2(0, 0));
  CHECK(weighted_potential(K, vec2(-1, -1), mu) == vec2(1, 0));
}

TEST_CASE("gauss functional values and the infinite-field gate") {
  KernelMatrix id = identity_kernel(2);
  CHECK(gauss_functional(id, vec2(0, 0), vec2(0.5, 0.5)) ==
        doctest::Approx(0.5));
  CHECK(gauss_functional(id, vec2(1, 1), vec2(0.5, 0.5)) ==
        doctest::Approx(2.5));
  CHECK_THROWS_AS(gauss_functional(id, vec2(0, kInf), vec2(0.5, 0.5)), Error);
  // zero weight on the infinite index is fine
  CHECK(gauss_functional(id, vec2(0, kInf), vec2(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("potential-field identity: I_{U^theta}(mu) = ||mu+theta||^2 - ||theta||^2") {
  MatrixXd base = MatrixXd::Random(6, 6);
  KernelMatrix K =
      make_explicit_kernel(base * base.transpose() + 6 * MatrixXd::Identity(6, 6));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0, 1);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 50; ++t) {
    VectorXd mu(6), theta(6);
    for (int i = 0; i < 6; ++i) {
      mu[i] = unif(rng);        // positive measure
      theta[i] = gauss(rng);    // signed measure
    }
    const VectorXd f = potential(K, theta);
    const double lhs = gauss_functional(K, f, mu);
    const double rhs = K.energy(mu + theta) - K.energy(theta);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    // consequence: the Gauss functional is bounded below by -||theta||^2
    CHECK(lhs >= -K.energy(theta) - 1e-10);
  }
}
