#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "hola/errors.hpp"
#include "hola/potential.hpp"
#include "hola/rng.hpp"

namespace {

std::vector<Eigen::VectorXd> random_points(int n, int d, std::uint64_t seed) {
  hola::CounterRng rng(seed, 0, 0);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = 2.0 * rng.next_normal();
    pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("gaussian potential: gradient, value, constants") {
  Eigen::VectorXd lambda(3);
  lambda << 1.0, 4.0, 0.5;
  const auto p = hola::gaussian_potential(lambda);

  CHECK(p.dim == 3);
  CHECK(p.m == doctest::Approx(0.5));
  CHECK(p.L == doctest::Approx(4.0));
  CHECK(p.minimizer.norm() == 0.0);

  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 3.0;
  const Eigen::VectorXd g = p.grad(x);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(-8.0));
  CHECK(g[2] == doctest::Approx(1.5));
  CHECK(p.value(x) == doctest::Approx(0.5 * (1.0 + 16.0 + 4.5)));
}

TEST_CASE("gaussian potential: rejects non-positive curvature") {
  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS(hola::gaussian_potential(bad), hola::InvalidParameter);
  CHECK_THROWS_AS(hola::gaussian_potential(Eigen::VectorXd()),
                  hola::InvalidParameter);
}

TEST_CASE("gaussian finite-difference check: 10 points, 1e-6") {
  const auto p = hola::gaussian_potential(Eigen::VectorXd::Ones(2));
  const double dev = hola::check_gradient(p, random_points(10, 2, 11), 1e-5);
  CHECK(dev <= 1e-6);
}

TEST_CASE("hyperbolic potential: constants and gradient at 0") {
  const auto p = hola::hyperbolic_potential(3, 1.0);
  CHECK(p.dim == 3);
  CHECK(p.m == doctest::Approx(1.0));
  CHECK(p.L == doctest::Approx(2.0));
  CHECK(p.value(Eigen::VectorXd::Zero(3)) == doctest::Approx(0.0));
  CHECK(p.grad(Eigen::VectorXd::Zero(3)).norm() == 0.0);
  CHECK(p.higher_L[0] == doctest::Approx(2.0));
  CHECK(p.higher_L[1] == doctest::Approx(3.0));

  CHECK_THROWS_AS(hola::hyperbolic_potential(0, 1.0), hola::InvalidParameter);
  CHECK_THROWS_AS(hola::hyperbolic_potential(3, 0.0), hola::InvalidParameter);
}

TEST_CASE("hyperbolic finite-difference check: d=3, 1e-6") {
  const auto p = hola::hyperbolic_potential(3, 1.0);
  const double dev = hola::check_gradient(p, random_points(10, 3, 13), 1e-5);
  CHECK(dev <= 1e-6);
}

TEST_CASE("finite-difference check at 100 random points") {
  Eigen::VectorXd lambda(4);
  lambda << 0.5, 1.0, 2.0, 4.0;
  const auto p = hola::gaussian_potential(lambda);
  CHECK(hola::check_gradient(p, random_points(100, 4, 17), 1e-5) <= 1e-6);

  const auto q = hola::hyperbolic_potential(4, 0.5);
  CHECK(hola::check_gradient(q, random_points(100, 4, 19), 1e-5) <= 1e-6);
}

TEST_CASE("shift translates the minimizer") {
  const auto p = hola::hyperbolic_potential(2, 1.0);
  Eigen::VectorXd x_star(2);
  x_star << 1.5, -0.5;
  const auto q = hola::shift(p, x_star);

  CHECK((q.minimizer - x_star).norm() == 0.0);
  CHECK(q.grad(x_star).norm() == doctest::Approx(0.0));
  CHECK(q.value(x_star) == doctest::Approx(0.0));
  // Constants are translation invariant.
  CHECK(q.m == p.m);
  CHECK(q.L == p.L);
  // Gradient still matches finite differences after the shift.
  CHECK(hola::check_gradient(q, random_points(10, 2, 23), 1e-5) <= 1e-6);

  CHECK_THROWS_AS(hola::shift(p, Eigen::VectorXd::Zero(3)),
                  hola::InvalidParameter);
}

TEST_CASE("check_gradient requires a value oracle") {
  hola::Potential p;
  p.dim = 1;
  p.grad = [](const Eigen::VectorXd& x) { return x; };
  CHECK_THROWS_AS(hola::check_gradient(p, random_points(1, 1, 29), 1e-5),
                  hola::UnsupportedOperation);

  const auto q = hola::gaussian_potential(Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS(hola::check_gradient(q, random_points(1, 1, 31), 0.0),
                  hola::InvalidParameter);
}
