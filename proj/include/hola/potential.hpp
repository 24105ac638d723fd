#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

namespace hola {

// First-order oracle for a potential U on R^d. The sampler only ever sees
// grad; value is optional and used by tests and diagnostics. m and L are the
// strong-convexity and smoothness constants, higher_L optionally bounds the
// tensor norms of higher derivatives of grad U.
struct Potential {
  int dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<double(const Eigen::VectorXd&)> value;  // may be empty
  double m = 0.0;
  double L = 0.0;
  std::vector<double> higher_L;
  Eigen::VectorXd minimizer;

  bool has_value() const { return static_cast<bool>(value); }
};

// U(x) = 1/2 sum_i lambda_i x_i^2 with all lambda_i > 0.
// m = min lambda, L = max lambda, minimizer = 0; the stationary X1-marginal
// of the dynamics is N(0, diag(1/lambda)).
Potential gaussian_potential(const Eigen::VectorXd& lambda);

// U(x) = sum_i sqrt(1 + x_i^2) + (m/2)||x||^2 - d, a strongly convex,
// non-quadratic target with uniformly bounded higher derivatives.
// Constants: m, L = 1 + m; minimizer = 0. The constant offset d is removed
// so that U(0) = 0.
Potential hyperbolic_potential(int d, double m);

// Translates a potential so that its minimizer sits at x_star.
Potential shift(const Potential& p, const Eigen::VectorXd& x_star);

// Max over points and coordinates of |analytic gradient - centered finite
// difference of value|. Requires p.value.
double check_gradient(const Potential& p,
                      const std::vector<Eigen::VectorXd>& points,
                      double fd_step);

}  // namespace hola
