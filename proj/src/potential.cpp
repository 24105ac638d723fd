#include "hola/potential.hpp"

#include <cmath>

#include "hola/errors.hpp"

namespace hola {

Potential gaussian_potential(const Eigen::VectorXd& lambda) {
  if (lambda.size() == 0) throw InvalidParameter("gaussian_potential: empty lambda");
  if ((lambda.array() <= 0.0).any())
    throw InvalidParameter("gaussian_potential: all lambda_i must be > 0");

  Potential p;
  p.dim = static_cast<int>(lambda.size());
  p.m = lambda.minCoeff();
  p.L = lambda.maxCoeff();
  p.minimizer = Eigen::VectorXd::Zero(p.dim);
  p.grad = [lambda](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return lambda.cwiseProduct(x);
  };
  p.value = [lambda](const Eigen::VectorXd& x) -> double {
    return 0.5 * lambda.dot(x.cwiseProduct(x));
  };
  // grad U is linear, so the only nonzero derivative bound is the first.
  p.higher_L = {p.L};
  return p;
}

Potential hyperbolic_potential(int d, double m) {
  if (d <= 0) throw InvalidParameter("hyperbolic_potential: dim must be positive");
  if (m <= 0.0) throw InvalidParameter("hyperbolic_potential: m must be > 0");

  Potential p;
  p.dim = d;
  p.m = m;
  p.L = 1.0 + m;
  p.minimizer = Eigen::VectorXd::Zero(d);
  p.grad = [m](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return x.array() / (1.0 + x.array().square()).sqrt() + m * x.array();
  };
  p.value = [m, d](const Eigen::VectorXd& x) -> double {
    // Centered so that U(0) = 0.
    return (1.0 + x.array().square()).sqrt().sum() + 0.5 * m * x.squaredNorm() -
           static_cast<double>(d);
  };
  // |d^2/dx^2 sqrt(1+x^2)| <= 1 and higher derivatives are bounded by 3.
  p.higher_L.assign(8, 3.0);
  p.higher_L[0] = 1.0 + m;
  return p;
}

Potential shift(const Potential& p, const Eigen::VectorXd& x_star) {
  if (x_star.size() != p.dim) throw InvalidParameter("shift: dimension mismatch");
  Potential q = p;
  auto grad = p.grad;
  q.grad = [grad, x_star](const Eigen::VectorXd& x) { return grad(x - x_star); };
  if (p.has_value()) {
    auto value = p.value;
    q.value = [value, x_star](const Eigen::VectorXd& x) { return value(x - x_star); };
  }
  q.minimizer = p.minimizer + x_star;
  return q;
}

double check_gradient(const Potential& p,
                      const std::vector<Eigen::VectorXd>& points,
                      double fd_step) {
  if (!p.has_value())
    throw UnsupportedOperation("check_gradient: potential has no value oracle");
  if (fd_step <= 0.0) throw InvalidParameter("check_gradient: fd_step must be > 0");

  double worst = 0.0;
  for (const auto& x : points) {
    const Eigen::VectorXd g = p.grad(x);
    for (int i = 0; i < p.dim; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += fd_step;
      xm[i] -= fd_step;
      const double fd = (p.value(xp) - p.value(xm)) / (2.0 * fd_step);
      worst = std::max(worst, std::abs(g[i] - fd));
    }
  }
  return worst;
}

}  // namespace hola
