#include "hola/canonical.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "hola/errors.hpp"

namespace hola {

CanonicalOperators build_canonical(int K, double gamma) {
  if (K < 2) throw InvalidParameter("build_canonical: K must be >= 2");
  if (gamma <= 0.0) throw InvalidParameter("build_canonical: gamma must be > 0");

  CanonicalOperators ops;
  ops.K = K;
  ops.gamma = gamma;
  ops.D = Eigen::MatrixXd::Zero(K, K);
  ops.D(K - 1, K - 1) = gamma;

  ops.Q = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i + 1 < K; ++i) {
    const double c = (i == 0) ? 1.0 : gamma;
    ops.Q(i, i + 1) = -c;
    ops.Q(i + 1, i) = c;
  }

  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(K, K);
  J(0, 0) = 0.0;
  ops.A = -(ops.D + ops.Q) * J;
  return ops;
}

double NodeSet::basis_at(int j, double sigma) const {
  double acc = 0.0;
  // Horner in the monomial coefficients.
  for (int p = static_cast<int>(basis.cols()) - 1; p >= 0; --p)
    acc = acc * sigma + basis(j, p);
  return acc;
}

NodeSet make_nodes(int M) {
  if (M < 2) throw InvalidParameter("make_nodes: M must be >= 2");
  if (M > 8) throw InvalidParameter("make_nodes: M > 8 is not supported");

  NodeSet ns;
  ns.M = M;
  ns.nodes = Eigen::VectorXd::LinSpaced(M, 0.0, 1.0);

  ns.basis = Eigen::MatrixXd::Zero(M, M);
  for (int j = 0; j < M; ++j) {
    // ell_j = prod_{k != j} (sigma - c_k) / (c_j - c_k), expanded by
    // repeated multiplication with the linear factors.
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(M);
    coef[0] = 1.0;
    int deg = 0;
    for (int k = 0; k < M; ++k) {
      if (k == j) continue;
      const double scale = ns.nodes[j] - ns.nodes[k];
      Eigen::VectorXd next = Eigen::VectorXd::Zero(M);
      for (int p = 0; p <= deg; ++p) {
        next[p + 1] += coef[p] / scale;
        next[p] -= ns.nodes[k] * coef[p] / scale;
      }
      coef = next;
      ++deg;
    }
    ns.basis.row(j) = coef.transpose();
  }
  return ns;
}

double lebesgue_constant(const NodeSet& nodes) {
  auto lebesgue_at = [&nodes](double sigma) {
    double s = 0.0;
    for (int j = 0; j < nodes.M; ++j) s += std::abs(nodes.basis_at(j, sigma));
    return s;
  };

  const int grid = 4096;
  double best = 0.0, best_sigma = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double sigma = static_cast<double>(i) / grid;
    const double v = lebesgue_at(sigma);
    if (v > best) {
      best = v;
      best_sigma = sigma;
    }
  }
  // Local refinement around the coarse argmax.
  double lo = std::max(0.0, best_sigma - 1.0 / grid);
  double hi = std::min(1.0, best_sigma + 1.0 / grid);
  for (int round = 0; round < 8; ++round) {
    double rbest = best, rsigma = best_sigma;
    for (int i = 0; i <= 64; ++i) {
      const double sigma = lo + (hi - lo) * i / 64.0;
      const double v = lebesgue_at(sigma);
      if (v > rbest) {
        rbest = v;
        rsigma = sigma;
      }
    }
    best = rbest;
    const double w = (hi - lo) / 64.0;
    lo = std::max(0.0, rsigma - w);
    hi = std::min(1.0, rsigma + w);
  }
  return best;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
  if (!M.allFinite()) throw InvalidParameter("expm: non-finite entries");
  return M.exp();
}

std::vector<Eigen::MatrixXd> phi_functions(const Eigen::MatrixXd& M, int p_max) {
  if (p_max < 0) throw InvalidParameter("phi_functions: p_max must be >= 0");
  const int n = static_cast<int>(M.rows());
  if (p_max == 0) return {expm(M)};

  // Augmented block matrix [[M, I, 0, ...], [0, 0, I, ...], ...]; the top
  // block row of its exponential reads [e^M, phi_1(M), ..., phi_pmax(M)].
  const int N = n * (p_max + 1);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N, N);
  W.topLeftCorner(n, n) = M;
  for (int j = 0; j < p_max; ++j)
    W.block(j * n, (j + 1) * n, n, n) = Eigen::MatrixXd::Identity(n, n);

  const Eigen::MatrixXd E = expm(W);
  std::vector<Eigen::MatrixXd> phis(p_max + 1);
  for (int j = 0; j <= p_max; ++j) phis[j] = E.block(0, j * n, n, n);
  return phis;
}

Eigen::MatrixXd exp_weighted_gram(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& C, double t) {
  const int n = static_cast<int>(A.rows());
  if (t == 0.0) return Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  W.topLeftCorner(n, n) = -A;
  W.topRightCorner(n, n) = C;
  W.bottomRightCorner(n, n) = A.transpose();
  const Eigen::MatrixXd E = expm(W * t);
  // bottom-right block is e^{A^T t}; its transpose times the top-right block
  // gives the integral.
  return E.bottomRightCorner(n, n).transpose() * E.topRightCorner(n, n);
}

std::vector<std::vector<Eigen::MatrixXd>> alpha_weights(
    const CanonicalOperators& ops, const NodeSet& nodes, double h) {
  if (h <= 0.0) throw InvalidParameter("alpha_weights: h must be > 0");
  const int K = ops.K;
  const int M = nodes.M;

  std::vector<std::vector<Eigen::MatrixXd>> alpha(
      M, std::vector<Eigen::MatrixXd>(M, Eigen::MatrixXd::Zero(K, K)));

  for (int k = 0; k < M; ++k) {
    const double tau = nodes.nodes[k];
    if (tau == 0.0) continue;  // zero-length integral
    // ell_j expanded in monomials:
    //   int_0^tau e^{(tau-sigma) h A} sigma^p dsigma
    //     = tau^{p+1} p! phi_{p+1}(tau h A).
    const auto phis = phi_functions(tau * h * ops.A, M);
    for (int j = 0; j < M; ++j) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(K, K);
      double tau_pow = tau;   // tau^{p+1}
      double factorial = 1.0; // p!
      for (int p = 0; p < M; ++p) {
        if (p > 0) {
          tau_pow *= tau;
          factorial *= p;
        }
        acc += nodes.basis(j, p) * tau_pow * factorial * phis[p + 1];
      }
      alpha[k][j] = acc;
    }
  }
  return alpha;
}

Eigen::MatrixXd noise_covariance(const CanonicalOperators& ops,
                                 const NodeSet& nodes, double h) {
  if (h <= 0.0) throw InvalidParameter("noise_covariance: h must be > 0");
  const int K = ops.K;
  const int M = nodes.M;

  std::vector<Eigen::MatrixXd> diag(M);
  for (int i = 0; i < M; ++i)
    diag[i] = 2.0 * exp_weighted_gram(ops.A, ops.D, nodes.nodes[i] * h);

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(M * K, M * K);
  for (int i = 0; i < M; ++i) {
    sigma.block(i * K, i * K, K, K) = diag[i];
    for (int j = i + 1; j < M; ++j) {
      // Both integrals share the range [0, c_i h]; the remaining time on the
      // c_j side factors out as a plain exponential.
      const Eigen::MatrixXd blk =
          diag[i] * expm((nodes.nodes[j] - nodes.nodes[i]) * h * ops.A).transpose();
      sigma.block(i * K, j * K, K, K) = blk;
      sigma.block(j * K, i * K, K, K) = blk.transpose();
    }
  }
  return sigma;
}

Eigen::MatrixXd factor_covariance(const Eigen::MatrixXd& sigma) {
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidParameter("factor_covariance: matrix is not symmetric");

  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double lam_max = std::max(0.0, ev.maxCoeff());
  if (ev.minCoeff() < -1e-8 * std::max(1.0, lam_max))
    throw NotPsdError("factor_covariance: matrix is not PSD");

  Eigen::VectorXd clipped = ev.cwiseMax(0.0);
  Eigen::MatrixXd F = es.eigenvectors() * clipped.cwiseSqrt().asDiagonal();
  // Exactly-zero diagonal entries mean the corresponding component is a.s.
  // zero (e.g. the node c_1 = 0 block); make the factor rows exactly zero.
  for (int i = 0; i < sigma.rows(); ++i)
    if (sigma(i, i) == 0.0) F.row(i).setZero();
  return F;
}

StepPlan build_plan(const CanonicalOperators& ops, int M, double h) {
  if (h <= 0.0) throw InvalidParameter("build_plan: h must be > 0");
  StepPlan plan;
  plan.ops = ops;
  plan.nodes = make_nodes(M);
  plan.h = h;
  plan.exp_at_nodes.reserve(M);
  for (int k = 0; k < M; ++k)
    plan.exp_at_nodes.push_back(expm(plan.nodes.nodes[k] * h * ops.A));
  plan.alpha = alpha_weights(ops, plan.nodes, h);
  plan.sigma_c = noise_covariance(ops, plan.nodes, h);
  plan.noise_factor = factor_covariance(plan.sigma_c);
  plan.lebesgue = lebesgue_constant(plan.nodes);
  return plan;
}

}  // namespace hola
