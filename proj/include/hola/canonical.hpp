#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hola {

// K x K backbone matrices of the order-K dynamics. All Kd-dimensional
// operators are Kronecker products backbone x I_d, so production code only
// ever works with these small blocks, applied column-wise to K x d states.
struct CanonicalOperators {
  int K = 0;
  double gamma = 0.0;
  Eigen::MatrixXd D;  // diag(0,...,0,gamma)
  Eigen::MatrixXd Q;  // skew-symmetric tridiagonal, couplings (1, gamma,...)
  Eigen::MatrixXd A;  // -(D+Q) * diag(0,1,...,1)
};

CanonicalOperators build_canonical(int K, double gamma);

// Equispaced collocation nodes c_1 = 0 < ... < c_M = 1 together with the
// Lagrange basis in monomial form: basis(j, p) is the sigma^p coefficient
// of ell_j.
struct NodeSet {
  int M = 0;
  Eigen::VectorXd nodes;
  Eigen::MatrixXd basis;

  // Evaluates ell_j at sigma.
  double basis_at(int j, double sigma) const;
};

// M in [2, 8]; equispaced monomial-basis Lagrange degrades beyond that.
NodeSet make_nodes(int M);

// sup over [0,1] of sum_j |ell_j|, by dense grid plus local refinement.
double lebesgue_constant(const NodeSet& nodes);

// Matrix exponential (scaling-and-squaring, degree-13 Pade).
Eigen::MatrixXd expm(const Eigen::MatrixXd& M);

// phi_0(M) = e^M and phi_k(M) = int_0^1 e^{(1-theta)M} theta^{k-1}/(k-1)! dtheta,
// evaluated exactly (up to expm accuracy) through one exponential of the
// Van Loan augmented block matrix.
std::vector<Eigen::MatrixXd> phi_functions(const Eigen::MatrixXd& M, int p_max);

// int_0^t e^{uA} C e^{uA^T} du via the Van Loan augmented exponential.
Eigen::MatrixXd exp_weighted_gram(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& C, double t);

// alpha_j(c_k, h) = int_0^{c_k} e^{(c_k - sigma) h A} ell_j(sigma) dsigma,
// returned as result[k][j], each a K x K matrix.
std::vector<std::vector<Eigen::MatrixXd>> alpha_weights(
    const CanonicalOperators& ops, const NodeSet& nodes, double h);

// Joint covariance of the node-noise vector (W(c_1),...,W(c_M)) per scalar
// coordinate: block (i,j) = 2 int_0^{min(c_i,c_j) h} e^{(c_i h - s)A} D
// e^{(c_j h - s)A^T} ds. Size (M K) x (M K).
Eigen::MatrixXd noise_covariance(const CanonicalOperators& ops,
                                 const NodeSet& nodes, double h);

// Factor F with F F^T = sigma, by symmetric eigendecomposition with
// negative-eigenvalue clipping; rows belonging to exactly-zero diagonal
// entries come out exactly zero. Throws NotPsdError when an eigenvalue is
// below -1e-8 * lambda_max.
Eigen::MatrixXd factor_covariance(const Eigen::MatrixXd& sigma);

// Everything Algorithm-level stepping needs, precomputed once per (K, gamma,
// M, h) and immutable afterwards.
struct StepPlan {
  CanonicalOperators ops;
  NodeSet nodes;
  double h = 0.0;
  std::vector<Eigen::MatrixXd> exp_at_nodes;           // e^{c_k h A}
  std::vector<std::vector<Eigen::MatrixXd>> alpha;     // [k][j]
  Eigen::MatrixXd sigma_c;                             // (MK) x (MK)
  Eigen::MatrixXd noise_factor;                        // F F^T = sigma_c
  double lebesgue = 0.0;
};

StepPlan build_plan(const CanonicalOperators& ops, int M, double h);

}  // namespace hola
