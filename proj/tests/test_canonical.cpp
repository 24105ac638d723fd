#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "hola/canonical.hpp"
#include "hola/errors.hpp"
#include "hola/rng.hpp"
#include "oracles.hpp"

namespace {

Eigen::MatrixXd random_matrix(int n, std::uint64_t seed, double norm_cap) {
  hola::CounterRng rng(seed, 0, 0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.next_normal();
  const double nrm = M.norm();
  if (nrm > norm_cap) M *= norm_cap / nrm;
  return M;
}

double op_norm(const Eigen::MatrixXd& M) {
  return M.jacobiSvd().singularValues()[0];
}

}  // namespace

TEST_CASE("build_canonical: K=2, gamma=1 hand-checked matrices") {
  const auto ops = hola::build_canonical(2, 1.0);
  Eigen::MatrixXd D(2, 2), Q(2, 2), A(2, 2);
  D << 0, 0, 0, 1;
  Q << 0, -1, 1, 0;
  A << 0, 1, 0, -1;
  CHECK((ops.D - D).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ops.Q - Q).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ops.A - A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_canonical: K=3, gamma=2 skew backbone") {
  const auto ops = hola::build_canonical(3, 2.0);
  Eigen::MatrixXd Q(3, 3);
  Q << 0, -1, 0, 1, 0, -2, 0, 2, 0;
  CHECK((ops.Q - Q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_canonical: skew-symmetry and parameter validation") {
  for (int K = 2; K <= 8; ++K)
    for (double gamma : {0.5, 1.0, 2.0, 5.0}) {
      const auto ops = hola::build_canonical(K, gamma);
      CHECK((ops.Q + ops.Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  CHECK_THROWS_AS(hola::build_canonical(1, 1.0), hola::InvalidParameter);
  CHECK_THROWS_AS(hola::build_canonical(3, 0.0), hola::InvalidParameter);
  CHECK_THROWS_AS(hola::build_canonical(3, -1.0), hola::InvalidParameter);
}

TEST_CASE("operator norm of D+Q within the lemma bounds") {
  for (int K = 2; K <= 6; ++K)
    for (double gamma : {0.5, 1.0, 2.0, 5.0}) {
      const auto ops = hola::build_canonical(K, gamma);
      const double nrm = op_norm(ops.D + ops.Q);
      CHECK(nrm >= std::sqrt(1.0 + gamma * gamma) - 1e-12);
      CHECK(nrm <= std::max(1.0 + 2.0 * gamma, 3.0 * gamma) + 1e-12);
    }
}

TEST_CASE("nodes: equispaced, cardinal, partition of unity") {
  for (int M = 2; M <= 8; ++M) {
    // The monomial expansion loses about a digit at M = 7, 8 (why M > 8 is
    // rejected outright); full 1e-12 accuracy holds through M = 6.
    const double tol = M <= 6 ? 1e-12 : 1e-11;
    const auto ns = hola::make_nodes(M);
    CHECK(ns.nodes[0] == 0.0);
    CHECK(ns.nodes[M - 1] == 1.0);
    for (int j = 0; j < M; ++j) {
      CHECK(ns.nodes[j] ==
            doctest::Approx(static_cast<double>(j) / (M - 1)).epsilon(1e-15));
      for (int k = 0; k < M; ++k)
        CHECK(std::abs(ns.basis_at(j, ns.nodes[k]) - (j == k ? 1.0 : 0.0)) <=
              tol);
    }
    for (int i = 0; i <= 100; ++i) {
      const double sigma = i / 100.0;
      double sum = 0.0;
      for (int j = 0; j < M; ++j) sum += ns.basis_at(j, sigma);
      CHECK(std::abs(sum - 1.0) <= tol);
    }
  }
  CHECK_THROWS_AS(hola::make_nodes(1), hola::InvalidParameter);
  CHECK_THROWS_AS(hola::make_nodes(9), hola::InvalidParameter);
}

TEST_CASE("expm: identity, closed form, Taylor oracle, validation") {
  CHECK((hola::expm(Eigen::MatrixXd::Zero(3, 3)) -
         Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // K=2 A_can is upper triangular with closed-form exponential.
  for (double gamma : {0.5, 1.0, 2.0})
    for (double t : {0.1, 1.0, 3.0}) {
      const auto ops = hola::build_canonical(2, gamma);
      const Eigen::MatrixXd E = hola::expm(t * ops.A);
      CHECK(E(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(E(1, 0) == doctest::Approx(0.0).epsilon(1e-13));
      CHECK(E(0, 1) ==
            doctest::Approx((1.0 - std::exp(-gamma * t)) / gamma).epsilon(1e-12));
      CHECK(E(1, 1) == doctest::Approx(std::exp(-gamma * t)).epsilon(1e-12));
    }

  for (std::uint64_t seed : {41, 42, 43}) {
    const Eigen::MatrixXd M = random_matrix(4, seed, 1.0);
    CHECK((hola::expm(M) - oracles::taylor_expm(M)).norm() <= 1e-12);
  }

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(hola::expm(bad), hola::InvalidParameter);
}

TEST_CASE("expm self-consistency: exp(X/2)^2 = exp(X)") {
  for (int K : {2, 3, 4, 6})
    for (double gamma : {0.5, 2.0}) {
      const auto ops = hola::build_canonical(K, gamma);
      const Eigen::MatrixXd X = 0.7 * ops.A;
      const Eigen::MatrixXd half = hola::expm(0.5 * X);
      CHECK((half * half - hola::expm(X)).norm() <= 1e-11);
    }
}

TEST_CASE("phi_functions: zero matrix and scalar closed forms") {
  const auto phis = hola::phi_functions(Eigen::MatrixXd::Zero(2, 2), 2);
  CHECK((phis[1] - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-14);
  CHECK((phis[2] - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-14);

  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const auto sphis = hola::phi_functions(one, 1);
  CHECK(sphis[0](0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(sphis[1](0, 0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));

  CHECK_THROWS_AS(hola::phi_functions(one, -1), hola::InvalidParameter);
}

TEST_CASE("phi_functions vs Gauss-Legendre quadrature on random 3x3") {
  for (std::uint64_t seed : {51, 52}) {
    const Eigen::MatrixXd M = random_matrix(3, seed, 1.5);
    const auto phis = hola::phi_functions(M, 4);
    for (int k = 1; k <= 4; ++k)
      CHECK((phis[k] - oracles::phi_quadrature(M, k)).cwiseAbs().maxCoeff() <=
            1e-10);
  }
}

TEST_CASE("alpha_weights: trivial cases") {
  // A = 0 with two nodes {0,1}: alpha_1(1,h) = alpha_2(1,h) = I/2.
  auto ops = hola::build_canonical(2, 1.0);
  ops.A.setZero();
  const auto ns = hola::make_nodes(2);
  const auto alpha = hola::alpha_weights(ops, ns, 0.3);
  CHECK((alpha[1][0] - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-14);
  CHECK((alpha[1][1] - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-14);
  // Node c_1 = 0: zero-length integral for every j.
  CHECK(alpha[0][0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(alpha[0][1].cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(hola::alpha_weights(ops, ns, 0.0), hola::InvalidParameter);
}

TEST_CASE("alpha_weights vs quadrature: K=3, gamma=2, h=0.05, M=2") {
  const auto ops = hola::build_canonical(3, 2.0);
  const auto ns = hola::make_nodes(2);
  const auto alpha = hola::alpha_weights(ops, ns, 0.05);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) {
      const Eigen::MatrixXd ref =
          oracles::alpha_quadrature(ops.A, ns, j, ns.nodes[k], 0.05);
      CHECK((alpha[k][j] - ref).cwiseAbs().maxCoeff() <= 1e-11);
    }
}

TEST_CASE("alpha_weights vs quadrature across K, gamma, h") {
  for (int K : {3, 4, 5})
    for (double gamma : {1.0, 2.0})
      for (double h : {0.01, 0.1}) {
        const auto ops = hola::build_canonical(K, gamma);
        const auto ns = hola::make_nodes(K - 1);
        const auto alpha = hola::alpha_weights(ops, ns, h);
        for (int k = 0; k < ns.M; ++k)
          for (int j = 0; j < ns.M; ++j) {
            const Eigen::MatrixXd ref =
                oracles::alpha_quadrature(ops.A, ns, j, ns.nodes[k], h);
            CHECK((alpha[k][j] - ref).cwiseAbs().maxCoeff() <= 1e-9);
          }
      }
}

TEST_CASE("noise_covariance: structure and trivial cases") {
  const auto ops = hola::build_canonical(3, 2.0);
  const auto ns = hola::make_nodes(2);
  const Eigen::MatrixXd sigma = hola::noise_covariance(ops, ns, 0.05);

  CHECK(sigma.rows() == 6);
  // Node c_1 = 0 block is exactly zero.
  CHECK(sigma.topLeftCorner(3, 3).cwiseAbs().maxCoeff() == 0.0);
  // Symmetric.
  CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  // PSD before clipping.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  CHECK(es.eigenvalues().minCoeff() >=
        -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));

  // Zero diffusion: forcing D = 0 kills the whole covariance.
  auto free_ops = ops;
  free_ops.D.setZero();
  CHECK(hola::noise_covariance(free_ops, ns, 0.05).cwiseAbs().maxCoeff() <=
        1e-15);
}

TEST_CASE("noise_covariance vs composite quadrature: K=2, gamma=1, h=0.1") {
  const auto ops = hola::build_canonical(2, 1.0);
  const auto ns = hola::make_nodes(2);
  const Eigen::MatrixXd sigma = hola::noise_covariance(ops, ns, 0.1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Eigen::MatrixXd ref = oracles::sigma_block_quadrature(
          ops.A, ops.D, ns.nodes[i], ns.nodes[j], 0.1, 64, 4);
      CHECK((sigma.block(i * 2, j * 2, 2, 2) - ref).cwiseAbs().maxCoeff() <=
            1e-9);
    }
}

TEST_CASE("noise_covariance vs quadrature across K, gamma, h") {
  for (int K : {3, 4, 5})
    for (double gamma : {1.0, 2.0})
      for (double h : {0.01, 0.1}) {
        const auto ops = hola::build_canonical(K, gamma);
        const auto ns = hola::make_nodes(K - 1);
        const Eigen::MatrixXd sigma = hola::noise_covariance(ops, ns, h);
        for (int i = 0; i < ns.M; ++i)
          for (int j = 0; j < ns.M; ++j) {
            const Eigen::MatrixXd ref = oracles::sigma_block_quadrature(
                ops.A, ops.D, ns.nodes[i], ns.nodes[j], h, 64, 4);
            CHECK((sigma.block(i * K, j * K, K, K) - ref).cwiseAbs().maxCoeff() <=
                  1e-9);
          }
      }
}

TEST_CASE("factor_covariance: reconstruction, kernels, failure modes") {
  const Eigen::MatrixXd I4 = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd FI = hola::factor_covariance(I4);
  CHECK((FI * FI.transpose() - I4).cwiseAbs().maxCoeff() <= 1e-12);

  // Zero leading block: factorization succeeds with exactly-zero rows.
  const auto ops = hola::build_canonical(3, 2.0);
  const auto ns = hola::make_nodes(2);
  const Eigen::MatrixXd sigma = hola::noise_covariance(ops, ns, 0.05);
  const Eigen::MatrixXd F = hola::factor_covariance(sigma);
  CHECK(F.topRows(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK((F * F.transpose() - sigma).norm() <=
        1e-9 * std::max(1.0, sigma.norm()));

  Eigen::MatrixXd indef = Eigen::MatrixXd::Identity(2, 2);
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(hola::factor_covariance(indef), hola::NotPsdError);

  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(hola::factor_covariance(asym), hola::InvalidParameter);
}

TEST_CASE("lebesgue_constant: closed-form values and lemma bound") {
  CHECK(hola::lebesgue_constant(hola::make_nodes(2)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(hola::lebesgue_constant(hola::make_nodes(3)) ==
        doctest::Approx(1.25).epsilon(1e-6));
  for (int M = 2; M <= 6; ++M) {
    double bound = std::pow(2.0, M - 1) * std::pow(M - 1.0, M - 1);
    for (int i = 2; i <= M - 1; ++i) bound /= i;
    CHECK(hola::lebesgue_constant(hola::make_nodes(M)) <= bound + 1e-9);
  }
}

TEST_CASE("build_plan: node-0 identity, default nodes, determinism") {
  const auto ops = hola::build_canonical(3, 2.0);
  const auto plan = hola::build_plan(ops, 2, 0.05);
  CHECK((plan.exp_at_nodes[0] - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(plan.nodes.M == 2);
  CHECK(plan.nodes.nodes[0] == 0.0);
  CHECK(plan.nodes.nodes[1] == 1.0);

  const auto plan2 = hola::build_plan(ops, 2, 0.05);
  CHECK((plan.sigma_c - plan2.sigma_c).cwiseAbs().maxCoeff() == 0.0);
  CHECK((plan.noise_factor - plan2.noise_factor).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < 2; ++k) {
    CHECK((plan.exp_at_nodes[k] - plan2.exp_at_nodes[k]).cwiseAbs().maxCoeff() ==
          0.0);
    for (int j = 0; j < 2; ++j)
      CHECK((plan.alpha[k][j] - plan2.alpha[k][j]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("build_plan: halved h is self-consistent") {
  const auto ops = hola::build_canonical(4, 2.0);
  const auto plan = hola::build_plan(ops, 3, 0.1);
  const auto half = hola::build_plan(ops, 3, 0.05);
  for (int k = 0; k < 3; ++k)
    CHECK((half.exp_at_nodes[k] * half.exp_at_nodes[k] - plan.exp_at_nodes[k])
              .norm() <= 1e-11);
}

TEST_CASE("Kronecker consistency of the canonical fast path") {
  for (int K : {2, 3, 4})
    for (int d : {1, 2, 3}) {
      const auto ops = hola::build_canonical(K, 2.0);
      const Eigen::MatrixXd E = hola::expm(0.3 * ops.A);
      const Eigen::MatrixXd E_dense =
          oracles::taylor_expm(0.3 * oracles::kron(
                                         ops.A, Eigen::MatrixXd::Identity(d, d)));
      const Eigen::MatrixXd x = random_matrix(std::max(K, d), 61, 2.0)
                                    .topLeftCorner(K, d);
      const Eigen::VectorXd via_dense = E_dense * oracles::flatten(x);
      const Eigen::MatrixXd via_blocks = E * x;
      CHECK((oracles::flatten(via_blocks) - via_dense).cwiseAbs().maxCoeff() <=
            1e-12);
    }
}
