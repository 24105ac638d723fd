#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hola/canonical.hpp"
#include "hola/potential.hpp"
#include "hola/rng.hpp"
#include "hola/sampler.hpp"

namespace hola {

// Unadjusted Langevin: x' = x - h grad U(x) + sqrt(2h) xi. One gradient
// evaluation per call.
Eigen::VectorXd ula_step(const Potential& p, const Eigen::VectorXd& x, double h,
                         CounterRng& rng);

// ULA chain with the same retention and seeding conventions as run_chain.
// Reuses SamplerConfig for h / n_steps / burn_in / thin / seed / x0.
RunResult run_ula_chain(const SamplerConfig& config, const Potential& p,
                        int chain_index = 0);

// Underdamped exponential-Euler is the K = 2 instantiation of the collocation
// step; this is literally picard_step on a K = 2 plan.
void underdamped_step(const StepPlan& plan, const Potential& p,
                      ChainState& state,
                      const std::vector<Eigen::MatrixXd>& noise, int nu_star);

// Exact one-step law of the linear dynamics for a diagonal quadratic target:
// per coordinate i, mean operator e^{h B(lambda_i)} with
// B(lambda) = -(D+Q) diag(lambda, 1, ..., 1), and one-step covariance
// 2 int_0^h e^{uB} D e^{uB^T} du with its PSD factor.
struct LinearSdeStep {
  Eigen::VectorXd lambda;
  double h = 0.0;
  int K = 0;
  std::vector<Eigen::MatrixXd> mean_op;
  std::vector<Eigen::MatrixXd> cov;
  std::vector<Eigen::MatrixXd> cov_factor;
};

LinearSdeStep build_linear_sde(const Eigen::VectorXd& lambda,
                               const CanonicalOperators& ops, double h);

// Exact-in-distribution simulation of the dynamics for the diagonal Gaussian
// target; returns retained X1 samples. Stationary law: X1 ~ N(0, diag(1/
// lambda)), auxiliary blocks ~ N(0, I).
RunResult run_exact_gaussian_chain(const SamplerConfig& config,
                                   const Eigen::VectorXd& lambda,
                                   int chain_index = 0);

enum class SamplerKind { Hola, Ula, Underdamped, ExactGaussian };

SamplerKind sampler_kind_from_name(const std::string& name);
std::string to_string(SamplerKind kind);

// Uniform entry point over all samplers. lambda is only consulted by
// ExactGaussian (and must then match p.dim); Underdamped forces K = 2, M = 2.
EnsembleResult run_sampler_ensemble(SamplerKind kind, SamplerConfig config,
                                    const Potential& p,
                                    const Eigen::VectorXd& lambda = {});

}  // namespace hola
