#include "hola/baselines.hpp"

#include <chrono>
#include <cmath>

#include "hola/errors.hpp"

namespace hola {

Eigen::VectorXd ula_step(const Potential& p, const Eigen::VectorXd& x, double h,
                         CounterRng& rng) {
  if (h <= 0.0) throw InvalidParameter("ula_step: h must be > 0");
  Eigen::VectorXd xi(x.size());
  for (int i = 0; i < x.size(); ++i) xi[i] = rng.next_normal();
  Eigen::VectorXd next = x - h * p.grad(x) + std::sqrt(2.0 * h) * xi;
  if (!next.allFinite())
    throw DivergenceError(-1, -1, "ula_step: non-finite state");
  return next;
}

RunResult run_ula_chain(const SamplerConfig& config, const Potential& p,
                        int chain_index) {
  const int d = p.dim;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  if (config.x0.size() != 0) x = config.x0;

  const long kept =
      config.n_steps > config.burn_in
          ? (config.n_steps - config.burn_in + config.thin - 1) / config.thin
          : 0;
  RunResult result;
  result.samples.resize(kept, d);

  const auto t0 = std::chrono::steady_clock::now();
  long row = 0;
  long grad_evals = 0;
  try {
    for (long n = 0; n < config.n_steps; ++n) {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(chain_index),
                     static_cast<std::uint64_t>(n));
      x = ula_step(p, x, config.h, rng);
      ++grad_evals;
      if (n >= config.burn_in && (n - config.burn_in) % config.thin == 0)
        result.samples.row(row++) = x.transpose();
    }
  } catch (const DivergenceError&) {
    result.report.diverged = true;
    result.report.divergence_step = grad_evals;
    result.samples.conservativeResize(row, d);
  }
  const auto t1 = std::chrono::steady_clock::now();
  result.report.n_steps = grad_evals;
  result.report.grad_evals = grad_evals;
  result.report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

void underdamped_step(const StepPlan& plan, const Potential& p,
                      ChainState& state,
                      const std::vector<Eigen::MatrixXd>& noise, int nu_star) {
  if (plan.ops.K != 2)
    throw InvalidParameter("underdamped_step: plan must have K = 2");
  picard_step(plan, p, state, noise, nu_star);
}

LinearSdeStep build_linear_sde(const Eigen::VectorXd& lambda,
                               const CanonicalOperators& ops, double h) {
  if ((lambda.array() <= 0.0).any())
    throw InvalidParameter("build_linear_sde: lambda must be positive");
  if (h <= 0.0) throw InvalidParameter("build_linear_sde: h must be > 0");

  const int K = ops.K;
  LinearSdeStep step;
  step.lambda = lambda;
  step.h = h;
  step.K = K;
  for (int i = 0; i < lambda.size(); ++i) {
    Eigen::MatrixXd scale = Eigen::MatrixXd::Identity(K, K);
    scale(0, 0) = lambda[i];
    const Eigen::MatrixXd B = -(ops.D + ops.Q) * scale;
    step.mean_op.push_back(expm(h * B));
    Eigen::MatrixXd cov = 2.0 * exp_weighted_gram(B, ops.D, h);
    cov = 0.5 * (cov + cov.transpose());
    step.cov.push_back(cov);
    step.cov_factor.push_back(factor_covariance(cov));
  }
  return step;
}

RunResult run_exact_gaussian_chain(const SamplerConfig& config,
                                   const Eigen::VectorXd& lambda,
                                   int chain_index) {
  const auto ops = build_canonical(config.K, config.gamma);
  const auto step = build_linear_sde(lambda, ops, config.h);
  const int d = static_cast<int>(lambda.size());
  const int K = config.K;

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(K, d);
  if (config.x0.size() != 0) x.row(0) = config.x0.transpose();

  const long kept =
      config.n_steps > config.burn_in
          ? (config.n_steps - config.burn_in + config.thin - 1) / config.thin
          : 0;
  RunResult result;
  result.samples.resize(kept, d);

  const auto t0 = std::chrono::steady_clock::now();
  long row = 0;
  Eigen::VectorXd z(K);
  for (long n = 0; n < config.n_steps; ++n) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(chain_index),
                   static_cast<std::uint64_t>(n));
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < K; ++k) z[k] = rng.next_normal();
      x.col(i) = step.mean_op[i] * x.col(i) + step.cov_factor[i] * z;
    }
    if (n >= config.burn_in && (n - config.burn_in) % config.thin == 0)
      result.samples.row(row++) = x.row(0);
  }
  const auto t1 = std::chrono::steady_clock::now();
  result.report.n_steps = config.n_steps;
  result.report.grad_evals = 0;
  result.report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

SamplerKind sampler_kind_from_name(const std::string& name) {
  if (name == "hola") return SamplerKind::Hola;
  if (name == "ula") return SamplerKind::Ula;
  if (name == "underdamped") return SamplerKind::Underdamped;
  if (name == "exact-gaussian") return SamplerKind::ExactGaussian;
  throw InvalidParameter("unknown sampler: " + name);
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Hola: return "hola";
    case SamplerKind::Ula: return "ula";
    case SamplerKind::Underdamped: return "underdamped";
    case SamplerKind::ExactGaussian: return "exact-gaussian";
  }
  return "?";
}

EnsembleResult run_sampler_ensemble(SamplerKind kind, SamplerConfig config,
                                    const Potential& p,
                                    const Eigen::VectorXd& lambda) {
  switch (kind) {
    case SamplerKind::Hola:
      return run_ensemble(config, p);
    case SamplerKind::Underdamped:
      config.K = 2;
      config.M = 2;
      return run_ensemble(config, p);
    case SamplerKind::Ula:
      return pool_chains(config.chains, p.dim, [&](int c) {
        return run_ula_chain(config, p, c);
      });
    case SamplerKind::ExactGaussian:
      if (lambda.size() != p.dim)
        throw InvalidParameter(
            "exact-gaussian sampler needs a diagonal quadratic target");
      return pool_chains(config.chains, p.dim, [&](int c) {
        return run_exact_gaussian_chain(config, lambda, c);
      });
  }
  throw InvalidParameter("unknown sampler kind");
}

}  // namespace hola
