#include "hola/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "hola/errors.hpp"

namespace hola {

void validate_config(const SamplerConfig& config, const Potential& p,
                     double lebesgue) {
  if (config.K < 2) throw InvalidParameter("config: K must be >= 2");
  if (config.gamma <= 0.0) throw InvalidParameter("config: gamma must be > 0");
  if (config.h <= 0.0) throw InvalidParameter("config: h must be > 0");
  if (config.effective_nu() < 1) throw InvalidParameter("config: nu_star must be >= 1");
  if (config.effective_M() < 2) throw InvalidParameter("config: M must be >= 2");
  if (config.n_steps < 0) throw InvalidParameter("config: n_steps must be >= 0");
  if (config.burn_in < 0) throw InvalidParameter("config: burn_in must be >= 0");
  if (config.thin < 1) throw InvalidParameter("config: thin must be >= 1");
  if (config.chains < 1) throw InvalidParameter("config: chains must be >= 1");
  if (config.x0.size() != 0 && config.x0.size() != p.dim)
    throw InvalidParameter("config: x0 dimension mismatch");

  if (p.L > 0.0) {
    const double rho = 2.0 * p.L * config.h * lebesgue;
    if (rho >= 0.5) {
      if (config.strict)
        throw InvalidParameter(
            "contraction guard: 2*L*h*Gamma_phi = " + std::to_string(rho) +
            " >= 1/2; reduce h");
      std::cerr << "warning: contraction guard 2*L*h*Gamma_phi = " << rho
                << " >= 1/2; Picard iteration may not contract\n";
    }
  }
}

std::vector<Eigen::MatrixXd> sample_node_noise(const StepPlan& plan, int d,
                                               CounterRng& rng) {
  const int K = plan.ops.K;
  const int M = plan.nodes.M;
  Eigen::MatrixXd z(M * K, d);
  for (int i = 0; i < M * K; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = rng.next_normal();
  const Eigen::MatrixXd w = plan.noise_factor * z;
  std::vector<Eigen::MatrixXd> blocks(M);
  for (int k = 0; k < M; ++k) blocks[k] = w.middleRows(k * K, K);
  return blocks;
}

void picard_step(const StepPlan& plan, const Potential& p, ChainState& state,
                 const std::vector<Eigen::MatrixXd>& noise, int nu_star,
                 PicardTrace* trace) {
  const int K = plan.ops.K;
  const int M = plan.nodes.M;
  const int d = static_cast<int>(state.x.cols());
  const double h = plan.h;

  std::vector<Eigen::MatrixXd> cur(M, state.x);
  std::vector<Eigen::MatrixXd> nxt(M, Eigen::MatrixXd(K, d));
  std::vector<Eigen::VectorXd> grads(M);

  for (int nu = 0; nu < nu_star; ++nu) {
    // g at node j depends only on the previous sweep's node-j iterate.
    for (int j = 0; j < M; ++j) {
      grads[j] = p.grad(cur[j].row(0).transpose());
      ++state.grad_evals;
    }
    for (int k = 0; k < M; ++k) {
      nxt[k] = plan.exp_at_nodes[k] * state.x + noise[k];
      // g(X) has -grad U in block row 1 only, so alpha * g collapses to an
      // outer product with column 1 of the weight matrix.
      for (int j = 0; j < M; ++j)
        nxt[k].noalias() -= h * plan.alpha[k][j].col(1) * grads[j].transpose();
    }
    if (trace) {
      double delta = 0.0;
      for (int k = 0; k < M; ++k)
        delta = std::max(delta, (nxt[k] - cur[k]).norm());
      trace->sweep_deltas.push_back(delta);
    }
    cur.swap(nxt);
  }

  state.x = cur[M - 1];
  ++state.step_index;
  if (!state.x.allFinite())
    throw DivergenceError(state.step_index, M - 1,
                          "divergence: non-finite state after step " +
                              std::to_string(state.step_index));
}

RunResult run_chain(const SamplerConfig& config, const Potential& p,
                    int chain_index, bool keep_full_state) {
  const auto ops = build_canonical(config.K, config.gamma);
  const auto plan = build_plan(ops, config.effective_M(), config.h);
  validate_config(config, p, plan.lebesgue);

  const int d = p.dim;
  const int nu = config.effective_nu();

  ChainState state;
  state.x = Eigen::MatrixXd::Zero(config.K, d);
  if (config.x0.size() != 0) state.x.row(0) = config.x0.transpose();

  const long kept =
      config.n_steps > config.burn_in
          ? (config.n_steps - config.burn_in + config.thin - 1) / config.thin
          : 0;

  RunResult result;
  result.samples.resize(kept, d);
  if (keep_full_state) result.full_states.resize(kept, config.K * d);

  const auto t0 = std::chrono::steady_clock::now();
  long row = 0;
  try {
    for (long n = 0; n < config.n_steps; ++n) {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(chain_index),
                     static_cast<std::uint64_t>(n));
      const auto noise = sample_node_noise(plan, d, rng);
      picard_step(plan, p, state, noise, nu);
      if (n >= config.burn_in && (n - config.burn_in) % config.thin == 0) {
        result.samples.row(row) = state.x.row(0);
        if (keep_full_state)
          result.full_states.row(row) =
              state.x.reshaped<Eigen::RowMajor>().transpose();
        ++row;
      }
    }
  } catch (const DivergenceError& e) {
    result.report.diverged = true;
    result.report.divergence_step = e.step;
    result.report.error = e.what();
    result.samples.conservativeResize(row, d);
    if (keep_full_state) result.full_states.conservativeResize(row, config.K * d);
  }
  const auto t1 = std::chrono::steady_clock::now();

  result.report.n_steps = state.step_index;
  result.report.grad_evals = state.grad_evals;
  result.report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

int max_chain_threads() {
  if (const char* env = std::getenv("HOLA_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

EnsembleResult pool_chains(int n_chains, int dim,
                           const std::function<RunResult(int)>& run_one) {
  std::vector<RunResult> per_chain(n_chains);

  const int workers = std::min(n_chains, max_chain_threads());
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_chains) break;
      per_chain[c] = run_one(c);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EnsembleResult out;
  long total = 0;
  long state_cols = 0;
  for (const auto& r : per_chain) {
    total += r.samples.rows();
    state_cols = std::max<long>(state_cols, r.full_states.cols());
  }
  out.samples.resize(total, dim);
  if (state_cols > 0) out.full_states.resize(total, state_cols);
  long row = 0;
  for (int c = 0; c < n_chains; ++c) {
    out.chain_offsets.push_back(row);
    out.samples.middleRows(row, per_chain[c].samples.rows()) =
        per_chain[c].samples;
    if (state_cols > 0 && per_chain[c].full_states.rows() > 0)
      out.full_states.middleRows(row, per_chain[c].full_states.rows()) =
          per_chain[c].full_states;
    row += per_chain[c].samples.rows();
    out.reports.push_back(per_chain[c].report);
    out.any_diverged = out.any_diverged || per_chain[c].report.diverged;
  }
  return out;
}

EnsembleResult run_ensemble(const SamplerConfig& config, const Potential& p,
                            bool keep_full_state) {
  return pool_chains(config.chains, p.dim, [&](int c) {
    return run_chain(config, p, c, keep_full_state);
  });
}

}  // namespace hola
