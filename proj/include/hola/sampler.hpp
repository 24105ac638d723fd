#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hola/canonical.hpp"
#include "hola/potential.hpp"
#include "hola/rng.hpp"

namespace hola {

// K x d state matrix; row 0 is the position block X1, rows 1..K-1 the
// auxiliary blocks.
struct ChainState {
  Eigen::MatrixXd x;
  long step_index = 0;
  long grad_evals = 0;
};

struct SamplerConfig {
  int K = 3;
  double gamma = 2.0;
  double h = 0.0;
  int M = 0;        // 0 -> default max(K - 1, 2)
  int nu_star = 0;  // 0 -> default K - 1
  long n_steps = 0;
  long burn_in = 0;
  long thin = 1;
  std::uint64_t seed = 0;
  int chains = 1;
  Eigen::VectorXd x0;  // empty -> zeros
  bool strict = false;

  int effective_M() const { return M > 0 ? M : std::max(K - 1, 2); }
  int effective_nu() const { return nu_star > 0 ? nu_star : K - 1; }
};

// Validates ranges and, when the potential's L is known, evaluates the
// contraction guard 2 L h Gamma_phi < 1/2 (warning, or error under strict).
void validate_config(const SamplerConfig& config, const Potential& p,
                     double lebesgue);

// One draw of the joint node-noise (W(c_1),...,W(c_M)), each block K x d.
// Realizes N(0, Sigma_C (x) I_d): correlated across nodes and state blocks,
// independent across coordinate columns.
std::vector<Eigen::MatrixXd> sample_node_noise(const StepPlan& plan, int d,
                                               CounterRng& rng);

// Per-sweep sup deltas max_k ||X^{[nu+1]}(c_k) - X^{[nu]}(c_k)||_F, recorded
// when a trace is handed to picard_step.
struct PicardTrace {
  std::vector<double> sweep_deltas;
};

// One outer step of Algorithm-style Picard collocation: exactly nu_star
// applications of the fixed-point update starting from the constant
// initialization; the node-M iterate becomes the new state. The gradient at
// node j is evaluated once per (sweep, node), so grad_evals grows by exactly
// nu_star * M.
void picard_step(const StepPlan& plan, const Potential& p, ChainState& state,
                 const std::vector<Eigen::MatrixXd>& noise, int nu_star,
                 PicardTrace* trace = nullptr);

struct RunReport {
  long n_steps = 0;
  long grad_evals = 0;
  double wall_seconds = 0.0;
  bool diverged = false;
  long divergence_step = -1;
  std::string error;
};

struct RunResult {
  Eigen::MatrixXd samples;  // retained X1 rows, one per row
  Eigen::MatrixXd full_states;  // optional: K*d columns per retained sample
  RunReport report;
};

RunResult run_chain(const SamplerConfig& config, const Potential& p,
                    int chain_index = 0, bool keep_full_state = false);

struct EnsembleResult {
  Eigen::MatrixXd samples;  // pooled, per-chain order preserved
  Eigen::MatrixXd full_states;
  std::vector<RunReport> reports;
  std::vector<long> chain_offsets;  // row offset of each chain in samples
  bool any_diverged = false;
};

EnsembleResult run_ensemble(const SamplerConfig& config, const Potential& p,
                            bool keep_full_state = false);

// Runs run_one(chain_index) for each chain (possibly across threads) and
// pools the results in chain order.
EnsembleResult pool_chains(int n_chains, int dim,
                           const std::function<RunResult(int)>& run_one);

// Chain-parallelism cap: HOLA_THREADS env var, else hardware concurrency.
int max_chain_threads();

}  // namespace hola
