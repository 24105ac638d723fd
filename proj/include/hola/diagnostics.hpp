#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hola/baselines.hpp"
#include "hola/canonical.hpp"
#include "hola/potential.hpp"
#include "hola/sampler.hpp"

namespace hola {

struct MomentReport {
  long n_samples = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;             // symmetrized
  double second_moment_x1 = 0.0;   // E ||X1||^2
  std::optional<double> grad_second_moment;  // E ||grad U(X1)||^2
};

MomentReport compute_moments(const Eigen::MatrixXd& samples,
                             const Potential* p = nullptr);

// Bures-Wasserstein distance between N(mean1, cov1) and N(mean2, cov2).
double gaussian_w2(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mean2, const Eigen::MatrixXd& cov2);

// Symmetric PSD square root with eigenvalue clipping at zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sym);

struct MomentCheckReport {
  bool pass = false;
  long n_samples = 0;
  double second_moment = 0.0;       // E ||X1 - x*||^2
  double second_bound = 0.0;        // d/m
  double second_threshold = 0.0;    // 1.1 * bound + 3 se
  double grad_moment = 0.0;         // E ||grad U(X1)||^2
  double grad_bound = 0.0;          // L^2 d / m
  double grad_threshold = 0.0;
};

// Verifies the stationary second-moment and gradient-moment inequalities with
// 1.1x slack plus 3 block-bootstrap standard errors. Needs >= 1e4 samples.
MomentCheckReport stationary_moment_check(const Eigen::MatrixXd& samples,
                                          const Potential& p);

struct OrderSweepResult {
  std::vector<double> h_values;
  std::vector<double> errors;  // W2 against the closed-form Gaussian target
  double fitted_slope = 0.0;
  double slope_ci_lo = 0.0;
  double slope_ci_hi = 0.0;
  std::vector<bool> diverged;
  bool all_ok = true;
  std::vector<long> grad_evals;  // total per h, over all chains
};

// Runs the given sampler over decreasing step sizes at fixed total simulated
// time per chain and measures the moment-based W2 error against
// N(0, diag(1/lambda)). Slope is a log-log least-squares fit; the CI comes
// from 200 bootstrap resamples over chains.
OrderSweepResult order_sweep(SamplerKind kind, const Eigen::VectorXd& lambda,
                             SamplerConfig config,
                             const std::vector<double>& h_values,
                             double total_time);

struct PicardProbeResult {
  double max_ratio = 0.0;           // max over probed steps of delta ratios
  double contraction_bound = 0.0;   // 2 L h Gamma_phi
  std::vector<std::vector<double>> sweep_deltas;  // per probed step
};

// Measures per-sweep contraction ratios of the Picard iteration at
// n_probe_steps outer steps of a running chain.
PicardProbeResult picard_probe(const StepPlan& plan, const Potential& p,
                               int n_probe_steps, int nu_star,
                               std::uint64_t seed);

struct InterpOrderResult {
  bool degree_exact = false;  // interpolation error at machine precision
  double slope = 0.0;
  std::vector<double> errors;
};

// Interpolates f on [0, h] at M equispaced nodes for each h and fits the
// decay order of the sup error; expects slope close to M for smooth f.
InterpOrderResult interpolation_order_check(
    const std::function<Eigen::VectorXd(double)>& f, int M,
    const std::vector<double>& h_values);

struct TheoryCheckEntry {
  std::string check;
  int K = 0;
  double gamma = 0.0;
  int M = 0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct TheoryCheckReport {
  std::vector<TheoryCheckEntry> entries;
  bool all_pass = true;
};

// Operator-norm bounds on D+Q, positivity of the reduced backbone spectrum,
// and the Lebesgue-constant bound, over a (K, gamma, M) grid.
// fault_negate_corner flips the sign of the reduced backbone's corner entry
// (test hook for the planted-fault CLI flag).
TheoryCheckReport theory_checks(const std::vector<int>& Ks,
                                const std::vector<double>& gammas,
                                const std::vector<int>& Ms,
                                bool fault_negate_corner = false);

}  // namespace hola
