#include "hola/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hola/errors.hpp"
#include "hola/rng.hpp"

namespace hola {

namespace {

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void check_psd(const Eigen::MatrixXd& cov, const char* who) {
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() >
      1e-8 * std::max(1.0, cov.cwiseAbs().maxCoeff()))
    throw InvalidParameter(std::string(who) + ": covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lam_max = std::max(0.0, es.eigenvalues().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, lam_max))
    throw InvalidParameter(std::string(who) + ": covariance not PSD");
}

}  // namespace

MomentReport compute_moments(const Eigen::MatrixXd& samples, const Potential* p) {
  MomentReport report;
  report.n_samples = samples.rows();
  const int d = static_cast<int>(samples.cols());
  if (report.n_samples == 0) {
    report.mean = Eigen::VectorXd::Zero(d);
    report.cov = Eigen::MatrixXd::Zero(d, d);
    return report;
  }
  report.mean = samples.colwise().mean().transpose();
  Eigen::MatrixXd centered = samples.rowwise() - report.mean.transpose();
  report.cov = centered.transpose() * centered /
               std::max<long>(1, report.n_samples - 1);
  report.cov = 0.5 * (report.cov + report.cov.transpose()).eval();
  report.second_moment_x1 = samples.rowwise().squaredNorm().mean();
  if (p && p->grad) {
    double acc = 0.0;
    for (long i = 0; i < samples.rows(); ++i)
      acc += p->grad(samples.row(i).transpose()).squaredNorm();
    report.grad_second_moment = acc / report.n_samples;
  }
  return report;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()));
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double gaussian_w2(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mean2, const Eigen::MatrixXd& cov2) {
  if (mean1.size() != mean2.size() || cov1.rows() != cov2.rows())
    throw InvalidParameter("gaussian_w2: dimension mismatch");
  check_psd(cov1, "gaussian_w2");
  check_psd(cov2, "gaussian_w2");

  const Eigen::MatrixXd root2 = psd_sqrt(cov2);
  const Eigen::MatrixXd cross = psd_sqrt(root2 * cov1 * root2);
  const double sq = (mean1 - mean2).squaredNorm() +
                    (cov1 + cov2 - 2.0 * cross).trace();
  return std::sqrt(std::max(0.0, sq));
}

MomentCheckReport stationary_moment_check(const Eigen::MatrixXd& samples,
                                          const Potential& p) {
  const long n = samples.rows();
  if (n < 10000)
    throw InsufficientData("stationary_moment_check: need >= 1e4 samples");

  Eigen::VectorXd x_star = p.minimizer.size() == samples.cols()
                               ? p.minimizer
                               : Eigen::VectorXd::Zero(samples.cols());

  Eigen::VectorXd sq(n), gq(n);
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd x = samples.row(i).transpose();
    sq[i] = (x - x_star).squaredNorm();
    gq[i] = p.grad(x).squaredNorm();
  }

  // Block standard error over contiguous blocks; guards against the
  // autocorrelation of chain output.
  auto block_se = [n](const Eigen::VectorXd& v) {
    const int blocks = 100;
    const long len = n / blocks;
    double mean = v.head(blocks * len).mean();
    double acc = 0.0;
    for (int b = 0; b < blocks; ++b) {
      const double bm = v.segment(b * len, len).mean();
      acc += (bm - mean) * (bm - mean);
    }
    return std::sqrt(acc / (blocks - 1)) / std::sqrt(static_cast<double>(blocks));
  };

  MomentCheckReport report;
  report.n_samples = n;
  const double d = static_cast<double>(samples.cols());
  report.second_moment = sq.mean();
  report.second_bound = d / p.m;
  report.second_threshold = 1.1 * report.second_bound + 3.0 * block_se(sq);
  report.grad_moment = gq.mean();
  report.grad_bound = p.L * p.L * d / p.m;
  report.grad_threshold = 1.1 * report.grad_bound + 3.0 * block_se(gq);
  report.pass = report.second_moment <= report.second_threshold &&
                report.grad_moment <= report.grad_threshold;
  return report;
}

namespace {

RunResult run_one_chain_of(SamplerKind kind, const SamplerConfig& config,
                           const Potential& p, const Eigen::VectorXd& lambda,
                           int chain) {
  switch (kind) {
    case SamplerKind::Hola:
      return run_chain(config, p, chain);
    case SamplerKind::Underdamped: {
      SamplerConfig c2 = config;
      c2.K = 2;
      c2.M = 2;
      return run_chain(c2, p, chain);
    }
    case SamplerKind::Ula:
      return run_ula_chain(config, p, chain);
    case SamplerKind::ExactGaussian:
      return run_exact_gaussian_chain(config, lambda, chain);
  }
  throw InvalidParameter("unknown sampler kind");
}

struct ChainMoments {
  long n = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd outer;
};

void pooled_error(const std::vector<ChainMoments>& chains,
                  const Eigen::MatrixXd& target_cov, double* error) {
  const int d = static_cast<int>(target_cov.rows());
  long n = 0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : chains) {
    n += c.n;
    sum += c.sum;
    outer += c.outer;
  }
  const Eigen::VectorXd mean = sum / std::max<long>(1, n);
  Eigen::MatrixXd cov =
      (outer - n * mean * mean.transpose()) / std::max<long>(1, n - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  *error = gaussian_w2(mean, cov, Eigen::VectorXd::Zero(d), target_cov);
}

}  // namespace

OrderSweepResult order_sweep(SamplerKind kind, const Eigen::VectorXd& lambda,
                             SamplerConfig config,
                             const std::vector<double>& h_values,
                             double total_time) {
  if (h_values.size() < 2)
    throw InvalidParameter("order_sweep: need at least 2 step sizes");
  const Potential p = gaussian_potential(lambda);
  const int d = p.dim;
  const Eigen::MatrixXd target_cov =
      lambda.cwiseInverse().asDiagonal().toDenseMatrix();

  OrderSweepResult result;
  result.h_values = h_values;
  // Per h: one ChainMoments record per chain, for the bootstrap.
  std::vector<std::vector<ChainMoments>> stats(h_values.size());

  for (std::size_t hi = 0; hi < h_values.size(); ++hi) {
    SamplerConfig cfg = config;
    cfg.h = h_values[hi];
    cfg.n_steps = std::lround(total_time / cfg.h);
    cfg.burn_in = cfg.n_steps / 5;
    cfg.thin = 1;

    bool diverged = false;
    long grads = 0;
    for (int c = 0; c < cfg.chains; ++c) {
      const RunResult r = run_one_chain_of(kind, cfg, p, lambda, c);
      diverged = diverged || r.report.diverged;
      grads += r.report.grad_evals;
      ChainMoments cm;
      cm.n = r.samples.rows();
      cm.sum = r.samples.colwise().sum().transpose();
      cm.outer = r.samples.transpose() * r.samples;
      stats[hi].push_back(std::move(cm));
    }
    double err = 0.0;
    pooled_error(stats[hi], target_cov, &err);
    result.errors.push_back(err);
    result.diverged.push_back(diverged);
    result.grad_evals.push_back(grads);
    if (diverged) result.all_ok = false;
  }

  result.fitted_slope = loglog_slope(result.h_values, result.errors);

  // Bootstrap over chains, 200 resamples.
  const int reps = 200;
  std::vector<double> slopes;
  slopes.reserve(reps);
  const int n_chains = config.chains;
  for (int r = 0; r < reps; ++r) {
    CounterRng rng(config.seed ^ 0x626f6f74ull, 0xffffffffull, r);
    std::vector<double> errs(h_values.size());
    for (std::size_t hi = 0; hi < h_values.size(); ++hi) {
      std::vector<ChainMoments> resampled;
      resampled.reserve(n_chains);
      for (int c = 0; c < n_chains; ++c) {
        const int pick = static_cast<int>(rng.next_u64() % n_chains);
        resampled.push_back(stats[hi][pick]);
      }
      pooled_error(resampled, target_cov, &errs[hi]);
    }
    slopes.push_back(loglog_slope(result.h_values, errs));
  }
  std::sort(slopes.begin(), slopes.end());
  result.slope_ci_lo = slopes[static_cast<int>(0.025 * reps)];
  result.slope_ci_hi = slopes[static_cast<int>(0.975 * reps) - 1];
  return result;
}

PicardProbeResult picard_probe(const StepPlan& plan, const Potential& p,
                               int n_probe_steps, int nu_star,
                               std::uint64_t seed) {
  if (nu_star < 3)
    throw InvalidParameter("picard_probe: nu_star must be >= 3 to form ratios");

  PicardProbeResult result;
  result.contraction_bound = 2.0 * p.L * plan.h * plan.lebesgue;

  ChainState state;
  state.x = Eigen::MatrixXd::Zero(plan.ops.K, p.dim);

  const int warmup = 100;
  for (long n = 0; n < warmup + n_probe_steps; ++n) {
    CounterRng rng(seed, 0, static_cast<std::uint64_t>(n));
    const auto noise = sample_node_noise(plan, p.dim, rng);
    if (n < warmup) {
      picard_step(plan, p, state, noise, nu_star);
      continue;
    }
    PicardTrace trace;
    picard_step(plan, p, state, noise, nu_star, &trace);
    for (std::size_t i = 1; i + 1 < trace.sweep_deltas.size(); ++i) {
      // Skip near-converged sweeps where rounding dominates the ratio.
      if (trace.sweep_deltas[i] < 1e-12) continue;
      result.max_ratio = std::max(
          result.max_ratio, trace.sweep_deltas[i + 1] / trace.sweep_deltas[i]);
    }
    result.sweep_deltas.push_back(std::move(trace.sweep_deltas));
  }
  return result;
}

InterpOrderResult interpolation_order_check(
    const std::function<Eigen::VectorXd(double)>& f, int M,
    const std::vector<double>& h_values) {
  const NodeSet ns = make_nodes(M);
  InterpOrderResult result;

  double f_scale = 0.0;
  for (double h : h_values) {
    std::vector<Eigen::VectorXd> values;
    values.reserve(M);
    for (int j = 0; j < M; ++j) values.push_back(f(ns.nodes[j] * h));

    double err = 0.0;
    const int grid = 1000;
    for (int i = 0; i <= grid; ++i) {
      const double sigma = static_cast<double>(i) / grid;
      Eigen::VectorXd interp = Eigen::VectorXd::Zero(values[0].size());
      for (int j = 0; j < M; ++j) interp += ns.basis_at(j, sigma) * values[j];
      const Eigen::VectorXd exact = f(sigma * h);
      f_scale = std::max(f_scale, exact.cwiseAbs().maxCoeff());
      err = std::max(err, (exact - interp).cwiseAbs().maxCoeff());
    }
    result.errors.push_back(err);
  }

  double max_err = *std::max_element(result.errors.begin(), result.errors.end());
  if (max_err <= 1e-12 * std::max(1.0, f_scale)) {
    result.degree_exact = true;
    return result;
  }
  result.slope = loglog_slope(h_values, result.errors);
  return result;
}

TheoryCheckReport theory_checks(const std::vector<int>& Ks,
                                const std::vector<double>& gammas,
                                const std::vector<int>& Ms,
                                bool fault_negate_corner) {
  TheoryCheckReport report;
  const double tol = 1e-9;

  for (int K : Ks) {
    for (double gamma : gammas) {
      const auto ops = build_canonical(K, gamma);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          (ops.D + ops.Q).transpose() * (ops.D + ops.Q), Eigen::EigenvaluesOnly);
      TheoryCheckEntry e;
      e.check = "dq_operator_norm";
      e.K = K;
      e.gamma = gamma;
      e.value = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
      e.lower = std::sqrt(1.0 + gamma * gamma) - tol;
      e.upper = std::max(1.0 + 2.0 * gamma, 3.0 * gamma) + tol;
      e.pass = e.value >= e.lower && e.value <= e.upper;
      report.entries.push_back(e);
    }
  }

  for (int K : Ks) {
    // Reduced (K-1) x (K-1) backbone of the auxiliary-block dynamics; its
    // spectrum must sit strictly in the right half plane.
    const int n = K - 1;
    if (n < 2) continue;
    Eigen::MatrixXd qt = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
      qt(i, i + 1) = -1.0;
      qt(i + 1, i) = 1.0;
    }
    qt(n - 1, n - 1) = fault_negate_corner ? -1.0 : 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(qt, false);
    TheoryCheckEntry e;
    e.check = "reduced_backbone_spectrum";
    e.K = K;
    e.value = es.eigenvalues().real().minCoeff();
    e.lower = 1e-6;
    e.upper = std::numeric_limits<double>::infinity();
    e.pass = e.value > e.lower;
    report.entries.push_back(e);
  }

  for (int M : Ms) {
    TheoryCheckEntry e;
    e.check = "lebesgue_bound";
    e.M = M;
    e.value = lebesgue_constant(make_nodes(M));
    double factorial = 1.0;
    for (int i = 2; i < M; ++i) factorial *= i;
    e.lower = 1.0 - tol;  // Lebesgue constants are always >= 1
    e.upper = std::pow(2.0, M - 1) * std::pow(M - 1.0, M - 1.0) / factorial + tol;
    e.pass = e.value >= e.lower && e.value <= e.upper;
    report.entries.push_back(e);
  }

  for (const auto& e : report.entries)
    report.all_pass = report.all_pass && e.pass;
  return report;
}

}  // namespace hola
