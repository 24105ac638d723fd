// Command-line front end: run samplers, order sweeps, and theory checks with
// reproducible, atomically written output artifacts.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "hola/baselines.hpp"
#include "hola/diagnostics.hpp"
#include "hola/errors.hpp"
#include "hola/potential.hpp"
#include "hola/sampler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitCheckFailed = 3;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Temp-file plus rename; reruns never leave a partially written artifact.
void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct PotentialFlags {
  std::string name = "gaussian";
  int dim = 1;
  std::vector<double> lambda;
  double m = 1.0;
};

hola::Potential make_potential(const PotentialFlags& flags) {
  if (flags.name == "gaussian") {
    Eigen::VectorXd lam;
    if (flags.lambda.empty()) {
      lam = Eigen::VectorXd::Ones(flags.dim);
    } else {
      lam = Eigen::Map<const Eigen::VectorXd>(flags.lambda.data(),
                                              flags.lambda.size());
    }
    return hola::gaussian_potential(lam);
  }
  if (flags.name == "hyperbolic")
    return hola::hyperbolic_potential(flags.dim, flags.m);
  throw hola::InvalidParameter("unknown potential: " + flags.name);
}

Eigen::VectorXd lambda_of(const PotentialFlags& flags) {
  if (flags.name != "gaussian") return {};
  if (flags.lambda.empty()) return Eigen::VectorXd::Ones(flags.dim);
  return Eigen::Map<const Eigen::VectorXd>(flags.lambda.data(),
                                           flags.lambda.size());
}

json config_echo(const hola::SamplerConfig& cfg, const PotentialFlags& pot,
                 const std::string& sampler) {
  json j;
  j["potential"] = pot.name;
  j["dim"] = pot.dim;
  if (pot.name == "gaussian") {
    const Eigen::VectorXd lam = lambda_of(pot);
    j["lambda"] = std::vector<double>(lam.data(), lam.data() + lam.size());
  } else {
    j["m"] = pot.m;
  }
  j["sampler"] = sampler;
  j["order"] = cfg.K;
  j["gamma"] = cfg.gamma;
  j["step"] = cfg.h;
  j["steps"] = cfg.n_steps;
  j["nodes"] = cfg.effective_M();
  j["picard"] = cfg.effective_nu();
  j["burnin"] = cfg.burn_in;
  j["thin"] = cfg.thin;
  j["chains"] = cfg.chains;
  j["seed"] = cfg.seed;
  j["strict"] = cfg.strict;
  return j;
}

int cmd_run(const hola::SamplerConfig& cfg, const PotentialFlags& pot,
            const std::string& sampler, const std::string& out_path,
            const std::string& format, bool full_state) {
  const hola::Potential p = make_potential(pot);
  const hola::SamplerKind kind = hola::sampler_kind_from_name(sampler);
  if (full_state && kind != hola::SamplerKind::Hola &&
      kind != hola::SamplerKind::Underdamped)
    throw hola::InvalidParameter("--full-state requires the hola or underdamped sampler");

  hola::EnsembleResult result;
  if (full_state) {
    hola::SamplerConfig c2 = cfg;
    if (kind == hola::SamplerKind::Underdamped) {
      c2.K = 2;
      c2.M = 2;
    }
    result = hola::run_ensemble(c2, p, true);
  } else {
    result = hola::run_sampler_ensemble(kind, cfg, p, lambda_of(pot));
  }

  const int d = p.dim;
  const int state_cols =
      full_state ? static_cast<int>(result.full_states.cols()) : d;
  const int K_blocks = state_cols / d;

  auto row_step = [&cfg](long row_in_chain) {
    return cfg.burn_in + row_in_chain * cfg.thin;
  };
  auto chain_of_row = [&result](long row) {
    int c = 0;
    while (c + 1 < static_cast<int>(result.chain_offsets.size()) &&
           result.chain_offsets[c + 1] <= row)
      ++c;
    return c;
  };

  std::string body;
  body.reserve(static_cast<std::size_t>(result.samples.rows() + 1) * 32);
  const Eigen::MatrixXd& data = full_state ? result.full_states : result.samples;
  if (format == "csv") {
    body += "chain,step";
    for (int b = 0; b < K_blocks; ++b)
      for (int j = 0; j < d; ++j)
        body += ",x" + std::to_string(b + 1) + "_" + std::to_string(j);
    body += "\n";
    for (long i = 0; i < data.rows(); ++i) {
      const int c = chain_of_row(i);
      body += std::to_string(c) + "," +
              std::to_string(row_step(i - result.chain_offsets[c]));
      for (int j = 0; j < data.cols(); ++j) body += "," + fmt17(data(i, j));
      body += "\n";
    }
  } else if (format == "jsonl") {
    for (long i = 0; i < data.rows(); ++i) {
      const int c = chain_of_row(i);
      json obj;
      obj["chain"] = c;
      obj["step"] = row_step(i - result.chain_offsets[c]);
      for (int b = 0; b < K_blocks; ++b) {
        std::vector<double> block(d);
        for (int j = 0; j < d; ++j) block[j] = data(i, b * d + j);
        obj["x" + std::to_string(b + 1)] = block;
      }
      body += obj.dump() + "\n";
    }
  } else {
    throw hola::InvalidParameter("unknown format: " + format);
  }
  atomic_write(out_path, body);

  json report;
  report["config"] = config_echo(cfg, pot, sampler);
  report["n_samples"] = result.samples.rows();
  long grads = 0;
  double wall = 0.0;
  json chain_reports = json::array();
  for (const auto& r : result.reports) {
    grads += r.grad_evals;
    wall = std::max(wall, r.wall_seconds);
    json cr;
    cr["n_steps"] = r.n_steps;
    cr["grad_evals"] = r.grad_evals;
    cr["wall_seconds"] = r.wall_seconds;
    cr["diverged"] = r.diverged;
    if (r.diverged) cr["divergence_step"] = r.divergence_step;
    chain_reports.push_back(cr);
  }
  report["grad_evals"] = grads;
  report["wall_seconds"] = wall;
  report["diverged"] = result.any_diverged;
  report["chains"] = chain_reports;
  if (result.samples.rows() > 0) {
    const auto moments = hola::compute_moments(result.samples);
    report["moments"]["mean"] = std::vector<double>(
        moments.mean.data(), moments.mean.data() + moments.mean.size());
    report["moments"]["cov"] = matrix_to_json(moments.cov);
    report["moments"]["second_moment_x1"] = moments.second_moment_x1;
  }
  atomic_write(out_path + ".report.json", report.dump(2) + "\n");

  return result.any_diverged ? kExitDivergence : kExitOk;
}

int cmd_sweep(const hola::SamplerConfig& cfg, const PotentialFlags& pot,
              const std::string& sampler, const std::vector<double>& h_list,
              double total_time, const std::string& out_path) {
  if (pot.name != "gaussian")
    throw hola::InvalidParameter("sweep requires the gaussian potential");
  const hola::SamplerKind kind = hola::sampler_kind_from_name(sampler);
  const auto result =
      hola::order_sweep(kind, lambda_of(pot), cfg, h_list, total_time);

  json j;
  j["config"] = config_echo(cfg, pot, sampler);
  j["total_time"] = total_time;
  j["h_values"] = result.h_values;
  j["errors"] = result.errors;
  j["fitted_slope"] = result.fitted_slope;
  j["slope_ci"] = {result.slope_ci_lo, result.slope_ci_hi};
  j["grad_evals"] = result.grad_evals;
  j["diverged"] = result.diverged;
  j["all_ok"] = result.all_ok;
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    atomic_write(out_path, text);
  return result.all_ok ? kExitOk : kExitDivergence;
}

int cmd_check(int kmin, int kmax, const std::vector<double>& gammas, int mmin,
              int mmax, bool fake_gamma_negative, const std::string& out_path) {
  std::vector<int> Ks, Ms;
  for (int k = kmin; k <= kmax; ++k) Ks.push_back(k);
  for (int m = mmin; m <= mmax; ++m) Ms.push_back(m);
  const auto report = hola::theory_checks(Ks, gammas, Ms, fake_gamma_negative);

  json entries = json::array();
  for (const auto& e : report.entries) {
    json je;
    je["check"] = e.check;
    if (e.K > 0) je["K"] = e.K;
    if (e.gamma > 0) je["gamma"] = e.gamma;
    if (e.M > 0) je["M"] = e.M;
    je["value"] = e.value;
    je["lower"] = e.lower;
    je["upper"] = std::isinf(e.upper) ? json() : json(e.upper);
    je["pass"] = e.pass;
    entries.push_back(je);
  }
  json j;
  j["entries"] = entries;
  j["all_pass"] = report.all_pass;
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    atomic_write(out_path, text);
  return report.all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_plan(int K, double gamma, double h, int M, const std::string& out_path) {
  const auto ops = hola::build_canonical(K, gamma);
  const auto plan = hola::build_plan(ops, M > 0 ? M : std::max(K - 1, 2), h);

  json j;
  j["K"] = K;
  j["gamma"] = gamma;
  j["h"] = h;
  j["M"] = plan.nodes.M;
  j["D_can"] = matrix_to_json(ops.D);
  j["Q_can"] = matrix_to_json(ops.Q);
  j["A_can"] = matrix_to_json(ops.A);
  j["nodes"] = std::vector<double>(plan.nodes.nodes.data(),
                                   plan.nodes.nodes.data() + plan.nodes.M);
  j["lebesgue_constant"] = plan.lebesgue;
  json exps = json::array();
  for (const auto& e : plan.exp_at_nodes) exps.push_back(matrix_to_json(e));
  j["exp_at_nodes"] = exps;
  json alpha = json::array();
  for (const auto& row : plan.alpha) {
    json jr = json::array();
    for (const auto& a : row) jr.push_back(matrix_to_json(a));
    alpha.push_back(jr);
  }
  j["alpha"] = alpha;
  j["sigma_c"] = matrix_to_json(plan.sigma_c);
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    atomic_write(out_path, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hola: higher-order Langevin Monte Carlo sampler"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file (key=value, flag names as keys)");

  PotentialFlags pot;
  hola::SamplerConfig cfg;
  std::string sampler = "hola";
  std::string out_path, format = "csv";
  bool full_state = false;
  bool seed_set = false;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool need_seed) {
    sub->add_option("--potential", pot.name, "gaussian | hyperbolic");
    sub->add_option("--dim", pot.dim, "target dimension d");
    sub->add_option("--lambda", pot.lambda, "gaussian curvatures");
    sub->add_option("--m", pot.m, "hyperbolic strong-convexity constant");
    sub->add_option("--order", cfg.K, "dynamics order K");
    sub->add_option("--gamma", cfg.gamma, "damping gamma");
    sub->add_option("--picard", cfg.nu_star, "Picard sweeps (default K-1)");
    sub->add_option("--nodes", cfg.M, "collocation nodes M (default K-1)");
    sub->add_option("--chains", cfg.chains, "independent chains");
    auto* s = sub->add_option("--seed", seed_value, "RNG seed (required)");
    if (need_seed) s->required();
    sub->add_flag("--strict", cfg.strict, "contraction guard becomes an error");
    sub->add_option("--sampler", sampler,
                    "hola | ula | underdamped | exact-gaussian");
  };

  auto* run = app.add_subcommand("run", "run a sampler and write samples");
  add_common(run, true);
  run->add_option("--step", cfg.h, "step size h")->required();
  run->add_option("--steps", cfg.n_steps, "outer steps N")->required();
  run->add_option("--burnin", cfg.burn_in, "discarded initial steps");
  run->add_option("--thin", cfg.thin, "keep every thin-th sample");
  run->add_option("--out", out_path, "samples output path")->required();
  run->add_option("--format", format, "csv | jsonl");
  run->add_flag("--full-state", full_state, "emit all K blocks");

  std::vector<double> h_list;
  double total_time = 0.0;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "order-of-accuracy h-sweep");
  add_common(sweep, true);
  sweep->add_option("--h-list", h_list, "step sizes")->expected(3, 100);
  sweep->add_option("--time", total_time, "total simulated time per chain")
      ->required();
  sweep->add_option("--out", sweep_out, "JSON report path (default stdout)");

  int kmin = 3, kmax = 8, mmin = 2, mmax = 6;
  std::vector<double> gammas = {0.5, 1.0, 2.0, 5.0};
  bool fake_gamma_negative = false;
  std::string check_out;
  auto* check = app.add_subcommand("check", "theory sanity checks");
  check->add_option("--kmin", kmin);
  check->add_option("--kmax", kmax);
  check->add_option("--gammas", gammas);
  check->add_option("--mmin", mmin);
  check->add_option("--mmax", mmax);
  check->add_flag("--fake-gamma-negative", fake_gamma_negative,
                  "plant a fault (the check must then fail)");
  check->add_option("--out", check_out, "JSON report path (default stdout)");

  int plan_K = 3;
  double plan_gamma = 2.0, plan_h = 0.05;
  int plan_M = 0;
  bool plan_dump = false;
  std::string plan_out;
  auto* plan = app.add_subcommand("plan", "inspect precomputed operators");
  plan->add_option("--order", plan_K);
  plan->add_option("--gamma", plan_gamma);
  plan->add_option("--step", plan_h);
  plan->add_option("--nodes", plan_M);
  plan->add_flag("--dump", plan_dump, "print all canonical matrices as JSON");
  plan->add_option("--out", plan_out, "JSON output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.seed = seed_value;
    if (run->parsed()) {
      seed_set = run->count("--seed") > 0;
      if (!seed_set) throw hola::InvalidParameter("--seed is required");
      return cmd_run(cfg, pot, sampler, out_path, format, full_state);
    }
    if (sweep->parsed()) {
      if (h_list.size() < 3)
        throw hola::InvalidParameter("--h-list needs at least 3 values");
      return cmd_sweep(cfg, pot, sampler, h_list, total_time, sweep_out);
    }
    if (check->parsed())
      return cmd_check(kmin, kmax, gammas, mmin, mmax, fake_gamma_negative,
                       check_out);
    if (plan->parsed()) {
      (void)plan_dump;
      return cmd_plan(plan_K, plan_gamma, plan_h, plan_M, plan_out);
    }
  } catch (const hola::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const hola::InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
