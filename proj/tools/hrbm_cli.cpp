#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "hrbm/asymptotics.hpp"
#include "hrbm/errors.hpp"
#include "hrbm/finite_m.hpp"
#include "hrbm/harness.hpp"
#include "hrbm/hr_model.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNumericError = 2;
constexpr int kInvariantFailure = 3;

void print(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_fisher(double lambda) {
  const hrbm::FisherInformation f = hrbm::fisher_moments(hrbm::HrParam(lambda));
  if (!f.converged) throw hrbm::NumericError("fisher: quadrature did not reach tolerance", f.abs_error);
  print({{"lambda", lambda},
         {"fisher_information", f.via_score},
         {"inverse", 1.0 / f.via_score},
         {"via_curvature", f.via_curvature},
         {"error_estimate", f.abs_error}});
  return kOk;
}

int cmd_bias(double lambda, double l1, double l2) {
  const hrbm::HrParam p(lambda);
  const hrbm::LimitPair lim{l1, l2};
  const double a = hrbm::bias_A(p, lim);
  const double info = hrbm::fisher_information(p);
  print({{"lambda", lambda}, {"l1", l1}, {"l2", l2}, {"A", a}, {"mean", a / info}, {"variance", 1.0 / info}});
  return kOk;
}

int cmd_plan(std::int64_t n, double lambda, double c) {
  const hrbm::BlockScheme s = hrbm::plan_blocks(n, hrbm::HrParam(lambda), c);
  const hrbm::LimitPair lim = hrbm::limits_of_scheme(s);
  print({{"n", s.n_target}, {"m", s.m}, {"k", s.k}, {"mk", s.m * s.k}, {"b_m", s.b_m},
         {"rho_m", s.rho_m}, {"lambda", s.lambda}, {"c", s.c}, {"l1", lim.l1}, {"l2", lim.l2}});
  return kOk;
}

int cmd_simulate(const std::string& path, int workers) {
  std::ifstream f(path);
  if (!f) throw hrbm::InputError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw hrbm::InputError(std::string("config: ") + e.what());
  }
  hrbm::ExperimentConfig cfg = hrbm::ExperimentConfig::from_json(j);
  if (workers > 0) cfg.workers = workers;
  const hrbm::ReplicationReport r = hrbm::run_experiment(cfg, &std::cerr);
  print(hrbm::aggregate_json(r));
  return kOk;
}

int cmd_estimate(const std::string& path, std::int64_t m) {
  const hrbm::EstimateReport r = hrbm::estimate_from_file(path, m);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  print(hrbm::estimate_json(r));
  return r.mle.status == hrbm::MleStatus::not_converged ? kNumericError : kOk;
}

int cmd_check(bool full) {
  const hrbm::CheckReport r = hrbm::check_invariants(full ? hrbm::CheckLevel::full : hrbm::CheckLevel::quick);
  for (const auto& item : r.items) {
    std::cout << (item.passed ? "PASS " : "FAIL ") << item.name << ": observed " << item.observed
              << ", required " << item.required << "\n";
  }
  return r.all_passed() ? kOk : kInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hüsler-Reiss block maxima estimation"};
  app.require_subcommand(1);

  double lambda = 0.5;
  double l1 = 1.0;
  double l2 = 0.0;
  double c = 1.0;
  std::int64_t n = 100000;
  std::int64_t m = 0;
  int workers = 0;
  bool full = false;
  std::string path;

  auto* fisher = app.add_subcommand("fisher", "Fisher information of the HR model");
  fisher->add_option("--lambda", lambda, "dependence parameter")->required();

  auto* bias = app.add_subcommand("bias", "asymptotic bias A and the predicted mean");
  bias->add_option("--lambda", lambda)->required();
  bias->add_option("--l1", l1)->required();
  bias->add_option("--l2", l2)->required();

  auto* plan = app.add_subcommand("plan", "block design for a sample size");
  plan->add_option("--n", n)->required();
  plan->add_option("--lambda", lambda)->required();
  plan->add_option("--c", c)->required();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo replication study");
  simulate->add_option("--config", path, "JSON config")->required();
  simulate->add_option("--workers", workers, "worker threads (overrides the config)");

  auto* estimate = app.add_subcommand("estimate", "fit lambda to standard-normal-marginal pairs");
  estimate->add_option("--input", path, "CSV with columns x,y")->required();
  estimate->add_option("--m", m, "block size")->required();

  auto* check = app.add_subcommand("check", "run the invariant suite");
  check->add_flag("--full", full, "include slow oracle and reference-value checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fisher) return cmd_fisher(lambda);
    if (*bias) return cmd_bias(lambda, l1, l2);
    if (*plan) return cmd_plan(n, lambda, c);
    if (*simulate) return cmd_simulate(path, workers);
    if (*estimate) return cmd_estimate(path, m);
    if (*check) return cmd_check(full);
  } catch (const hrbm::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const hrbm::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << " (error estimate " << e.achieved_error() << ")\n";
    return kNumericError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
  return kInputError;
}
