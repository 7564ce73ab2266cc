#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hrbm/asymptotics.hpp"
#include "hrbm/gaussian.hpp"
#include "hrbm/harness.hpp"
#include "hrbm/hr_model.hpp"

namespace hrbm {

namespace {

std::string at_most(double bound) {
  std::ostringstream s;
  s << "<= " << bound;
  return s.str();
}

void add(CheckReport& r, std::string name, double observed, double bound) {
  r.items.push_back({std::move(name), observed, at_most(bound), observed <= bound});
}

double max_score_fd_error(std::mt19937_64& rng, int points) {
  std::uniform_real_distribution<double> coord(-2.0, 4.0);
  std::uniform_real_distribution<double> lam(0.2, 3.0);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = coord(rng), y = coord(rng), l = lam(rng);
    const double h = 1e-6;
    const double fd = (hr_log_density(x, y, HrParam(l + h)) - hr_log_density(x, y, HrParam(l - h))) / (2 * h);
    worst = std::max(worst, std::abs(fd - hr_score(x, y, HrParam(l))));
  }
  return worst;
}

double max_curvature_fd_error(std::mt19937_64& rng, int points) {
  std::uniform_real_distribution<double> coord(-2.0, 4.0);
  std::uniform_real_distribution<double> lam(0.2, 3.0);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = coord(rng), y = coord(rng), l = lam(rng);
    const double h = 1e-5;
    const double fd = (hr_score(x, y, HrParam(l + h)) - hr_score(x, y, HrParam(l - h))) / (2 * h);
    worst = std::max(worst, std::abs(fd - hr_curvature(x, y, HrParam(l))));
  }
  return worst;
}

void information_checks(CheckReport& r, double lambda) {
  const FisherInformation f = fisher_moments(HrParam(lambda));
  const std::string tag = " (lambda=" + std::to_string(lambda).substr(0, 4) + ")";
  add(r, "density normalization" + tag, std::abs(f.mass - 1.0), 1e-6);
  add(r, "mean-zero score" + tag, std::abs(f.mean_score), 1e-6);
  add(r, "information identity, relative" + tag,
      std::abs(f.via_score - f.via_curvature) / f.via_score, 1e-4);
}

}  // namespace

CheckReport check_invariants(CheckLevel level) {
  CheckReport r;
  std::mt19937_64 rng(20240611);

  double worst_bm = 0.0;
  for (double m = 10; m <= 1e7; m *= 10) {
    const double b = solve_bm(m).b_m;
    worst_bm = std::max(worst_bm, std::abs(b - m * std_normal_pdf(b)) / b);
  }
  add(r, "norming constant relative residual, m = 10..1e7", worst_bm, 1e-12);

  const double exact_origin = 0.25 + std::asin(0.95) / (2.0 * std::numbers::pi);
  add(r, "bivariate normal CDF at origin, rho = 0.95", std::abs(bivariate_normal_cdf(0, 0, 0.95) - exact_origin), 1e-13);

  add(r, "score vs finite difference, 20 points", max_score_fd_error(rng, 20), 1e-5);
  add(r, "curvature vs finite difference, 20 points", max_curvature_fd_error(rng, 20), 1e-4);
  information_checks(r, 0.5);

  const BlockScheme s = plan_blocks(100000, HrParam(0.5), 1.0);
  add(r, "plan_blocks(1e5, c=1): |m - 1044| + |k - 95|",
      static_cast<double>(std::abs(s.m - 1044) + std::abs(s.k - 95)), 0.0);
  const double mass = finite_m_expectation([](double, double) { return 1.0; }, s);
  add(r, "finite-m density normalization, m = 1044", std::abs(mass - 1.0), 1e-6);

  const BiasTerms t = bias_terms(HrParam(0.5));
  const double info = fisher_information(HrParam(0.5));
  add(r, "L2 bias coefficient equals -I (lambda=0.5), relative", std::abs(t.j2 + t.j4 + info) / info, 1e-6);

  if (level == CheckLevel::quick) return r;

  for (double l : {0.25, 1.0, 2.0}) information_checks(r, l);
  add(r, "score vs finite difference, 100 points", max_score_fd_error(rng, 100), 1e-5);
  add(r, "curvature vs finite difference, 100 points", max_curvature_fd_error(rng, 100), 1e-4);

  QuadratureConfig q;
  add(r, "Fisher information stable under 50% larger box",
      std::abs(fisher_information(HrParam(0.5), q.enlarged(0.5)) - info), q.abs_tol);

  QuadratureConfig loose;
  loose.abs_tol = 1e-6;
  const Integral direct = bias_l1_direct(HrParam(0.5), loose);
  add(r, "bias L1 coefficient: integral route vs direct expansion", std::abs(direct.value - (t.j1 + t.j3)), 1e-5);

  const OracleSequence seq = bias_A_oracle(HrParam(0.5), 1.0, {1000, 10000, 100000});
  const double a = t.j1 + t.j3;
  const double first_gap = std::abs(seq.values.front() - a);
  const double last_gap = std::abs(seq.final_value - a);
  add(r, "oracle gaps shrink (last gap - first gap)", last_gap - first_gap, 0.0);
  add(r, "oracle final relative gap at m = 1e5", last_gap / std::abs(a), 0.10);

  add(r, "reference I^-1(0.5) = 0.2196", std::abs(1.0 / info - 0.2196), 5e-4);
  add(r, "reference I^-1 A (0.5, l1 = 1) = 0.0117", std::abs(a / info - 0.0117), 5e-4);
  return r;
}

}  // namespace hrbm
