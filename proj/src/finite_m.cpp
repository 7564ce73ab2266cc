#include "hrbm/finite_m.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

double logaddexp(double a, double b) {
  const double hi = std::max(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double rho_on_path(double b, double lambda) {
  const double b2 = b * b;
  const double l2 = lambda * lambda;
  return (b2 - l2) / (b2 + l2);
}

double BlockScheme::lambda_m() const { return b_m * std::sqrt((1.0 - rho_m) / (1.0 + rho_m)); }

BlockScheme make_scheme(std::int64_t m, HrParam lambda, double c, std::int64_t n_target) {
  if (m < 2) throw InputError("block size m must be >= 2");
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("c must be positive and finite");
  const double b = solve_bm(static_cast<double>(m)).b_m;
  const double b4 = b * b * b * b;
  const auto k = static_cast<std::int64_t>(std::floor(c * b4));
  if (k < 1) throw InputError("scheme has no complete block (k < 1)");
  const double rho = rho_on_path(b, lambda.lambda());
  if (!(std::abs(rho) < 1.0)) throw InputError("rho_m must lie in (-1, 1)");
  return BlockScheme{n_target > 0 ? n_target : m * k, m, k, b, rho, lambda.lambda(), c};
}

BlockScheme plan_blocks(std::int64_t n_target, HrParam lambda, double c) {
  if (n_target < 100) throw InputError("n_target must be >= 100");
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("c must be positive and finite");
  const double n = static_cast<double>(n_target);
  // Solve log m + 4 log b_m = log(n / c) by Newton in log m; since
  // d log b_m / d log m = 1 / (1 + b_m^2) the slope is 1 + 4 / (1 + b_m^2).
  const double target = std::log(n / c);
  double log_m = std::log(std::max(2.0, n / c / 81.0));
  bool settled = false;
  for (int it = 0; it < 50 && !settled; ++it) {
    const double b = solve_bm(std::exp(log_m)).b_m;
    const double step = (log_m + 4.0 * std::log(b) - target) / (1.0 + 4.0 / (1.0 + b * b));
    log_m = std::max(std::log(2.0), log_m - step);
    settled = std::abs(step) <= 1e-13;
  }
  const double m = std::exp(log_m);
  if (!settled) throw NumericError("plan_blocks: fixed-point iteration did not settle", m);
  const BlockScheme s = make_scheme(static_cast<std::int64_t>(std::floor(m)), lambda, c, n_target);
  if (s.k < 2) throw InputError("plan_blocks: fewer than 2 blocks; increase n_target or c");
  return s;
}

double u_m(double x, double b_m) { return x / b_m + b_m; }

double u_m(double x, const NormingConstant& b) { return u_m(x, b.b_m); }

double q_m(double x, double y, const BlockScheme& s) {
  return (u_m(x, s.b_m) - s.rho_m * u_m(y, s.b_m)) / std::sqrt(1.0 - s.rho_m * s.rho_m);
}

double finite_m_log_cdf(double x, double y, const BlockScheme& s) {
  return static_cast<double>(s.m) * bivariate_normal_log_cdf(u_m(x, s.b_m), u_m(y, s.b_m), s.rho_m);
}

double finite_m_log_density(double x, double y, const BlockScheme& s) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  const double b = s.b_m;
  const double m = static_cast<double>(s.m);
  const double log_cdf = bivariate_normal_log_cdf(u_m(x, b), u_m(y, b), s.rho_m);
  if (log_cdf == neg_inf) return neg_inf;
  const double sd = std::sqrt(1.0 - s.rho_m * s.rho_m);
  const double inv_2b2 = 1.0 / (2.0 * b * b);
  const double q_xy = q_m(x, y, s);
  const double q_yx = q_m(y, x, s);
  const double both = std::log((m - 1.0) / m) - x - y - (x * x + y * y) * inv_2b2 +
                      std_normal_log_cdf(q_xy) + std_normal_log_cdf(q_yx);
  const double joint = log_cdf - x - x * x * inv_2b2 + std_normal_log_pdf(q_yx) - std::log(b * sd);
  return (m - 2.0) * log_cdf + logaddexp(both, joint);
}

Integral finite_m_integral(const std::function<double(double, double)>& f, const BlockScheme& s,
                           const QuadratureConfig& q) {
  return integrate_box(
      [&](double x, double y) {
        const double w = std::exp(finite_m_log_density(x, y, s));
        return w == 0.0 ? 0.0 : w * f(x, y);
      },
      q);
}

double finite_m_expectation(const std::function<double(double, double)>& f, const BlockScheme& s,
                            const QuadratureConfig& q) {
  const Integral r = finite_m_integral(f, s, q);
  if (!r.converged) {
    throw NumericError("finite_m_expectation: quadrature did not reach tolerance", r.abs_error);
  }
  return r.value;
}

}  // namespace hrbm
