#pragma once

#include <cstdint>
#include <functional>

#include "hrbm/gaussian.hpp"
#include "hrbm/hr_model.hpp"
#include "hrbm/quadrature.hpp"

namespace hrbm {

// One block maxima design: k blocks of size m with correlation on the
// rho_m = (b_m^2 - lambda^2) / (b_m^2 + lambda^2) path.
struct BlockScheme {
  std::int64_t n_target;
  std::int64_t m;
  std::int64_t k;
  double b_m;
  double rho_m;
  double lambda;
  double c;

  // lambda_m = b_m sqrt((1 - rho_m) / (1 + rho_m)).
  [[nodiscard]] double lambda_m() const;
};

// (b^2 - lambda^2) / (b^2 + lambda^2), the correlation that keeps lambda_m = lambda.
[[nodiscard]] double rho_on_path(double b_m, double lambda);

// Builds the scheme for a given block size and k = floor(c b_m^4).
// Throws InputError if m < 2, k < 1 or rho_m falls outside (-1, 1).
[[nodiscard]] BlockScheme make_scheme(std::int64_t m, HrParam lambda, double c,
                                      std::int64_t n_target = 0);

// Solves m c b_m^4 = n for real m by fixed-point iteration, floors m and sets
// k = floor(c b_m^4). Throws InputError if n < 100, c <= 0 or k < 2.
[[nodiscard]] BlockScheme plan_blocks(std::int64_t n_target, HrParam lambda, double c);

[[nodiscard]] double u_m(double x, const NormingConstant& b);
[[nodiscard]] double u_m(double x, double b_m);
[[nodiscard]] double q_m(double x, double y, const BlockScheme& s);

// Log density of the scaled componentwise maxima (b_m max - b_m^2) of m
// bivariate normal pairs. Returns -inf where the density underflows.
[[nodiscard]] double finite_m_log_density(double x, double y, const BlockScheme& s);
// Log of the joint CDF Phi_rho(u_m(x), u_m(y))^m.
[[nodiscard]] double finite_m_log_cdf(double x, double y, const BlockScheme& s);

// Integral of f against the finite-m density over the box.
[[nodiscard]] Integral finite_m_integral(const std::function<double(double, double)>& f,
                                         const BlockScheme& s, const QuadratureConfig& q = {});
// Same, throwing NumericError when the tolerance is not met.
[[nodiscard]] double finite_m_expectation(const std::function<double(double, double)>& f,
                                          const BlockScheme& s, const QuadratureConfig& q = {});

}  // namespace hrbm
