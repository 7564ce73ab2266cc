#pragma once

#include "hrbm/quadrature.hpp"

namespace hrbm {

class HrParam {
 public:
  // Throws InputError unless 0 < lambda < inf.
  explicit HrParam(double lambda);
  [[nodiscard]] double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

// G = e^{-x} Phi(a) + e^{-y} Phi(a') with a = lambda + (y-x)/(2 lambda),
// a' = lambda + (x-y)/(2 lambda), and its partial derivatives.
struct HrDerivBundle {
  double g;
  double g_x;
  double g_y;
  double g_xy;
  double g_lam;
  double g_xylam;
  double d_lam_gxgy;
};

[[nodiscard]] double hr_cdf(double x, double y, HrParam p);
[[nodiscard]] HrDerivBundle derivatives(double x, double y, HrParam p);
[[nodiscard]] double hr_log_density(double x, double y, HrParam p);
[[nodiscard]] double hr_score(double x, double y, HrParam p);
[[nodiscard]] double hr_curvature(double x, double y, HrParam p);

struct HrPointTerms {
  double log_density;
  double score;
  double curvature;
};
// All three per-point quantities sharing one set of special-function calls.
[[nodiscard]] HrPointTerms hr_point_terms(double x, double y, HrParam p);

struct FisherInformation {
  double via_score;      // E[score^2]
  double via_curvature;  // -E[curvature]
  double mass;           // integral of the density over the box
  double mean_score;
  double abs_error;      // largest quadrature error estimate of the four
  bool converged;
};

// All four moments in one pass; never throws on tolerance failure.
[[nodiscard]] FisherInformation fisher_moments(HrParam p, const QuadratureConfig& q = {});
// E[score^2]. Throws NumericError when the quadrature budget is exhausted.
[[nodiscard]] double fisher_information(HrParam p, const QuadratureConfig& q = {});

}  // namespace hrbm
