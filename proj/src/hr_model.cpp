#include "hrbm/hr_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hrbm/errors.hpp"
#include "hrbm/gaussian.hpp"

namespace hrbm {

namespace {

double logaddexp(double a, double b) {
  const double hi = std::max(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Shared log-domain pieces for one (x, y, lambda). The density factor is
// Q = P + R with P = e^{-x-y} Phi(a) Phi(a') and R = e^{-x} phi(a) / (2 lambda).
struct Pieces {
  double lam, d, a, ap;
  double log_cdf_a, log_cdf_ap, log_pdf_a, log_pdf_ap;
  double log_q;
  double g;

  Pieces(double x, double y, double lambda) : lam(lambda), d(y - x) {
    a = lam + d / (2.0 * lam);
    ap = lam - d / (2.0 * lam);
    log_cdf_a = std_normal_log_cdf(a);
    log_cdf_ap = std_normal_log_cdf(ap);
    log_pdf_a = std_normal_log_pdf(a);
    log_pdf_ap = std_normal_log_pdf(ap);
    const double log_p = -x - y + log_cdf_a + log_cdf_ap;
    log_q = logaddexp(log_p, log_r(x));
    g = std::exp(-x + log_cdf_a) + std::exp(-y + log_cdf_ap);
  }

  [[nodiscard]] double log_r(double x) const { return -x + log_pdf_a - std::log(2.0 * lam); }
};

}  // namespace

HrParam::HrParam(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InputError("lambda must be positive and finite");
  }
}

double hr_cdf(double x, double y, HrParam p) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (x == -inf || y == -inf) return 0.0;
  if (x == inf && y == inf) return 1.0;
  if (x == inf) return std::exp(-std::exp(-y));
  if (y == inf) return std::exp(-std::exp(-x));
  return std::exp(-Pieces(x, y, p.lambda()).g);
}

HrDerivBundle derivatives(double x, double y, HrParam p) {
  const double lam = p.lambda();
  const double d = y - x;
  const double a = lam + d / (2.0 * lam);
  const double ap = lam - d / (2.0 * lam);
  const double ex = std::exp(-x);
  const double ey = std::exp(-y);
  const double cdf_a = std_normal_cdf(a);
  const double cdf_ap = std_normal_cdf(ap);
  const double pdf_a = std_normal_pdf(a);
  const double pdf_ap = std_normal_pdf(ap);
  const double a_l = 1.0 - d / (2.0 * lam * lam);
  const double ap_l = 1.0 + d / (2.0 * lam * lam);
  const double lam2 = lam * lam;

  HrDerivBundle b{};
  b.g = ex * cdf_a + ey * cdf_ap;
  b.g_x = -ex * cdf_a;
  b.g_y = -ey * cdf_ap;
  b.g_xy = -ex * pdf_a / (2.0 * lam);
  b.g_lam = 2.0 * ex * pdf_a;
  b.g_xylam = ex * pdf_a * (1.0 / (2.0 * lam2) + 0.5 - d * d / (8.0 * lam2 * lam2));
  b.d_lam_gxgy = ex * ey * (pdf_a * a_l * cdf_ap + cdf_a * pdf_ap * ap_l);
  return b;
}

HrPointTerms hr_point_terms(double x, double y, HrParam p) {
  const Pieces s(x, y, p.lambda());
  const double lam = s.lam;
  const double lam2 = lam * lam;
  const double d = s.d;
  const double d2 = d * d;

  const double a_l = 1.0 - d / (2.0 * lam2);
  const double ap_l = 1.0 + d / (2.0 * lam2);
  const double a_ll = d / (lam2 * lam);
  const double ap_ll = -a_ll;
  const double big_b = 1.0 / (2.0 * lam2) + 0.5 - d2 / (8.0 * lam2 * lam2);
  const double big_b_l = -1.0 / (lam2 * lam) + d2 / (2.0 * lam2 * lam2 * lam);
  const double a_al = lam - d2 / (4.0 * lam2 * lam);  // a * a_lambda

  // Each term divided by Q, assembled in logs so nothing overflows.
  const double base = -x - y - s.log_q;
  const double w_pdf_cdf = std::exp(base + s.log_pdf_a + s.log_cdf_ap);
  const double w_cdf_pdf = std::exp(base + s.log_cdf_a + s.log_pdf_ap);
  const double w_pdf_pdf = std::exp(base + s.log_pdf_a + s.log_pdf_ap);
  const double w_r = std::exp(s.log_r(x) - s.log_q);
  const double g_lam = 2.0 * std::exp(-x + s.log_pdf_a);

  const double first = w_pdf_cdf * a_l + w_cdf_pdf * ap_l - w_r * 2.0 * lam * big_b;
  const double p_ll = w_pdf_cdf * (a_ll - s.a * a_l * a_l) + 2.0 * w_pdf_pdf * a_l * ap_l +
                      w_cdf_pdf * (ap_ll - s.ap * ap_l * ap_l);
  const double gxy_ll = w_r * 2.0 * lam * (-a_al * big_b + big_b_l);

  HrPointTerms t{};
  t.log_density = -s.g + s.log_q;
  t.score = -g_lam + first;
  t.curvature = g_lam * a_al + p_ll - gxy_ll - first * first;
  return t;
}

double hr_log_density(double x, double y, HrParam p) {
  const Pieces s(x, y, p.lambda());
  return -s.g + s.log_q;
}

double hr_score(double x, double y, HrParam p) { return hr_point_terms(x, y, p).score; }

double hr_curvature(double x, double y, HrParam p) { return hr_point_terms(x, y, p).curvature; }

FisherInformation fisher_moments(HrParam p, const QuadratureConfig& q) {
  auto weighted = [&](auto&& pick) {
    return integrate_box(
        [&](double x, double y) {
          const HrPointTerms t = hr_point_terms(x, y, p);
          const double w = std::exp(t.log_density);
          return w == 0.0 ? 0.0 : w * pick(t);
        },
        q);
  };
  const Integral s2 = weighted([](const HrPointTerms& t) { return t.score * t.score; });
  const Integral curv = weighted([](const HrPointTerms& t) { return t.curvature; });
  const Integral mass = weighted([](const HrPointTerms&) { return 1.0; });
  const Integral mean = weighted([](const HrPointTerms& t) { return t.score; });

  FisherInformation f{};
  f.via_score = s2.value;
  f.via_curvature = -curv.value;
  f.mass = mass.value;
  f.mean_score = mean.value;
  f.abs_error = std::max({s2.abs_error, curv.abs_error, mass.abs_error, mean.abs_error});
  f.converged = s2.converged && curv.converged && mass.converged && mean.converged;
  return f;
}

double fisher_information(HrParam p, const QuadratureConfig& q) {
  return integrate_box_or_throw(
      [&](double x, double y) {
        const HrPointTerms t = hr_point_terms(x, y, p);
        const double w = std::exp(t.log_density);
        return w == 0.0 ? 0.0 : w * t.score * t.score;
      },
      q, "fisher_information");
}

}  // namespace hrbm
