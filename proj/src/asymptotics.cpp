#include "hrbm/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hrbm/errors.hpp"
#include "hrbm/gaussian.hpp"

namespace hrbm {

namespace {

// Per-point quantities shared by the four integrands. a is the argument of
// the phi factor, a' = lambda + (x - y) / (2 lambda) the other one.
struct Point {
  double x, y, lam, a, ap;
  double score;
  double log_h;  // log H = -G
  double w_phi;  // score * H * e^{-x} phi(a) / (2 lambda)
  double w_cdf;  // score * H * e^{-x-y} Phi(a) Phi(a')
  double w_mix;  // score * H * e^{-x-y} phi(a) Phi(a'), i.e. w_cdf * phi(a) / Phi(a)
  bool null;     // the weight underflows to zero

  Point(double x_, double y_, double lambda) : x(x_), y(y_), lam(lambda) {
    a = lam + (y - x) / (2.0 * lam);
    ap = lam + (x - y) / (2.0 * lam);
    const double lc_a = std_normal_log_cdf(a);
    const double lc_ap = std_normal_log_cdf(ap);
    const double lp_a = std_normal_log_pdf(a);
    const double g = std::exp(-x + lc_a) + std::exp(-y + lc_ap);
    log_h = -g;
    null = !std::isfinite(g);
    if (null) {
      score = w_phi = w_cdf = w_mix = 0.0;
      return;
    }
    score = hr_score(x, y, HrParam(lam));
    w_phi = score * std::exp(log_h - x + lp_a - std::log(2.0 * lam));
    w_cdf = score * std::exp(log_h - x - y + lc_a + lc_ap);
    w_mix = score * std::exp(log_h - x - y + lp_a + lc_ap);
    null = w_phi == 0.0 && w_cdf == 0.0;
  }
};

// The inner integrands carry phi(a_z) e^{-z} or phi(a_z), normal shapes in z
// centred at x -/+ 2 lambda^2 with scale 2 lambda.
std::vector<double> peak_breakpoints(double x, double lam) {
  const double s = 2.0 * lam;
  const double lo = x - 2.0 * lam * lam;
  const double hi = x + 2.0 * lam * lam;
  return {lo - 12.0 * s, lo, hi, hi + 12.0 * s};
}

// Inner z-integrals over [y, inf), all with a_z = lambda + (x - z) / (2 lambda).
class Kernels {
 public:
  Kernels(const Point& pt, KernelMethod method, double tol, int budget)
      : x_(pt.x), y_(pt.y), lam_(pt.lam), ap_(pt.ap), method_(method), budget_(budget) {
    // Integrals carry an e^{-y} scale; keep the tolerance relative to it.
    tol_ = tol * std::max(1.0, std::exp(-y_));
  }

  // int Phi(a_z) e^{-z} z^2 dz
  double k1() {
    if (method_ == KernelMethod::quadrature) {
      return quad([&](double z) { return cdf_az(z) * std::exp(-z) * z * z; });
    }
    const Moments mo = moments(x_ - 2.0 * lam_ * lam_);
    const double y = y_;
    return std::exp(-y) * (y * y + 2.0 * y + 2.0) * std_normal_cdf(ap_) -
           std::exp(-x_) / (2.0 * lam_) * (mo.m2 + 2.0 * mo.m1 + 2.0 * mo.m0);
  }

  // e^{-x} int Phi(a_z) z^2 dz
  double k1_exp_x() {
    if (method_ == KernelMethod::quadrature) {
      return std::exp(-x_) * quad([&](double z) { return cdf_az(z) * z * z; });
    }
    // Integrate by parts; phi(a_z) is a normal density in z centred at x + 2 lambda^2.
    const double nu = x_ + 2.0 * lam_ * lam_;
    const double sigma = 2.0 * lam_;
    const double t0 = (y_ - nu) / sigma;
    const double tail = std_normal_complement(t0);
    const double dens = std_normal_pdf(t0);
    const double t2 = tail + t0 * dens;
    const double t3 = (t0 * t0 + 2.0) * dens;
    const double third = sigma * (nu * nu * nu * tail + 3.0 * nu * nu * sigma * dens +
                                  3.0 * nu * sigma * sigma * t2 + sigma * sigma * sigma * t3);
    const double y3 = y_ * y_ * y_;
    return std::exp(-x_) * (-std_normal_cdf(ap_) * y3 / 3.0 + third / (6.0 * lam_));
  }

  // int phi(a_z) e^{-z} (x + z) dz
  double k2() {
    if (method_ == KernelMethod::quadrature) {
      return quad([&](double z) { return pdf_az(z) * std::exp(-z) * (x_ + z); });
    }
    const Moments mo = moments(x_ - 2.0 * lam_ * lam_);
    return std::exp(-x_) * (x_ * mo.m0 + mo.m1);
  }

  // int phi(a_z) ((x - z) / (2 lambda^2) - 1) e^{-z} dz, which is -G_lambda.
  double k_lambda() {
    if (method_ == KernelMethod::quadrature) {
      return quad([&](double z) { return pdf_az(z) * ((x_ - z) / (2.0 * lam_ * lam_) - 1.0) * std::exp(-z); });
    }
    return -2.0 * std::exp(-x_) * std_normal_pdf(lam_ + (y_ - x_) / (2.0 * lam_));
  }

  // e^{-x} int phi(a_z) ((x - z) / (2 lambda^2) - 1) dz
  double k_lambda_exp_x() {
    if (method_ == KernelMethod::quadrature) {
      return std::exp(-x_) * quad([&](double z) { return pdf_az(z) * ((x_ - z) / (2.0 * lam_ * lam_) - 1.0); });
    }
    return -std::exp(-x_) * (2.0 * std_normal_pdf(ap_) + 4.0 * lam_ * std_normal_cdf(ap_));
  }

  [[nodiscard]] bool converged() const { return converged_; }
  [[nodiscard]] double worst_error() const { return worst_; }

 private:
  struct Moments {
    double m0, m1, m2;
  };

  // int_y^inf phi((z - mu) / sigma) z^j dz for j = 0, 1, 2 with sigma = 2 lambda.
  [[nodiscard]] Moments moments(double mu) const {
    const double sigma = 2.0 * lam_;
    const double t0 = (y_ - mu) / sigma;
    const double tail = std_normal_complement(t0);
    const double dens = std_normal_pdf(t0);
    return {sigma * tail, sigma * (mu * tail + sigma * dens),
            sigma * ((mu * mu + sigma * sigma) * tail + sigma * (mu + y_) * dens)};
  }

  [[nodiscard]] double az(double z) const { return lam_ + (x_ - z) / (2.0 * lam_); }
  [[nodiscard]] double cdf_az(double z) const { return std_normal_cdf(az(z)); }
  [[nodiscard]] double pdf_az(double z) const { return std_normal_pdf(az(z)); }

  template <class F>
  double quad(F&& f) {
    const Integral r = integrate_semi_infinite(f, y_, tol_, budget_, peak_breakpoints(x_, lam_));
    converged_ = converged_ && r.converged;
    worst_ = std::max(worst_, r.abs_error);
    return r.value;
  }

  double x_, y_, lam_, ap_;
  KernelMethod method_;
  int budget_;
  double tol_ = 0.0;
  bool converged_ = true;
  double worst_ = 0.0;
};

Integral integrate_term(HrParam p, const QuadratureConfig& q, const BiasOptions& opt, int which) {
  const double lam = p.lambda();
  const bool printed = opt.form == IntegralForm::as_printed;
  bool inner_ok = true;
  auto integrand = [&](double x, double y) -> double {
    const Point pt(x, y, lam);
    if (pt.null) return 0.0;
    Kernels kern(pt, opt.kernels, q.abs_tol / 10.0, q.max_refinements);
    const double d = y - x;
    const double ex = std::exp(-x);
    const double poly = 0.5 * ex * (x * x + 2.0 * x + 2.0);
    double v = 0.0;
    switch (which) {
      case 1: {
        double bracket = 0.5 * kern.k1() + poly - 0.5 * x * x + lam * lam - 0.5 * lam * kern.k2();
        if (!printed) bracket -= 0.5 * lam * (x + y) * pt.a;
        v = pt.w_phi * bracket;
        break;
      }
      case 2: {
        const double quad_term = d * d / (4.0 * lam * lam * lam);
        const double bracket = printed ? quad_term - lam + 1.0 / lam - kern.k_lambda_exp_x()
                                       : -quad_term + lam + 1.0 / lam - kern.k_lambda();
        v = pt.w_phi * bracket;
        break;
      }
      case 3: {
        const double z2 = opt.third == ThirdKernel::exp_neg_x ? kern.k1_exp_x() : kern.k1();
        v = pt.w_cdf * (0.5 * z2 - 0.5 * lam * kern.k2() + poly - x * x) +
            pt.w_mix * lam * (x + y);
        break;
      }
      case 4: {
        const double kl = printed ? kern.k_lambda_exp_x() : kern.k_lambda();
        v = pt.w_mix * (d / (lam * lam) - 2.0) - pt.w_cdf * kl;
        break;
      }
      default:
        break;
    }
    inner_ok = inner_ok && kern.converged();
    return v;
  };
  Integral r = integrate_box(integrand, q);
  r.converged = r.converged && inner_ok;
  return r;
}

BiasTerms compute_terms(HrParam p, const QuadratureConfig& q, const BiasOptions& opt, bool want_l1,
                        bool want_l2) {
  BiasTerms t;
  double* slots[4] = {&t.j1, &t.j2, &t.j3, &t.j4};
  for (int which = 1; which <= 4; ++which) {
    const bool l1_term = which == 1 || which == 3;
    if ((l1_term && !want_l1) || (!l1_term && !want_l2)) continue;
    const Integral r = integrate_term(p, q, opt, which);
    *slots[which - 1] = r.value;
    t.abs_error = std::max(t.abs_error, r.abs_error);
    if (!r.converged && t.converged) {
      t.converged = false;
      t.failed_term = which;
    }
  }
  return t;
}

}  // namespace

LimitPair limits_of_scheme(const BlockScheme& s) {
  const double sqrt_k = std::sqrt(static_cast<double>(s.k));
  // On the rho_m path lambda_m equals lambda algebraically; recomputing it
  // from rho_m near 1 would only add rounding noise.
  const bool on_path = s.rho_m == rho_on_path(s.b_m, s.lambda);
  const double drift = on_path ? 0.0 : s.lambda - s.lambda_m();
  return {sqrt_k / (s.b_m * s.b_m), sqrt_k * drift};
}

BiasTerms bias_terms(HrParam p, const QuadratureConfig& q, const BiasOptions& opt) {
  return compute_terms(p, q, opt, true, true);
}

double bias_A(HrParam p, LimitPair limits, const QuadratureConfig& q, const BiasOptions& opt) {
  if (!std::isfinite(limits.l1) || !std::isfinite(limits.l2) || limits.l1 < 0.0) {
    throw InputError("bias_A: limits must be finite with l1 >= 0");
  }
  const BiasTerms t = compute_terms(p, q, opt, limits.l1 != 0.0, limits.l2 != 0.0);
  if (!t.converged) {
    throw NumericError("bias_A: integral J" + std::to_string(t.failed_term) +
                           " did not reach tolerance",
                       t.abs_error);
  }
  return limits.l1 * (t.j1 + t.j3) + limits.l2 * (t.j2 + t.j4);
}

Integral bias_l1_direct(HrParam p, const QuadratureConfig& q) {
  const double lam = p.lambda();
  bool inner_ok = true;
  auto integrand = [&](double x, double y) -> double {
    const Point pt(x, y, lam);
    if (pt.null) return 0.0;
    const double ex = std::exp(-x);
    const double ey = std::exp(-y);
    const double tol = q.abs_tol / 10.0 * std::max(1.0, ey);
    auto az = [&](double z) { return lam + (x - z) / (2.0 * lam); };
    const Integral d_int = integrate_semi_infinite(
        [&](double z) {
          const double a = az(z);
          return (std_normal_pdf(a) * lam * (x + z) / 2.0 - std_normal_cdf(a) * z * z / 2.0) *
                 std::exp(-z);
        },
        y, tol, q.max_refinements, peak_breakpoints(x, lam));
    const Integral dx_int = integrate_semi_infinite(
        [&](double z) {
          const double a = az(z);
          const double f = std_normal_pdf(a);
          return (-a * f * (x + z) / 4.0 + f * lam / 2.0 - f * z * z / (4.0 * lam)) * std::exp(-z);
        },
        y, tol, q.max_refinements, peak_breakpoints(x, lam));
    inner_ok = inner_ok && d_int.converged && dx_int.converged;

    const double a = pt.a;
    const double ap = pt.ap;
    const double big_d = -0.5 * ex * (x * x + 2.0 * x + 2.0) + d_int.value;
    const double d_x = 0.5 * ex * x * x + dx_int.value;
    const double d_y = -(std_normal_pdf(ap) * lam * (x + y) / 2.0 - std_normal_cdf(ap) * y * y / 2.0) * ey;
    const double d_xy = -ey * (-ap * std_normal_pdf(ap) * (x + y) / 4.0 + std_normal_pdf(ap) * lam / 2.0 -
                               std_normal_pdf(ap) * y * y / (4.0 * lam));
    const double g_x = -ex * std_normal_cdf(a);
    const double g_y = -ey * std_normal_cdf(ap);
    const double big_q = g_x * g_y + ex * std_normal_pdf(a) / (2.0 * lam);
    const double h = std::exp(pt.log_h);
    return pt.score * h * (-big_d * big_q + d_x * g_y + g_x * d_y - d_xy);
  };
  Integral r = integrate_box(integrand, q);
  r.converged = r.converged && inner_ok;
  return r;
}

OracleSequence bias_A_oracle(HrParam p, double c, const std::vector<std::int64_t>& ms,
                             const QuadratureConfig& q) {
  OracleSequence out;
  for (std::int64_t m : ms) {
    const BlockScheme s = make_scheme(m, p, c);
    const double e =
        finite_m_expectation([&](double x, double y) { return hr_score(x, y, p); }, s, q);
    out.m.push_back(m);
    out.b_m.push_back(s.b_m);
    out.values.push_back(std::sqrt(static_cast<double>(s.k)) * e);
    out.per_unit_l1.push_back(s.b_m * s.b_m * e);
  }
  if (!out.values.empty()) out.final_value = out.values.back();
  return out;
}

double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.empty()) {
    throw InputError("extrapolate_to_zero: need matching, non-empty inputs");
  }
  std::vector<double> p = values;
  const std::size_t n = p.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      const double x0 = eps[i];
      const double x1 = eps[i + level];
      p[i] = (x1 * p[i] - x0 * p[i + 1]) / (x1 - x0);
    }
  }
  return p[0];
}

AsymptoticPrediction predict(HrParam p, LimitPair limits, const QuadratureConfig& q,
                             const BiasOptions& opt) {
  const double info = fisher_information(p, q);
  const double a = bias_A(p, limits, q, opt);
  return {a / info, 1.0 / info, p.lambda(), limits};
}

}  // namespace hrbm
