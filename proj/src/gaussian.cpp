#include "hrbm/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Legendre half-rules (positive abscissae) on [-1, 1] for 6, 12 and 20 points.
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 3> kX6 = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                        0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 6> kX12 = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                        0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
constexpr std::array<double, 10> kW20 = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                         0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                         0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                         0.1527533871307259};
constexpr std::array<double, 10> kX20 = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                         0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                         0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                         0.07652652113349733};

template <std::size_t N>
double bvnu_body(double h, double k, double r, const std::array<double, N>& w,
                 const std::array<double, N>& x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < N; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (sgn * x[i] + 1.0) / 2.0);
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return bvn * asr / (2.0 * two_pi) + std_normal_complement(h) * std_normal_complement(k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * std_normal_complement(b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double t = a * (sgn * x[i] + 1.0);
        const double xs = t * t;
        const double rs = std::sqrt(1.0 - xs);
        const double asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          bvn += a * w[i] * std::exp(asr) *
                 (std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + std_normal_complement(std::max(h, k));
  bvn = -bvn;
  if (k > h) {
    if (h < 0.0) {
      bvn += std_normal_cdf(k) - std_normal_cdf(h);
    } else {
      bvn += std_normal_complement(h) - std_normal_complement(k);
    }
  }
  return bvn;
}

// Asymptotic series for log Phi(t), t << 0.
double log_cdf_lower_tail(double t) {
  const double z = 1.0 / (t * t);
  // 1 - z + 3z^2 - 15z^3 + 105z^4 - 945z^5 + 10395z^6
  const double series =
      1.0 + z * (-1.0 + z * (3.0 + z * (-15.0 + z * (105.0 + z * (-945.0 + z * 10395.0)))));
  return std_normal_log_pdf(t) - std::log(-t) + std::log(series);
}

// exp(-t^2/2) with t split so the square carries no rounding error.
double exp_neg_half_square(double t) {
  const double hi = std::trunc(t * 16.0) / 16.0;
  const double lo = t - hi;
  return std::exp(-0.5 * hi * hi) * std::exp(-lo * (hi + 0.5 * lo));
}

// Upper tail for t >= 8: phi(t) times the Mills ratio continued fraction,
// avoiding the t^2 * eps loss from rounding t / sqrt(2) inside erfc.
double upper_tail(double t) {
  if (t > 40.0) return 0.0;
  const int depth = 20 + static_cast<int>(3000.0 / (t * t));
  double frac = t;
  for (int j = depth; j >= 1; --j) frac = t + j / frac;
  return kInvSqrt2Pi * exp_neg_half_square(t) / frac;
}

}  // namespace

double std_normal_pdf(double t) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double std_normal_log_pdf(double t) noexcept { return -0.5 * t * t - kLogSqrt2Pi; }

double std_normal_cdf(double t) noexcept {
  if (t <= -8.0) return upper_tail(-t);
  return 0.5 * std::erfc(-t / std::numbers::sqrt2);
}

double std_normal_complement(double t) noexcept {
  if (t >= 8.0) return upper_tail(t);
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

double std_normal_log_cdf(double t) noexcept {
  if (t > -30.0) {
    if (t > 5.0) return std::log1p(-std_normal_complement(t));
    return std::log(std_normal_cdf(t));
  }
  return log_cdf_lower_tail(t);
}

double bivariate_normal_upper(double h, double k, double rho) {
  if (!(std::abs(rho) < 1.0)) throw InputError("bivariate normal: |rho| must be < 1");
  if (h == kInf || k == kInf) return 0.0;
  if (h == -kInf) return k == -kInf ? 1.0 : std_normal_complement(k);
  if (k == -kInf) return std_normal_complement(h);
  if (rho == 0.0) return std_normal_complement(h) * std_normal_complement(k);
  double v;
  const double ar = std::abs(rho);
  if (ar < 0.3) {
    v = bvnu_body(h, k, rho, kW6, kX6);
  } else if (ar < 0.75) {
    v = bvnu_body(h, k, rho, kW12, kX12);
  } else {
    v = bvnu_body(h, k, rho, kW20, kX20);
  }
  return std::clamp(v, 0.0, 1.0);
}

double bivariate_normal_cdf(double x, double y, double rho) {
  // The quadrature is not symmetric in its arguments to the last bit; sort
  // them so the function is exactly symmetric.
  if (y < x) std::swap(x, y);
  return bivariate_normal_upper(-x, -y, rho);
}

double bivariate_normal_log_cdf(double x, double y, double rho) {
  if (y < x) std::swap(x, y);
  // 1 - Phi_rho(x, y) = Q(x) + Q(y) - P(X > x, Y > y).
  const double miss =
      std_normal_complement(x) + std_normal_complement(y) - bivariate_normal_upper(x, y, rho);
  if (miss < 0.5) return std::log1p(-std::max(miss, 0.0));
  return std::log(bivariate_normal_upper(-x, -y, rho));
}

NormingConstant solve_bm(double m) {
  if (!(m >= 2.0) || !std::isfinite(m)) throw InputError("solve_bm: m must be finite and >= 2");
  // f(b) = log b + b^2/2 + log sqrt(2 pi) - log m is increasing with f' = 1/b + b.
  const double log_m = std::log(m);
  auto f = [&](double b) { return std::log(b) + 0.5 * b * b + kLogSqrt2Pi - log_m; };
  double lo = 1e-3;
  double hi = std::sqrt(2.0 * std::max(log_m, 1.0)) + 1.0;
  double b = log_m > 1.0 ? std::sqrt(2.0 * log_m) : 1.0;
  for (int it = 0; it < 200; ++it) {
    const double fb = f(b);
    if (fb > 0.0) hi = std::min(hi, b); else lo = std::max(lo, b);
    double next = b - fb / (1.0 / b + b);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - b) <= 4.0 * std::numeric_limits<double>::epsilon() * b) {
      return {m, next};
    }
    b = next;
  }
  throw NumericError("solve_bm: iteration cap reached", std::abs(f(b)));
}

}  // namespace hrbm
