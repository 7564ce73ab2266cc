#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/owens_t.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "hrbm/errors.hpp"
#include "hrbm/gaussian.hpp"

using namespace hrbm;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

double big_complement(double t) {
  return static_cast<double>(boost::math::erfc(big(t) / boost::multiprecision::sqrt(big(2))) / 2);
}

double big_log_cdf(double t) {
  return static_cast<double>(boost::multiprecision::log(boost::math::erfc(-big(t) / boost::multiprecision::sqrt(big(2))) / 2));
}

// Owen (1956): Phi_2(h, k; rho) through two T-function terms.
double owen_bvn(double h, double k, double rho) {
  const double s = std::sqrt(1.0 - rho * rho);
  const double phi_h = 0.5 * std::erfc(-h / std::numbers::sqrt2);
  const double phi_k = 0.5 * std::erfc(-k / std::numbers::sqrt2);
  const double beta = (h * k < 0.0 || (h * k == 0.0 && h + k < 0.0)) ? 0.5 : 0.0;
  return 0.5 * (phi_h + phi_k) - boost::math::owens_t(h, (k - rho * h) / (h * s)) -
         boost::math::owens_t(k, (h - rho * k) / (k * s)) - beta;
}

// Independent bisection for b = m phi(b) in long double.
long double bisect_bm(long double m) {
  long double lo = 1e-6L, hi = 20.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    const long double f = m * std::exp(-0.5L * mid * mid) / std::sqrt(2.0L * std::numbers::pi_v<long double>) - mid;
    (f > 0 ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

}  // namespace

TEST_CASE("normal density") {
  CHECK(std_normal_pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  for (double t : {0.3, 1.7, 5.0, 12.0}) CHECK(std_normal_pdf(t) == std_normal_pdf(-t));
  const long double t = 3.127L;
  const auto oracle = static_cast<double>(std::exp(-t * t / 2) / std::sqrt(2 * std::numbers::pi_v<long double>));
  CHECK(std_normal_pdf(3.127) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(std_normal_pdf(3.127) == doctest::Approx(0.002995).epsilon(1e-3));
  CHECK(std::exp(std_normal_log_pdf(1.3)) == doctest::Approx(std_normal_pdf(1.3)).epsilon(1e-15));
}

TEST_CASE("normal CDF limits and symmetry") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std_normal_cdf(INFINITY) == 1.0);
  CHECK(std_normal_cdf(-INFINITY) == 0.0);
  CHECK(std_normal_complement(INFINITY) == 0.0);
}

TEST_CASE("complement satisfies the tail sandwich at 10") {
  const double t = 10.0;
  const double upper = std_normal_pdf(t) / t;
  const double lower = upper * (1.0 - 1.0 / (t * t));
  CHECK(std_normal_complement(t) > lower);
  CHECK(std_normal_complement(t) < upper);
}

TEST_CASE("complement has full relative accuracy into the tail") {
  // Above t = 37.5 the value is subnormal in double and cannot carry 13 digits.
  for (double t = -8.0; t <= 37.0; t += 0.25) {
    const double want = big_complement(t);
    CHECK(std::abs(std_normal_complement(t) - want) <= 1e-13 * want);
  }
}

TEST_CASE("complement plus CDF is one") {
  for (double t = -8.0; t <= 8.0; t += 0.01) {
    CHECK(std::abs(std_normal_complement(t) + std_normal_cdf(t) - 1.0) <= 1e-15);
  }
}

TEST_CASE("CDF derivative matches density") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    const double t = u(rng);
    const double h = 1e-5;
    const double fd = (std_normal_cdf(t + h) - std_normal_cdf(t - h)) / (2 * h);
    CHECK(std::abs(fd - std_normal_pdf(t)) <= 1e-8);
  }
}

TEST_CASE("log CDF is accurate across the line") {
  for (double t = -80.0; t <= 12.0; t += 0.37) {
    const double want = big_log_cdf(t);
    CHECK(std::abs(std_normal_log_cdf(t) - want) <= 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("bivariate CDF special cases") {
  CHECK(bivariate_normal_cdf(0.7, INFINITY, 0.4) == doctest::Approx(std_normal_cdf(0.7)).epsilon(1e-15));
  CHECK(bivariate_normal_cdf(-1.1, 0.3, 0.0) ==
        doctest::Approx(std_normal_cdf(-1.1) * std_normal_cdf(0.3)).epsilon(1e-15));
  for (double rho : {-0.9, -0.3, 0.2, 0.6, 0.95, 0.9999}) {
    const double exact = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
    CHECK(std::abs(bivariate_normal_cdf(0, 0, rho) - exact) <= 1e-13);
  }
  CHECK_THROWS_AS((void)bivariate_normal_cdf(0, 0, 1.0), InputError);
  CHECK_THROWS_AS((void)bivariate_normal_cdf(0, 0, -1.0), InputError);
}

TEST_CASE("bivariate CDF agrees with Owen's T representation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> r(-0.9999, 0.9999);
  double worst = 0.0;
  for (int i = 0; i < 3000; ++i) {
    const double x = u(rng), y = u(rng);
    const double rho = i % 3 == 0 ? 0.9 + 0.0999 * std::abs(r(rng)) : r(rng);
    worst = std::max(worst, std::abs(bivariate_normal_cdf(x, y, rho) - owen_bvn(x, y, rho)));
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("bivariate CDF is exactly symmetric") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  std::uniform_real_distribution<double> r(-0.999, 0.999);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng), rho = r(rng);
    CHECK(bivariate_normal_cdf(x, y, rho) == bivariate_normal_cdf(y, x, rho));
  }
}

TEST_CASE("bivariate CDF mixed derivative factorizes") {
  const double h = 1e-3;
  for (double rho : {-0.5, 0.3, 0.95}) {
    for (auto [x, y] : {std::pair{0.2, -0.4}, {1.5, 1.1}, {-1.0, 0.8}}) {
      const double fd = (bivariate_normal_cdf(x + h, y + h, rho) - bivariate_normal_cdf(x + h, y - h, rho) -
                         bivariate_normal_cdf(x - h, y + h, rho) + bivariate_normal_cdf(x - h, y - h, rho)) /
                        (4 * h * h);
      const double s = std::sqrt(1 - rho * rho);
      const double density = std_normal_pdf((x - rho * y) / s) * std_normal_pdf(y) / s;
      CHECK(fd == doctest::Approx(density).epsilon(1e-5));
    }
  }
}

TEST_CASE("bivariate CDF at the origin against antithetic Monte Carlo") {
  const double rho = 0.95;
  const double s = std::sqrt(1 - rho * rho);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  const long n = 50'000'000;  // pairs of antithetic draws: 1e8 points
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double a = z(rng), b = rho * a + s * z(rng);
    const double v = 0.5 * ((a <= 0 && b <= 0) + (a >= 0 && b >= 0));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(bivariate_normal_cdf(0, 0, rho) - mean) <= 3 * se);
}

TEST_CASE("log of the bivariate CDF near one") {
  const double rho = 0.97;
  for (double u : {4.0, 6.0, 8.0, 10.0}) {
    const double miss = std_normal_complement(u) + std_normal_complement(u + 0.5) -
                        bivariate_normal_upper(u, u + 0.5, rho);
    CHECK(bivariate_normal_log_cdf(u, u + 0.5, rho) == doctest::Approx(std::log1p(-miss)).epsilon(1e-14));
    CHECK(bivariate_normal_log_cdf(u, u + 0.5, rho) < 0.0);
  }
  CHECK(std::exp(bivariate_normal_log_cdf(-0.3, 0.4, 0.5)) ==
        doctest::Approx(bivariate_normal_cdf(-0.3, 0.4, 0.5)).epsilon(1e-14));
}

TEST_CASE("norming constant") {
  const double m_one = 1.0 / std_normal_pdf(1.0);  // 4.13273...
  CHECK(m_one == doctest::Approx(4.13273).epsilon(1e-6));
  CHECK(solve_bm(m_one).b_m == doctest::Approx(1.0).epsilon(1e-13));

  CHECK(solve_bm(1044).b_m == doctest::Approx(static_cast<double>(bisect_bm(1044.0L))).epsilon(1e-13));
  CHECK(solve_bm(1044).b_m == doctest::Approx(3.127).epsilon(1e-3));

  double prev = 0.0;
  for (double m : {2.0, 5.0, 10.0, 100.0, 1044.0, 1e4, 1e6, 1e9, 1e15}) {
    const double b = solve_bm(m).b_m;
    CHECK(b > prev);
    if (m >= 5) CHECK(b > 1.0);
    prev = b;
  }
  for (double m = 10; m <= 1e7; m *= 10) {
    const double b = solve_bm(m).b_m;
    CHECK(std::abs(b - m * std_normal_pdf(b)) <= 1e-12 * b);
    const double lm = std::log(m);
    CHECK(b * b > 2 * lm - 3 * std::log(lm) - 3);
    CHECK(b * b < 2 * lm);
  }
  CHECK_THROWS_AS((void)solve_bm(1.5), InputError);
  CHECK_THROWS_AS((void)solve_bm(NAN), InputError);
}
