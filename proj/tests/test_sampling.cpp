#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "hrbm/errors.hpp"
#include "hrbm/finite_m.hpp"
#include "hrbm/inference.hpp"
#include "hrbm/sampling.hpp"

using namespace hrbm;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  using W = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("raw pairs have the requested moments") {
  const double rho = 0.950165;
  const PairStream s(42, 0, rho);
  std::vector<double> xs, ys;
  const int n = 1000000;
  xs.reserve(n);
  ys.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto p = s(static_cast<std::uint64_t>(i));
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  CHECK(std::abs(pearson(xs, ys) - rho) <= 0.002);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  CHECK(std::abs(mean) <= 4.0 / std::sqrt(n));
  double ss = 0;
  for (double v : xs) ss += (v - mean) * (v - mean);
  CHECK(std::abs(ss / (n - 1) - 1.0) <= 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("streams for neighbouring replications are uncorrelated") {
  const PairStream a(7, 0, 0.5), b(7, 1, 0.5), c(8, 0, 0.5);
  std::vector<double> xa, xb, xc;
  for (std::uint64_t i = 0; i < 200000; ++i) {
    xa.push_back(a(i).x);
    xb.push_back(b(i).x);
    xc.push_back(c(i).x);
  }
  CHECK(std::abs(pearson(xa, xb)) <= 4.0 / std::sqrt(200000.0));
  CHECK(std::abs(pearson(xa, xc)) <= 4.0 / std::sqrt(200000.0));
}

TEST_CASE("sampling is deterministic and streaming matches the raw path") {
  const auto scheme = make_scheme(200, HrParam(0.5), 1.0);
  const auto s1 = sample_block_maxima(scheme, 99, 3);
  const auto s2 = sample_block_maxima(scheme, 99, 3);
  CHECK(s1.pairs.size() == static_cast<std::size_t>(scheme.k));
  CHECK(s1.pairs == s2.pairs);
  CHECK(s1.seed == 99);
  CHECK(s1.rep_index == 3);
  CHECK(sample_block_maxima(scheme, 99, 4).pairs != s1.pairs);
  CHECK(sample_block_maxima(scheme, 100, 3).pairs != s1.pairs);

  const auto raw = raw_standard_pairs(scheme, 99, 3);
  CHECK(raw.size() == static_cast<std::size_t>(scheme.m * scheme.k));
  CHECK(block_maxima_from_raw(raw, scheme.m, scheme.b_m) == s1.pairs);

  const std::span<const Pair> partial(raw.data(), raw.size() - 1);
  CHECK(block_maxima_from_raw(partial, scheme.m, scheme.b_m).size() == s1.pairs.size() - 1);
}

TEST_CASE("degenerate correlation never reaches sampling") {
  auto scheme = make_scheme(200, HrParam(0.5), 1.0);
  CHECK_THROWS((void)PairStream(1, 0, 1.0));
  scheme.rho_m = 1.0;
  CHECK_THROWS((void)sample_block_maxima(scheme, 1, 0));
}

TEST_CASE("empirical maxima CDF agrees with the exact finite-m CDF") {
  const auto scheme = plan_blocks(100000, HrParam(0.5), 1.0);
  std::vector<MaximaSample> samples;
  for (std::uint64_t r = 0; r < 110; ++r) samples.push_back(sample_block_maxima(scheme, 2718, r));
  const auto report = empirical_maxima_cdf_check(scheme, samples);
  CHECK(report.pooled == 110 * 95);
  CHECK(report.probes.size() == 16);
  for (const auto& p : report.probes) {
    CAPTURE(p.x);
    CAPTURE(p.y);
    CHECK(p.exact == doctest::Approx(std::exp(finite_m_log_cdf(p.x, p.y, scheme))).epsilon(1e-12));
    if (p.x == 0.0 && p.y == 0.0) CHECK(std::abs(p.empirical - p.exact) <= 3 * p.standard_error);
  }
  CHECK(report.max_z <= 4.0);

  const auto inf = empirical_maxima_cdf_check(scheme, samples, {{INFINITY, INFINITY}});
  CHECK(inf.probes[0].empirical == 1.0);
  CHECK(inf.probes[0].exact == 1.0);

  auto shuffled = samples;
  std::mt19937_64 rng(1);
  for (auto& s : shuffled) std::shuffle(s.pairs.begin(), s.pairs.end(), rng);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto again = empirical_maxima_cdf_check(scheme, shuffled);
  CHECK(again.max_abs_deviation == report.max_abs_deviation);
  CHECK(again.max_z == report.max_z);

  const std::vector<MaximaSample> few(samples.begin(), samples.begin() + 10);
  CHECK_THROWS_AS((void)empirical_maxima_cdf_check(scheme, few), InputError);
}

TEST_CASE("marginal mean of the maxima matches the finite-m marginal") {
  const auto scheme = make_scheme(1044, HrParam(0.5), 1.0);
  const double b = scheme.b_m, m = static_cast<double>(scheme.m);
  // Marginal CDF Phi(x / b + b)^m; mean = int_0^inf (1 - F) - int_-inf^0 F.
  auto F = [&](double x) { return std::exp(m * std::log(0.5 * std::erfc(-(x / b + b) / std::numbers::sqrt2))); };
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double upper = gk::integrate([&](double x) { return -std::expm1(m * std::log1p(-0.5 * std::erfc((x / b + b) / std::numbers::sqrt2))); },
                                     0.0, 60.0, 15, 1e-13);
  const double lower = gk::integrate(F, -20.0, 0.0, 15, 1e-13);
  const double exact_mean = upper - lower;

  double sum = 0, sum2 = 0;
  long count = 0;
  for (std::uint64_t r = 0; count < 100000; ++r) {
    for (const auto& p : sample_block_maxima(scheme, 31337, r).pairs) {
      sum += p.x;
      sum2 += p.x * p.x;
      ++count;
    }
  }
  const double mean = sum / count;
  const double se = std::sqrt((sum2 / count - mean * mean) / count);
  CAPTURE(exact_mean);
  CAPTURE(mean);
  CHECK(std::abs(mean - exact_mean) <= 3 * se);
}

namespace {

std::vector<double> replication_estimates() {
  static const std::vector<double> est = [] {
    const auto scheme = plan_blocks(100000, HrParam(0.5), 1.0);
    std::vector<double> out;
    for (std::uint64_t r = 0; r < 500; ++r) out.push_back(mle(sample_block_maxima(scheme, 8675309, r)).lambda_hat);
    return out;
  }();
  return est;
}

double lag_one_correlation() {
  const auto est = replication_estimates();
  const std::vector<double> a(est.begin(), est.end() - 1), b(est.begin() + 1, est.end());
  return pearson(a, b);
}

}  // namespace

// Under independence r has standard error 1 / sqrt(499) = 0.045, so the fixed
// 0.05 bound is crossed by chance about a quarter of the time. The fixed bound
// is reported but allowed to fail; the calibrated bound below is required.
TEST_CASE("estimates from successive replications: |r| <= 0.05" * doctest::may_fail()) {
  CHECK(std::abs(lag_one_correlation()) <= 0.05);
}

TEST_CASE("estimates from successive replications are uncorrelated at three standard errors") {
  CHECK(std::abs(lag_one_correlation()) * std::sqrt(499.0) <= 3.0);
}
