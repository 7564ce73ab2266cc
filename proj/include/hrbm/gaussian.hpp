#pragma once

#include <cstdint>

namespace hrbm {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

struct NormingConstant {
  double m;    // block size; real-valued so the inverse relation can be probed
  double b_m;  // positive solution of b = m * phi(b)
};

[[nodiscard]] double std_normal_pdf(double t) noexcept;
[[nodiscard]] double std_normal_log_pdf(double t) noexcept;
[[nodiscard]] double std_normal_cdf(double t) noexcept;
// Upper tail 1 - Phi(t), relatively accurate far into the tail.
[[nodiscard]] double std_normal_complement(double t) noexcept;
// log Phi(t), finite for every finite t.
[[nodiscard]] double std_normal_log_cdf(double t) noexcept;

// P(X > h, Y > k) for a standard bivariate normal with correlation rho.
[[nodiscard]] double bivariate_normal_upper(double h, double k, double rho);
// P(X <= x, Y <= y). Throws InputError unless |rho| < 1.
[[nodiscard]] double bivariate_normal_cdf(double x, double y, double rho);
// log P(X <= x, Y <= y), keeping relative accuracy when the value is near 1.
[[nodiscard]] double bivariate_normal_log_cdf(double x, double y, double rho);

// Solves b = m * phi(b). The map b -> b / phi(b) is increasing on (0, inf),
// so the positive root is unique. Throws InputError for m <= 0.
[[nodiscard]] NormingConstant solve_bm(double m);

}  // namespace hrbm
