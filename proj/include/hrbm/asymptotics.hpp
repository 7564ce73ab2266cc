#pragma once

#include <cstdint>
#include <vector>

#include "hrbm/finite_m.hpp"
#include "hrbm/hr_model.hpp"
#include "hrbm/quadrature.hpp"

namespace hrbm {

struct LimitPair {
  double l1;  // lim sqrt(k) / b_m^2
  double l2;  // lim sqrt(k) (lambda - lambda_m)
};

struct AsymptoticPrediction {
  double mean;      // I^{-1} A
  double variance;  // I^{-1}
  double lambda;
  LimitPair limits;
};

// Which version of the bias integrals to evaluate.
//  corrected:  first-order expansion of the finite-m density, term by term.
//  as_printed: an older form of the integrands, kept for comparison. It lacks
//              the a * lambda (x + y) / 2 term of the first integral and has
//              the sign of lambda - d^2 / (4 lambda^3) flipped in the second.
//              The second and fourth also carry e^{-x} outside the G_lambda
//              kernel instead of e^{-z} inside it.
enum class IntegralForm { corrected, as_printed };

// Weight inside the z^2 kernel of the third integral.
enum class ThirdKernel { exp_neg_z, exp_neg_x };

// Inner z-integrals by closed form (truncated Gaussian moments) or by
// semi-infinite adaptive quadrature.
enum class KernelMethod { closed_form, quadrature };

struct BiasOptions {
  IntegralForm form = IntegralForm::corrected;
  ThirdKernel third = ThirdKernel::exp_neg_z;
  KernelMethod kernels = KernelMethod::closed_form;
};

// The four integrals with their L-coefficients factored out:
// A = l1 (j1 + j3) + l2 (j2 + j4).
struct BiasTerms {
  double j1 = 0.0, j2 = 0.0, j3 = 0.0, j4 = 0.0;
  double abs_error = 0.0;
  bool converged = true;
  int failed_term = 0;  // 1..4 for the first integral that missed tolerance
};

[[nodiscard]] LimitPair limits_of_scheme(const BlockScheme& s);

[[nodiscard]] BiasTerms bias_terms(HrParam p, const QuadratureConfig& q = {},
                                   const BiasOptions& opt = {});
// Throws NumericError naming the sub-integral that missed tolerance.
[[nodiscard]] double bias_A(HrParam p, LimitPair limits, const QuadratureConfig& q = {},
                            const BiasOptions& opt = {});

// Direct first-order coefficient of sqrt(k) E_m[score] per unit l1, computed
// from d/d(1/b^2) of m (1 - Phi_rho) with plain numerical inner integrals.
// Independent of the term-by-term integrals; used as a cross-check.
[[nodiscard]] Integral bias_l1_direct(HrParam p, const QuadratureConfig& q = {});

struct OracleSequence {
  std::vector<std::int64_t> m;
  std::vector<double> b_m;
  std::vector<double> values;      // sqrt(k) E_m[score]
  std::vector<double> per_unit_l1; // b_m^2 E_m[score], the value per unit of sqrt(k)/b_m^2
  double final_value = 0.0;
};

// sqrt(k) E_m[score] along ascending m with k = floor(c b_m^4).
[[nodiscard]] OracleSequence bias_A_oracle(HrParam p, double c, const std::vector<std::int64_t>& ms,
                                           const QuadratureConfig& q = {});

// Polynomial extrapolation of values(eps) to eps = 0 (Neville), used with
// eps = 1 / b_m^2 on oracle sequences.
[[nodiscard]] double extrapolate_to_zero(const std::vector<double>& eps,
                                         const std::vector<double>& values);

[[nodiscard]] AsymptoticPrediction predict(HrParam p, LimitPair limits,
                                           const QuadratureConfig& q = {},
                                           const BiasOptions& opt = {});

}  // namespace hrbm
