#pragma once

#include <span>

#include "hrbm/hr_model.hpp"
#include "hrbm/sampling.hpp"

namespace hrbm {

enum class MleStatus { converged, no_interior_maximum, not_converged };

[[nodiscard]] const char* to_string(MleStatus s) noexcept;

struct MleResult {
  double lambda_hat = 0.0;
  double log_lik = 0.0;
  bool converged = false;
  int iterations = 0;
  double curvature_at_opt = 0.0;  // second derivative of the log-likelihood in lambda
  double score_at_opt = 0.0;      // summed score at lambda_hat
  MleStatus status = MleStatus::not_converged;
};

struct Bracket {
  double lo = 0.05;
  double hi = 10.0;
};

[[nodiscard]] double log_likelihood(std::span<const Pair> pairs, HrParam p);
[[nodiscard]] double log_likelihood(const MaximaSample& s, HrParam p);

// Summed score and curvature at lambda.
struct LikelihoodDerivs {
  double log_lik;
  double score;
  double curvature;
};
[[nodiscard]] LikelihoodDerivs likelihood_derivs(std::span<const Pair> pairs, HrParam p);

// Maximizes over log(lambda) inside the bracket. A scan of the bracket finds
// cells where the score changes sign from + to -; the five with the highest
// likelihood are refined by safeguarded Newton and the best is returned. No
// such cell means the likelihood peaks at an edge: status no_interior_maximum.
// Throws InputError for fewer than 2 pairs or an invalid bracket.
[[nodiscard]] MleResult mle(std::span<const Pair> pairs, Bracket search = {});
[[nodiscard]] MleResult mle(const MaximaSample& s, Bracket search = {});

// (1 / sqrt(k)) * sum of the per-pair score at the given lambda.
[[nodiscard]] double score_statistic(std::span<const Pair> pairs, HrParam p);
[[nodiscard]] double score_statistic(const MaximaSample& s, HrParam p);

}  // namespace hrbm
