#include "hrbm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

constexpr int kScanPoints = 48;
constexpr int kSeeds = 5;
constexpr int kMaxNewton = 200;

struct Cell {
  double t_lo, t_hi;  // log-lambda endpoints, score(t_lo) > 0 >= score(t_hi)
  double best_ll;
};

// Newton on g(t) = lambda * score(lambda), t = log(lambda), kept inside the
// sign-change cell; falls back to bisection whenever a step leaves it.
MleResult refine(std::span<const Pair> pairs, Cell c) {
  double lo = c.t_lo;
  double hi = c.t_hi;
  double t = 0.5 * (lo + hi);
  MleResult r;
  const double k = static_cast<double>(pairs.size());
  for (int it = 1; it <= kMaxNewton; ++it) {
    const double lam = std::exp(t);
    const LikelihoodDerivs d = likelihood_derivs(pairs, HrParam(lam));
    r.iterations = it;
    r.lambda_hat = lam;
    r.log_lik = d.log_lik;
    r.score_at_opt = d.score;
    r.curvature_at_opt = d.curvature;
    if (d.score > 0.0) lo = t; else hi = t;
    if (std::abs(d.score) <= 1e-12 * k) break;
    const double g = lam * d.score;
    const double g_t = lam * d.score + lam * lam * d.curvature;
    double next = g_t < 0.0 ? t - g / g_t : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) break;
    t = next;
  }
  r.converged = std::abs(r.score_at_opt) <= 1e-8 * k && r.curvature_at_opt < 0.0;
  r.status = r.converged ? MleStatus::converged : MleStatus::not_converged;
  return r;
}

}  // namespace

const char* to_string(MleStatus s) noexcept {
  switch (s) {
    case MleStatus::converged: return "converged";
    case MleStatus::no_interior_maximum: return "no_interior_maximum";
    case MleStatus::not_converged: return "not_converged";
  }
  return "unknown";
}

double log_likelihood(std::span<const Pair> pairs, HrParam p) {
  double sum = 0.0;
  for (const Pair& q : pairs) sum += hr_log_density(q.x, q.y, p);
  return sum;
}

double log_likelihood(const MaximaSample& s, HrParam p) { return log_likelihood(s.pairs, p); }

LikelihoodDerivs likelihood_derivs(std::span<const Pair> pairs, HrParam p) {
  LikelihoodDerivs d{0.0, 0.0, 0.0};
  for (const Pair& q : pairs) {
    const HrPointTerms t = hr_point_terms(q.x, q.y, p);
    d.log_lik += t.log_density;
    d.score += t.score;
    d.curvature += t.curvature;
  }
  return d;
}

MleResult mle(std::span<const Pair> pairs, Bracket search) {
  if (pairs.size() < 2) throw InputError("mle: need at least 2 pairs");
  if (!(search.lo > 0.0 && search.lo < search.hi && std::isfinite(search.hi))) {
    throw InputError("mle: bracket must satisfy 0 < lo < hi < inf");
  }
  const double t0 = std::log(search.lo);
  const double t1 = std::log(search.hi);
  std::vector<double> ts(kScanPoints + 1);
  std::vector<LikelihoodDerivs> ds(kScanPoints + 1);
  for (int i = 0; i <= kScanPoints; ++i) {
    ts[i] = t0 + (t1 - t0) * i / kScanPoints;
    ds[i] = likelihood_derivs(pairs, HrParam(std::exp(ts[i])));
  }
  std::vector<Cell> cells;
  for (int i = 0; i < kScanPoints; ++i) {
    if (ds[i].score > 0.0 && ds[i + 1].score <= 0.0) {
      cells.push_back({ts[i], ts[i + 1], std::max(ds[i].log_lik, ds[i + 1].log_lik)});
    }
  }
  if (cells.empty()) {
    const bool top = ds.back().log_lik > ds.front().log_lik;
    const auto& d = top ? ds.back() : ds.front();
    MleResult r;
    r.lambda_hat = top ? search.hi : search.lo;
    r.log_lik = d.log_lik;
    r.score_at_opt = d.score;
    r.curvature_at_opt = d.curvature;
    r.status = MleStatus::no_interior_maximum;
    return r;
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.best_ll > b.best_ll; });
  if (cells.size() > kSeeds) cells.resize(kSeeds);
  MleResult best;
  bool have = false;
  for (const Cell& c : cells) {
    const MleResult r = refine(pairs, c);
    if (!have || r.log_lik > best.log_lik) {
      best = r;
      have = true;
    }
  }
  return best;
}

MleResult mle(const MaximaSample& s, Bracket search) { return mle(s.pairs, search); }

double score_statistic(std::span<const Pair> pairs, HrParam p) {
  if (pairs.empty()) throw InputError("score_statistic: empty sample");
  double sum = 0.0;
  for (const Pair& q : pairs) sum += hr_score(q.x, q.y, p);
  return sum / std::sqrt(static_cast<double>(pairs.size()));
}

double score_statistic(const MaximaSample& s, HrParam p) { return score_statistic(s.pairs, p); }

}  // namespace hrbm
