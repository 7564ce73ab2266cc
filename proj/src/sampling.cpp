#include "hrbm/sampling.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// 53 random bits mapped to the open interval (0, 1).
double open_uniform(std::uint64_t w) noexcept {
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

PairStream::PairStream(std::uint64_t seed, std::uint64_t rep_index, double rho)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      rep_lo_(static_cast<std::uint32_t>(rep_index)),
      rep_hi_(static_cast<std::uint32_t>(rep_index >> 32)),
      rho_(rho),
      sd_(std::sqrt((1.0 - rho) * (1.0 + rho))) {
  if (!(std::abs(rho) < 1.0)) throw InputError("PairStream: |rho| must be < 1");
}

Pair PairStream::operator()(std::uint64_t i) const noexcept {
  const auto r = philox4x32(
      {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32), rep_lo_, rep_hi_}, key_);
  const std::uint64_t w0 = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  const std::uint64_t w1 = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
  const double z0 = gsl_cdf_ugaussian_Pinv(open_uniform(w0));
  const double z1 = gsl_cdf_ugaussian_Pinv(open_uniform(w1));
  return {z0, rho_ * z0 + sd_ * z1};
}

MaximaSample sample_block_maxima(const BlockScheme& scheme, std::uint64_t seed,
                                 std::uint64_t rep_index) {
  const PairStream stream(seed, rep_index, scheme.rho_m);
  MaximaSample out{scheme, {}, seed, rep_index};
  out.pairs.reserve(static_cast<std::size_t>(scheme.k));
  const auto m = static_cast<std::uint64_t>(scheme.m);
  std::uint64_t i = 0;
  for (std::int64_t block = 0; block < scheme.k; ++block) {
    double mx = -std::numeric_limits<double>::infinity();
    double my = mx;
    for (std::uint64_t j = 0; j < m; ++j, ++i) {
      const Pair p = stream(i);
      mx = std::max(mx, p.x);
      my = std::max(my, p.y);
    }
    out.pairs.push_back({scale_maximum(mx, scheme.b_m), scale_maximum(my, scheme.b_m)});
  }
  return out;
}

std::vector<Pair> raw_standard_pairs(const BlockScheme& scheme, std::uint64_t seed,
                                     std::uint64_t rep_index) {
  const PairStream stream(seed, rep_index, scheme.rho_m);
  const auto n = static_cast<std::uint64_t>(scheme.m * scheme.k);
  std::vector<Pair> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(stream(i));
  return out;
}

std::vector<Pair> block_maxima_from_raw(std::span<const Pair> raw, std::int64_t m, double b_m) {
  if (m < 1) throw InputError("block size must be positive");
  const std::size_t blocks = raw.size() / static_cast<std::size_t>(m);
  std::vector<Pair> out;
  out.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double mx = -std::numeric_limits<double>::infinity();
    double my = mx;
    for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
      const Pair& p = raw[b * static_cast<std::size_t>(m) + j];
      mx = std::max(mx, p.x);
      my = std::max(my, p.y);
    }
    out.push_back({scale_maximum(mx, b_m), scale_maximum(my, b_m)});
  }
  return out;
}

CdfCheckReport empirical_maxima_cdf_check(const BlockScheme& scheme,
                                          std::span<const MaximaSample> samples,
                                          std::vector<Pair> probes) {
  if (probes.empty()) {
    for (double x : {-1.0, 0.0, 1.0, 2.5}) {
      for (double y : {-1.0, 0.0, 1.0, 2.5}) probes.push_back({x, y});
    }
  }
  CdfCheckReport rep;
  for (const auto& s : samples) rep.pooled += s.pairs.size();
  if (rep.pooled < 10000) throw InputError("empirical_maxima_cdf_check: need >= 1e4 pooled pairs");
  const double n = static_cast<double>(rep.pooled);
  for (const Pair& pr : probes) {
    std::size_t hits = 0;
    for (const auto& s : samples) {
      for (const Pair& p : s.pairs) hits += (p.x <= pr.x && p.y <= pr.y) ? 1 : 0;
    }
    const double exact = std::exp(finite_m_log_cdf(pr.x, pr.y, scheme));
    const double emp = static_cast<double>(hits) / n;
    const double se = std::sqrt(exact * (1.0 - exact) / n);
    const double dev = std::abs(emp - exact);
    rep.probes.push_back({pr.x, pr.y, emp, exact, se});
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
    if (se > 0.0) rep.max_z = std::max(rep.max_z, dev / se);
  }
  return rep;
}

}  // namespace hrbm
