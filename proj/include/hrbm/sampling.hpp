#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hrbm/finite_m.hpp"

namespace hrbm {

struct Pair {
  double x;
  double y;
  friend bool operator==(const Pair&, const Pair&) = default;
};

// Philox4x32-10 block function (Salmon et al., counter-based generator).
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                      std::array<std::uint32_t, 2> key) noexcept;

// Standard bivariate normal pairs with correlation rho, addressed by index.
// The key is the master seed and the upper counter words hold the
// replication index, so every (seed, rep_index, i) maps to one fixed pair.
class PairStream {
 public:
  PairStream(std::uint64_t seed, std::uint64_t rep_index, double rho);
  [[nodiscard]] Pair operator()(std::uint64_t i) const noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t rep_lo_;
  std::uint32_t rep_hi_;
  double rho_;
  double sd_;
};

struct MaximaSample {
  BlockScheme scheme;
  std::vector<Pair> pairs;  // k scaled componentwise maxima
  std::uint64_t seed = 0;
  std::uint64_t rep_index = 0;
};

// b * max - b^2 applied to a block maximum of standard normals.
[[nodiscard]] inline double scale_maximum(double max, double b_m) noexcept {
  return b_m * max - b_m * b_m;
}

[[nodiscard]] MaximaSample sample_block_maxima(const BlockScheme& scheme, std::uint64_t seed,
                                               std::uint64_t rep_index);

// The raw standard pairs behind sample_block_maxima, in draw order.
[[nodiscard]] std::vector<Pair> raw_standard_pairs(const BlockScheme& scheme, std::uint64_t seed,
                                                   std::uint64_t rep_index);

// Consecutive blocks of m raw pairs reduced to scaled maxima; a trailing
// partial block is ignored.
[[nodiscard]] std::vector<Pair> block_maxima_from_raw(std::span<const Pair> raw, std::int64_t m,
                                                      double b_m);

struct CdfProbe {
  double x, y;
  double empirical;
  double exact;
  double standard_error;  // binomial, from the exact probability
};

struct CdfCheckReport {
  std::vector<CdfProbe> probes;
  double max_abs_deviation = 0.0;
  double max_z = 0.0;  // largest |empirical - exact| / standard_error
  std::size_t pooled = 0;
};

// Empirical joint CDF of pooled maxima against Phi_rho(u_m(x), u_m(y))^m.
// Default probes: the 4 x 4 grid {-1, 0, 1, 2.5}^2. Needs >= 1e4 pairs.
[[nodiscard]] CdfCheckReport empirical_maxima_cdf_check(const BlockScheme& scheme,
                                                        std::span<const MaximaSample> samples,
                                                        std::vector<Pair> probes = {});

}  // namespace hrbm
