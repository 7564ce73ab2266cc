#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrbm/asymptotics.hpp"
#include "hrbm/finite_m.hpp"
#include "hrbm/inference.hpp"
#include "hrbm/quadrature.hpp"
#include "hrbm/sampling.hpp"

namespace hrbm {

struct ExperimentConfig {
  double lambda = 0.5;
  std::int64_t n_target = 100000;
  double c = 1.0;
  std::int64_t replications = 2000;
  std::uint64_t master_seed = 0;
  QuadratureConfig quadrature{};
  std::filesystem::path output_dir;  // empty: keep results in memory only
  int workers = 1;
  int histogram_bins = 40;
  Bracket bracket{};

  // Throws InputError on invalid values.
  void validate() const;
  // Reads a JSON object; unknown keys are rejected so typos do not pass silently.
  [[nodiscard]] static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ReplicationRow {
  std::int64_t rep_index = 0;
  double lambda_hat = 0.0;
  double sqrt_k_centered = 0.0;
  double score_stat = 0.0;
  bool converged = false;
  MleStatus status = MleStatus::not_converged;
};

struct Aggregate {
  double theoretical_mean = 0.0;
  double theoretical_variance = 0.0;
  std::optional<double> simulated_mean;
  std::optional<double> simulated_variance;  // empty when fewer than 2 usable reps
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::int64_t n_effective = 0;
  std::int64_t edge_case_count = 0;
  // Moments of the score statistic over the same reps.
  std::optional<double> score_mean;
  std::optional<double> score_variance;
  double theoretical_score_mean = 0.0;  // A
};

struct ReplicationReport {
  BlockScheme scheme;
  std::uint64_t master_seed = 0;
  std::vector<ReplicationRow> per_rep;
  Aggregate aggregate;
};

// One replication: sample, fit, score statistic.
[[nodiscard]] ReplicationRow run_replication(const BlockScheme& scheme, std::uint64_t seed,
                                             std::int64_t rep_index, Bracket bracket);

// Runs all replications on config.workers threads and folds results in
// rep_index order. Writes per_rep.csv, aggregate.json and histograms.json to
// output_dir when it is set. Progress goes to `progress` once per 1%.
[[nodiscard]] ReplicationReport run_experiment(const ExperimentConfig& config,
                                               std::ostream* progress = nullptr);

[[nodiscard]] std::string per_rep_csv(const ReplicationReport& r);
[[nodiscard]] nlohmann::json aggregate_json(const ReplicationReport& r);
[[nodiscard]] nlohmann::json histograms_json(const ReplicationReport& r, int bins);

// Writes via a temporary file in the same directory and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);

struct EstimateReport {
  MleResult mle;
  std::int64_t m = 0;
  std::int64_t k = 0;
  double b_m = 0.0;
  std::int64_t rows_used = 0;
  std::int64_t rows_dropped = 0;
  std::optional<double> std_error;  // sqrt(1 / (k I(lambda_hat))) when converged
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::vector<std::string> warnings;
};

// Parses `x,y` rows (optional header, LF or CRLF). Throws InputError with the
// line number for malformed rows.
[[nodiscard]] std::vector<Pair> read_pairs_csv(const std::filesystem::path& path);
void write_pairs_csv(const std::filesystem::path& path, std::span<const Pair> pairs);

// Blocks raw standard-normal-marginal pairs, scales the maxima and fits.
[[nodiscard]] EstimateReport estimate_from_raw(std::span<const Pair> raw, std::int64_t m,
                                               Bracket bracket = {},
                                               const QuadratureConfig& q = {});
[[nodiscard]] EstimateReport estimate_from_file(const std::filesystem::path& path, std::int64_t m,
                                                Bracket bracket = {});
[[nodiscard]] nlohmann::json estimate_json(const EstimateReport& r);

enum class CheckLevel { quick, full };

struct CheckItem {
  std::string name;
  double observed;
  std::string required;
  bool passed;
};

struct CheckReport {
  std::vector<CheckItem> items;
  [[nodiscard]] bool all_passed() const;
};

[[nodiscard]] CheckReport check_invariants(CheckLevel level);

}  // namespace hrbm
