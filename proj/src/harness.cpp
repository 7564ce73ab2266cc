#include "hrbm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

constexpr double kZ95 = 1.96;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
T required_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("config: missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw InputError(std::string("config: '") + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw InputError(std::string("config: '") + key + "' must be an integer");
  }
  return v.get<T>();
}

template <class T>
T optional_number(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? required_number<T>(j, key) : fallback;
}

struct Moments {
  std::optional<double> mean;
  std::optional<double> variance;
};

// Two-pass moments over values in the given order.
Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  m.mean = mean;
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  m.variance = ss / static_cast<double>(v.size() - 1);
  return m;
}

nlohmann::json histogram(const std::vector<double>& v, int bins, double theo_mean, double theo_sd) {
  nlohmann::json out;
  const Moments mo = moments(v);
  out["fitted"] = {{"mean", opt_json(mo.mean)},
                   {"sd", mo.variance ? nlohmann::json(std::sqrt(*mo.variance)) : nlohmann::json(nullptr)}};
  out["theoretical"] = {{"mean", theo_mean}, {"sd", theo_sd}};
  if (v.empty()) {
    out["edges"] = nlohmann::json::array();
    out["counts"] = nlohmann::json::array();
    return out;
  }
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * i / bins;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  for (double x : v) {
    auto i = static_cast<int>((x - lo) / (hi - lo) * bins);
    counts[static_cast<std::size_t>(std::clamp(i, 0, bins - 1))] += 1;
  }
  out["edges"] = edges;
  out["counts"] = counts;
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

void ExperimentConfig::validate() const {
  HrParam{lambda};
  if (n_target < 100) throw InputError("config: n_target must be >= 100");
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("config: c must be positive");
  if (replications < 1) throw InputError("config: replications must be >= 1");
  if (workers < 1) throw InputError("config: workers must be >= 1");
  if (histogram_bins < 1) throw InputError("config: histogram_bins must be >= 1");
  if (!(bracket.lo > 0.0 && bracket.lo < bracket.hi)) throw InputError("config: invalid bracket");
  quadrature.validate();
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  static const std::vector<std::string> known = {
      "lambda", "n_target", "c", "replications", "master_seed", "quadrature",
      "output_dir", "workers", "histogram_bins", "bracket"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InputError("config: unknown key '" + key + "'");
    }
  }
  ExperimentConfig cfg;
  cfg.lambda = required_number<double>(j, "lambda");
  cfg.n_target = required_number<std::int64_t>(j, "n_target");
  cfg.c = optional_number<double>(j, "c", cfg.c);
  cfg.replications = optional_number<std::int64_t>(j, "replications", cfg.replications);
  if (j.contains("master_seed")) {
    const auto& s = j.at("master_seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw InputError("config: master_seed must be a non-negative integer");
    }
    cfg.master_seed = s.get<std::uint64_t>();
  }
  cfg.workers = optional_number<int>(j, "workers", cfg.workers);
  cfg.histogram_bins = optional_number<int>(j, "histogram_bins", cfg.histogram_bins);
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw InputError("config: output_dir must be a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    if (!q.is_object()) throw InputError("config: quadrature must be an object");
    cfg.quadrature.x_lo = optional_number<double>(q, "x_lo", cfg.quadrature.x_lo);
    cfg.quadrature.x_hi = optional_number<double>(q, "x_hi", cfg.quadrature.x_hi);
    cfg.quadrature.delta_lo = optional_number<double>(q, "delta_lo", cfg.quadrature.delta_lo);
    cfg.quadrature.delta_hi = optional_number<double>(q, "delta_hi", cfg.quadrature.delta_hi);
    cfg.quadrature.abs_tol = optional_number<double>(q, "abs_tol", cfg.quadrature.abs_tol);
    cfg.quadrature.max_refinements =
        optional_number<int>(q, "max_refinements", cfg.quadrature.max_refinements);
  }
  if (j.contains("bracket")) {
    const auto& b = j.at("bracket");
    if (!b.is_array() || b.size() != 2) throw InputError("config: bracket must be [lo, hi]");
    cfg.bracket = {b[0].get<double>(), b[1].get<double>()};
  }
  cfg.validate();
  return cfg;
}

ReplicationRow run_replication(const BlockScheme& scheme, std::uint64_t seed, std::int64_t rep_index,
                               Bracket bracket) {
  const MaximaSample s = sample_block_maxima(scheme, seed, static_cast<std::uint64_t>(rep_index));
  const MleResult fit = mle(s, bracket);
  ReplicationRow row;
  row.rep_index = rep_index;
  row.lambda_hat = fit.lambda_hat;
  row.sqrt_k_centered = std::sqrt(static_cast<double>(scheme.k)) * (fit.lambda_hat - scheme.lambda);
  row.score_stat = score_statistic(s, HrParam(scheme.lambda));
  row.converged = fit.converged;
  row.status = fit.status;
  return row;
}

ReplicationReport run_experiment(const ExperimentConfig& config, std::ostream* progress) {
  config.validate();
  const HrParam lam(config.lambda);
  ReplicationReport rep;
  rep.scheme = plan_blocks(config.n_target, lam, config.c);
  rep.master_seed = config.master_seed;

  // Theoretical columns use the limit l1 = sqrt(c) so they depend on (lambda, c) only.
  const LimitPair limits{std::sqrt(config.c), 0.0};
  const AsymptoticPrediction pred = predict(lam, limits, config.quadrature);

  const auto total = config.replications;
  rep.per_rep.resize(static_cast<std::size_t>(total));
  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> done{0};
  std::mutex io;
  std::exception_ptr failure;
  const std::int64_t step = std::max<std::int64_t>(1, total / 100);

  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        rep.per_rep[static_cast<std::size_t>(i)] =
            run_replication(rep.scheme, config.master_seed, i, config.bracket);
      } catch (...) {
        std::lock_guard lock(io);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
      const std::int64_t d = done.fetch_add(1) + 1;
      if (progress != nullptr && (d % step == 0 || d == total)) {
        std::lock_guard lock(io);
        *progress << "progress " << d << "/" << total << " (" << (100 * d / total) << "%)\n";
        progress->flush();
      }
    }
  };
  const int n_threads = static_cast<int>(std::min<std::int64_t>(config.workers, total));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> centered;
  std::vector<double> scores;
  Aggregate& agg = rep.aggregate;
  for (const auto& row : rep.per_rep) {
    if (row.converged) {
      centered.push_back(row.sqrt_k_centered);
      scores.push_back(row.score_stat);
    } else {
      ++agg.edge_case_count;
    }
  }
  agg.theoretical_mean = pred.mean;
  agg.theoretical_variance = pred.variance;
  agg.theoretical_score_mean = pred.mean / pred.variance;
  agg.n_effective = static_cast<std::int64_t>(centered.size());
  const Moments mc = moments(centered);
  agg.simulated_mean = mc.mean;
  agg.simulated_variance = mc.variance;
  if (mc.variance) {
    const double half = kZ95 * std::sqrt(*mc.variance / static_cast<double>(agg.n_effective));
    agg.ci_low = *mc.mean - half;
    agg.ci_high = *mc.mean + half;
  }
  const Moments ms = moments(scores);
  agg.score_mean = ms.mean;
  agg.score_variance = ms.variance;

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    write_atomically(config.output_dir / "per_rep.csv", per_rep_csv(rep));
    write_atomically(config.output_dir / "aggregate.json", aggregate_json(rep).dump(2) + "\n");
    write_atomically(config.output_dir / "histograms.json",
                     histograms_json(rep, config.histogram_bins).dump(2) + "\n");
  }
  return rep;
}

std::string per_rep_csv(const ReplicationReport& r) {
  std::string out = "rep_index,lambda_hat,sqrt_k_centered,score_stat,converged\n";
  for (const auto& row : r.per_rep) {
    out += std::to_string(row.rep_index) + "," + format_double(row.lambda_hat) + "," +
           format_double(row.sqrt_k_centered) + "," + format_double(row.score_stat) + "," +
           (row.converged ? "1" : "0") + "\n";
  }
  return out;
}

nlohmann::json aggregate_json(const ReplicationReport& r) {
  const Aggregate& a = r.aggregate;
  const BlockScheme& s = r.scheme;
  nlohmann::json j;
  j["theoretical_mean"] = a.theoretical_mean;
  j["simulated_mean"] = opt_json(a.simulated_mean);
  j["ci_low"] = opt_json(a.ci_low);
  j["ci_high"] = opt_json(a.ci_high);
  j["theoretical_variance"] = a.theoretical_variance;
  j["simulated_variance"] = opt_json(a.simulated_variance);
  j["n_effective"] = a.n_effective;
  j["edge_case_count"] = a.edge_case_count;
  j["scheme"] = {{"n", s.n_target}, {"m", s.m},         {"k", s.k},  {"b_m", s.b_m},
                 {"rho_m", s.rho_m}, {"lambda", s.lambda}, {"c", s.c}};
  j["master_seed"] = r.master_seed;
  return j;
}

nlohmann::json histograms_json(const ReplicationReport& r, int bins) {
  std::vector<double> lam;
  std::vector<double> score;
  for (const auto& row : r.per_rep) {
    if (!row.converged) continue;
    lam.push_back(row.lambda_hat);
    score.push_back(row.score_stat);
  }
  const Aggregate& a = r.aggregate;
  const double sqrt_k = std::sqrt(static_cast<double>(r.scheme.k));
  nlohmann::json j;
  j["lambda_hat"] = histogram(lam, bins, r.scheme.lambda + a.theoretical_mean / sqrt_k,
                              std::sqrt(a.theoretical_variance) / sqrt_k);
  j["score_stat"] = histogram(score, bins, a.theoretical_score_mean,
                              std::sqrt(1.0 / a.theoretical_variance));
  return j;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<Pair> read_pairs_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  std::vector<Pair> out;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (line_no == 1 && s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF) s.remove_prefix(3);
    if (s.empty()) continue;
    const auto comma = s.find(',');
    Pair p{};
    const bool ok = comma != std::string_view::npos && parse_double(s.substr(0, comma), p.x) &&
                    parse_double(s.substr(comma + 1), p.y);
    if (!ok) {
      if (line_no == 1 && out.empty()) continue;  // header
      throw InputError(path.string() + ": line " + std::to_string(line_no) +
                       ": expected two finite reals 'x,y'");
    }
    out.push_back(p);
  }
  return out;
}

void write_pairs_csv(const std::filesystem::path& path, std::span<const Pair> pairs) {
  std::string out = "x,y\n";
  out.reserve(pairs.size() * 48);
  for (const Pair& p : pairs) out += format_double(p.x) + "," + format_double(p.y) + "\n";
  write_atomically(path, out);
}

EstimateReport estimate_from_raw(std::span<const Pair> raw, std::int64_t m, Bracket bracket,
                                 const QuadratureConfig& q) {
  if (m < 2) throw InputError("estimate: m must be >= 2");
  const auto rows = static_cast<std::int64_t>(raw.size());
  if (rows < 2 * m) throw InputError("estimate: fewer than 2 full blocks of size m");
  EstimateReport r;
  r.m = m;
  r.k = rows / m;
  r.rows_used = r.k * m;
  r.rows_dropped = rows - r.rows_used;
  if (r.rows_dropped > 0) {
    r.warnings.push_back("dropped " + std::to_string(r.rows_dropped) + " rows of a trailing partial block");
  }
  r.b_m = solve_bm(static_cast<double>(m)).b_m;
  const std::vector<Pair> maxima = block_maxima_from_raw(raw, m, r.b_m);
  r.mle = mle(maxima, bracket);
  if (r.mle.converged) {
    const double info = fisher_information(HrParam(r.mle.lambda_hat), q);
    const double se = std::sqrt(1.0 / (static_cast<double>(r.k) * info));
    r.std_error = se;
    r.ci_low = r.mle.lambda_hat - kZ95 * se;
    r.ci_high = r.mle.lambda_hat + kZ95 * se;
  }
  return r;
}

EstimateReport estimate_from_file(const std::filesystem::path& path, std::int64_t m, Bracket bracket) {
  const std::vector<Pair> raw = read_pairs_csv(path);
  return estimate_from_raw(raw, m, bracket);
}

nlohmann::json estimate_json(const EstimateReport& r) {
  nlohmann::json j;
  j["lambda_hat"] = r.mle.lambda_hat;
  j["log_lik"] = r.mle.log_lik;
  j["converged"] = r.mle.converged;
  j["status"] = to_string(r.mle.status);
  j["iterations"] = r.mle.iterations;
  j["curvature_at_opt"] = r.mle.curvature_at_opt;
  j["std_error"] = opt_json(r.std_error);
  j["ci_low"] = opt_json(r.ci_low);
  j["ci_high"] = opt_json(r.ci_high);
  j["scheme"] = {{"n", r.rows_used}, {"m", r.m}, {"k", r.k}, {"b_m", r.b_m}};
  j["rows_dropped"] = r.rows_dropped;
  j["warnings"] = r.warnings;
  return j;
}

bool CheckReport::all_passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.passed; });
}

}  // namespace hrbm
