#pragma once

// Seeded evaluation matches, summary statistics and bootstrap comparison.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gsgi/adversary.hpp"
#include "gsgi/env.hpp"
#include "gsgi/eval/policy.hpp"

namespace gsgi::eval {

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const Summary&, const Summary&) = default;
};

// Quantiles interpolate linearly between order statistics. Throws UsageError
// on an empty sample.
Summary summarize(std::vector<double> values);
double quantile_sorted(const std::vector<double>& sorted, double q);

struct EpisodeRecord {
  int length = 0;
  double reward = 0.0;
  bool captured = false;
  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct EvalStats {
  int n_episodes = 0;
  Summary episode_lengths;
  Summary episodic_rewards;
  double capture_rate = 0.0;
  std::vector<EpisodeRecord> raw;
  // Identifies the game configuration, density map and attacker the episodes
  // were played under; compare() refuses stats with different provenance.
  std::string provenance;
  friend bool operator==(const EvalStats&, const EvalStats&) = default;
};

// Rebuilds the summaries from per-episode records.
EvalStats stats_from_records(std::vector<EpisodeRecord> records,
                             std::string provenance);

std::string make_provenance(const GameConfig& game, const DensityMap& density,
                            std::string_view attacker_name);

struct EvalOptions {
  int workers = 1;
  bool keep_raw = true;
};

// Episode k uses episode_streams(seed, k); results do not depend on the
// number of workers. Throws ConfigError when n_episodes < 1.
EvalStats evaluate(const PatrollerPolicy& patroller, const AttackerPolicy& attacker,
                   std::string_view attacker_name, const GameConfig& game,
                   const DensityMap& density, int n_episodes, std::uint64_t seed,
                   const EvalOptions& options = {});

// Plays one episode; exposed for tracing and tests.
EpisodeRecord play_episode(PatrollerPolicy& patroller, const AttackerPolicy& attacker,
                           const GameConfig& game, const DensityMap& density,
                           std::uint64_t seed, std::uint64_t episode);

std::string format_report(const EvalStats& stats);
// Header "length,reward,captured", one row per episode.
std::string format_csv(const EvalStats& stats);
void save_csv(const EvalStats& stats, const std::filesystem::path& path);

enum class Verdict { a_better, b_better, indistinguishable };
std::string_view verdict_name(Verdict v);

struct MetricComparison {
  std::string metric;
  bool lower_is_better = false;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double diff = 0.0;  // mean_a - mean_b
  double ci_low = 0.0;
  double ci_high = 0.0;
  Verdict verdict = Verdict::indistinguishable;
};

struct Comparison {
  MetricComparison length;
  MetricComparison reward;
};

struct CompareOptions {
  int resamples = 10000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
};

// Percentile bootstrap of the difference in means, resampling each side
// independently. Needs raw records on both sides; throws ConfigError when the
// provenance differs.
Comparison compare(const EvalStats& a, const EvalStats& b,
                   const CompareOptions& options = {});

std::string format_comparison(const Comparison& c);

}  // namespace gsgi::eval
