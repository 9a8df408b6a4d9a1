#include "gsgi/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "gsgi/agent/config_json.hpp"
#include "gsgi/checksum.hpp"
#include "gsgi/errors.hpp"

namespace gsgi::eval {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

MetricComparison bootstrap_metric(std::string metric, bool lower_is_better,
                                  const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  const CompareOptions& opts, Rng rng) {
  MetricComparison m;
  m.metric = std::move(metric);
  m.lower_is_better = lower_is_better;
  m.mean_a = mean_of(a);
  m.mean_b = mean_of(b);
  m.diff = m.mean_a - m.mean_b;

  std::vector<double> diffs(static_cast<std::size_t>(opts.resamples));
  for (double& d : diffs) {
    double sa = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sa += a[rng.below(a.size())];
    double sb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) sb += b[rng.below(b.size())];
    d = sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size());
  }
  std::sort(diffs.begin(), diffs.end());
  const double tail = (1.0 - opts.confidence) / 2.0;
  m.ci_low = quantile_sorted(diffs, tail);
  m.ci_high = quantile_sorted(diffs, 1.0 - tail);

  if (m.ci_low > 0.0) {
    m.verdict = lower_is_better ? Verdict::b_better : Verdict::a_better;
  } else if (m.ci_high < 0.0) {
    m.verdict = lower_is_better ? Verdict::a_better : Verdict::b_better;
  } else {
    m.verdict = Verdict::indistinguishable;
  }
  return m;
}

void write_summary(std::ostream& os, std::string_view label, const Summary& s) {
  os << label << ".mean " << s.mean << "\n"
     << label << ".median " << s.median << "\n"
     << label << ".std " << s.std << "\n"
     << label << ".q1 " << s.q1 << "\n"
     << label << ".q3 " << s.q3 << "\n"
     << label << ".min " << s.min << "\n"
     << label << ".max " << s.max << "\n";
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw UsageError("summary of an empty sample");
  std::sort(values.begin(), values.end());
  Summary s;
  s.mean = mean_of(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  s.median = quantile_sorted(values, 0.5);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

EvalStats stats_from_records(std::vector<EpisodeRecord> records,
                             std::string provenance) {
  if (records.empty()) throw UsageError("no episodes to summarize");
  EvalStats st;
  st.n_episodes = static_cast<int>(records.size());
  std::vector<double> lengths;
  std::vector<double> rewards;
  int captures = 0;
  for (const auto& r : records) {
    lengths.push_back(r.length);
    rewards.push_back(r.reward);
    captures += r.captured ? 1 : 0;
  }
  st.episode_lengths = summarize(std::move(lengths));
  st.episodic_rewards = summarize(std::move(rewards));
  st.capture_rate = static_cast<double>(captures) / st.n_episodes;
  st.raw = std::move(records);
  st.provenance = std::move(provenance);
  return st;
}

std::string make_provenance(const GameConfig& game, const DensityMap& density,
                            std::string_view attacker_name) {
  return "game=" + nlohmann::json(game).dump() +
         " density=" + hex64(fnv1a(format_density(density))) +
         " attacker=" + std::string(attacker_name);
}

EpisodeRecord play_episode(PatrollerPolicy& patroller, const AttackerPolicy& attacker,
                           const GameConfig& game, const DensityMap& density,
                           std::uint64_t seed, std::uint64_t episode) {
  EpisodeStreams streams = episode_streams(seed, episode);
  GameState state = new_game(game, density, streams.game_seed);
  patroller.begin_episode();
  EpisodeRecord rec;
  while (state.status == Status::ongoing) {
    const PatrollerAction pa = patroller.act(state, game, density, streams.patroller);
    AttackerAction aa;
    if (state.attacker) {
      aa = attacker(make_attacker_view(state, game, density), streams.attacker);
    }
    rec.reward += step(state, game, density, pa, aa).patroller_reward;
  }
  rec.length = state.t;
  rec.captured = state.attacker_captured;
  return rec;
}

EvalStats evaluate(const PatrollerPolicy& patroller, const AttackerPolicy& attacker,
                   std::string_view attacker_name, const GameConfig& game,
                   const DensityMap& density, int n_episodes, std::uint64_t seed,
                   const EvalOptions& options) {
  if (n_episodes < 1) throw ConfigError("n_episodes must be at least 1");
  if (options.workers < 1) throw ConfigError("workers must be at least 1");
  game.validate();

  std::vector<EpisodeRecord> records(static_cast<std::size_t>(n_episodes));
  const int workers = std::min(options.workers, n_episodes);
  auto run = [&](int w) {
    auto policy = patroller.clone();
    for (int ep = w; ep < n_episodes; ep += workers) {
      records[static_cast<std::size_t>(ep)] = play_episode(
          *policy, attacker, game, density, seed, static_cast<std::uint64_t>(ep));
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run, w);
  }

  EvalStats st = stats_from_records(std::move(records),
                                    make_provenance(game, density, attacker_name));
  if (!options.keep_raw) st.raw.clear();
  return st;
}

std::string format_report(const EvalStats& s) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "episodes " << s.n_episodes << "\n";
  write_summary(os, "length", s.episode_lengths);
  write_summary(os, "reward", s.episodic_rewards);
  os << "capture_rate " << s.capture_rate << "\n";
  os << "provenance " << s.provenance << "\n";
  return os.str();
}

std::string format_csv(const EvalStats& stats) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "length,reward,captured\n";
  for (const auto& r : stats.raw) {
    os << r.length << ',' << r.reward << ',' << (r.captured ? 1 : 0) << "\n";
  }
  return os.str();
}

void save_csv(const EvalStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_csv(stats);
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::a_better:
      return "A better";
    case Verdict::b_better:
      return "B better";
    case Verdict::indistinguishable:
      return "indistinguishable";
  }
  return "?";
}

Comparison compare(const EvalStats& a, const EvalStats& b, const CompareOptions& opts) {
  if (a.provenance != b.provenance) {
    throw ConfigError("refusing to compare runs with different provenance:\n  " +
                      a.provenance + "\n  " + b.provenance);
  }
  if (a.raw.empty() || b.raw.empty()) {
    throw UsageError("compare needs per-episode records on both sides");
  }
  if (opts.resamples < 1 || !(opts.confidence > 0.0 && opts.confidence < 1.0)) {
    throw ConfigError("bad bootstrap options");
  }
  auto column = [](const EvalStats& s, bool lengths) {
    std::vector<double> v;
    for (const auto& r : s.raw) v.push_back(lengths ? r.length : r.reward);
    return v;
  };
  const Rng root(opts.seed);
  Comparison c;
  c.length = bootstrap_metric("episode_length", true, column(a, true), column(b, true),
                              opts, root.split(0));
  c.reward = bootstrap_metric("episodic_reward", false, column(a, false),
                              column(b, false), opts, root.split(1));
  return c;
}

std::string format_comparison(const Comparison& c) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "metric           mean_A       mean_B       diff         ci_low       ci_high      verdict\n";
  for (const auto* m : {&c.length, &c.reward}) {
    os << std::left << std::setw(17) << m->metric << std::setw(13) << m->mean_a
       << std::setw(13) << m->mean_b << std::setw(13) << m->diff << std::setw(13)
       << m->ci_low << std::setw(13) << m->ci_high << verdict_name(m->verdict) << "\n";
  }
  return os.str();
}

}  // namespace gsgi::eval
