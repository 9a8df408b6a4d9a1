#include "gsgi/train/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "gsgi/agent/config_json.hpp"
#include "gsgi/agent/observe.hpp"
#include "gsgi/agent/weights.hpp"
#include "gsgi/train/shared_parameters.hpp"

namespace gsgi::train {

namespace {

using Clock = std::chrono::steady_clock;

struct EpisodeSummary {
  double reward = 0.0;
  double length = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int steps = 0;
};

struct Segment {
  std::vector<agent::ForwardCache> caches;
  std::vector<agent::ForwardOutput> outputs;
  std::vector<PatrollerAction> actions;
  std::vector<double> rewards;
  void clear() {
    caches.clear();
    outputs.clear();
    actions.clear();
    rewards.clear();
  }
};

std::string describe_segment(const Segment& seg, double bootstrap,
                             const agent::LossResult& loss) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "non-finite loss: total=" << loss.total << " policy=" << loss.policy_loss
     << " value=" << loss.value_loss << " entropy=" << loss.entropy
     << " bootstrap=" << bootstrap << "\n";
  for (std::size_t t = 0; t < seg.outputs.size(); ++t) {
    os << "step " << t << " action=" << move_name(seg.actions[t])
       << " reward=" << seg.rewards[t] << " value=" << seg.outputs[t].value
       << " probs=";
    for (double p : seg.outputs[t].policy_probs.data()) os << p << ' ';
    os << "\n";
  }
  return os.str();
}

// Episode accounting and periodic logging/checkpointing shared by workers.
class Progress {
 public:
  Progress(const agent::TrainConfig& tc, const agent::NetworkConfig& nc,
           const GameConfig& gc, std::uint64_t seed, const TrainOptions& opts,
           const SharedParameters& shared)
      : tc_(tc), nc_(nc), gc_(gc), seed_(seed), opts_(opts), shared_(shared),
        start_(Clock::now()) {}

  void finish_episode(const EpisodeSummary& ep) {
    std::lock_guard lock(mutex_);
    ++completed_;
    window_.push_back(ep);
    if (opts_.log_every > 0 &&
        (completed_ % opts_.log_every == 0 || completed_ == tc_.total_episodes)) {
      flush();
    }
    if (!opts_.checkpoint_dir.empty() && opts_.checkpoint_every > 0 &&
        completed_ % opts_.checkpoint_every == 0) {
      checkpoint("checkpoint_" + std::to_string(completed_));
    }
  }

  void finalize() {
    std::lock_guard lock(mutex_);
    if (!window_.empty()) flush();
  }

  void checkpoint(const std::string& stem) {
    std::filesystem::create_directories(opts_.checkpoint_dir);
    agent::save_weights(shared_.snapshot().net,
                        opts_.checkpoint_dir / (stem + ".maa3c"));
    std::ofstream(opts_.checkpoint_dir / (stem + ".json"))
        << checkpoint_manifest(completed_, tc_, nc_, gc_, seed_);
  }

  TrainingLog log() const {
    std::lock_guard lock(mutex_);
    return log_;
  }

 private:
  void flush() {
    LogRecord r;
    r.episodes = completed_;
    int steps = 0;
    for (const auto& e : window_) {
      r.mean_reward += e.reward;
      r.mean_length += e.length;
      r.policy_loss += e.policy_loss;
      r.value_loss += e.value_loss;
      r.entropy += e.entropy;
      steps += e.steps;
    }
    const double n = static_cast<double>(window_.size());
    r.mean_reward /= n;
    r.mean_length /= n;
    if (steps > 0) {
      r.policy_loss /= steps;
      r.value_loss /= steps;
      r.entropy /= steps;
    }
    r.wall_clock_s = opts_.deterministic
                         ? 0.0
                         : std::chrono::duration<double>(Clock::now() - start_).count();
    window_.clear();
    log_.records.push_back(r);
    if (opts_.on_log) opts_.on_log(r);
  }

  const agent::TrainConfig& tc_;
  const agent::NetworkConfig& nc_;
  const GameConfig& gc_;
  std::uint64_t seed_;
  const TrainOptions& opts_;
  const SharedParameters& shared_;
  Clock::time_point start_;
  mutable std::mutex mutex_;
  int completed_ = 0;
  std::vector<EpisodeSummary> window_;
  TrainingLog log_;
};

struct RunContext {
  const agent::TrainConfig& tc;
  const agent::NetworkConfig& nc;
  const GameConfig& gc;
  const DensityMap& density;
  const AttackerPolicy& attacker;
  std::uint64_t seed;
  const TrainOptions& opts;
  SharedParameters& shared;
  Progress& progress;
  std::atomic<int>& next_episode;
  std::atomic<bool>& stop;
};

EpisodeSummary play_episode(RunContext& ctx, int episode) {
  EpisodeStreams streams = episode_streams(ctx.seed, static_cast<std::uint64_t>(episode));
  GameState state = new_game(ctx.gc, ctx.density, streams.game_seed);
  EpisodeSummary summary;
  nn::ConvLstmState lstm;
  bool have_lstm = false;
  Segment seg;

  while (state.status == Status::ongoing && !ctx.stop.load()) {
    Snapshot snap = ctx.shared.snapshot();
    agent::Network& net = snap.net;
    if (ctx.nc.use_convlstm && !have_lstm) {
      lstm = net.initial_state();
      have_lstm = true;
    }
    seg.clear();
    seg.caches.reserve(static_cast<std::size_t>(ctx.tc.rollout_n));
    for (int k = 0; k < ctx.tc.rollout_n && state.status == Status::ongoing; ++k) {
      const nn::Tensor obs = agent::observe(state, ctx.gc, ctx.density, ctx.nc.input_variant);
      seg.caches.emplace_back();
      agent::ForwardOutput out =
          net.forward(obs, ctx.nc.use_convlstm ? &lstm : nullptr, &seg.caches.back());
      const PatrollerAction a = agent::sample_action(out.policy_probs, streams.patroller);
      AttackerAction aa;
      if (state.attacker) {
        aa = ctx.attacker(make_attacker_view(state, ctx.gc, ctx.density), streams.attacker);
      }
      const StepOutcome o = step(state, ctx.gc, ctx.density, a, aa);
      if (out.next_lstm_state) lstm = *out.next_lstm_state;
      seg.rewards.push_back(o.patroller_reward);
      seg.actions.push_back(a);
      seg.outputs.push_back(std::move(out));
      summary.reward += o.patroller_reward;
      ++summary.steps;
    }

    double bootstrap = 0.0;
    if (state.status == Status::ongoing) {
      const nn::Tensor obs = agent::observe(state, ctx.gc, ctx.density, ctx.nc.input_variant);
      bootstrap = net.forward(obs, ctx.nc.use_convlstm ? &lstm : nullptr).value;
    }
    const std::vector<double> returns =
        agent::n_step_returns(seg.rewards, bootstrap, ctx.tc.gamma);
    const agent::LossResult loss = agent::a3c_loss(seg.outputs, seg.actions, returns, ctx.tc);
    if (!std::isfinite(loss.total)) {
      const std::string dump = describe_segment(seg, bootstrap, loss);
      if (!ctx.opts.checkpoint_dir.empty()) {
        std::filesystem::create_directories(ctx.opts.checkpoint_dir);
        std::ofstream(ctx.opts.checkpoint_dir / "nonfinite_segment.txt") << dump;
      }
      throw TrainingError("episode " + std::to_string(episode) + ": " + dump);
    }
    summary.policy_loss += loss.policy_loss;
    summary.value_loss += loss.value_loss;
    summary.entropy += loss.entropy;

    net.zero_grad();
    net.backward(seg.caches, loss.grads);
    ctx.shared.apply_update(net.flat_grads());
  }
  summary.length = state.t;
  return summary;
}

void worker_loop(RunContext& ctx, int& episodes_done) {
  while (!ctx.stop.load()) {
    const int ep = ctx.next_episode.fetch_add(1);
    if (ep >= ctx.tc.total_episodes) break;
    const EpisodeSummary s = play_episode(ctx, ep);
    if (ctx.stop.load()) break;
    ++episodes_done;
    ctx.progress.finish_episode(s);
  }
}

}  // namespace

std::string TrainingLog::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << kCsvHeader << "\n";
  for (const auto& r : records) {
    os << r.episodes << ',' << r.mean_reward << ',' << r.mean_length << ','
       << r.policy_loss << ',' << r.value_loss << ',' << r.entropy << ','
       << r.wall_clock_s << "\n";
  }
  return os.str();
}

void TrainingLog::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << to_csv();
}

std::string checkpoint_manifest(int episodes, const agent::TrainConfig& train_cfg,
                                const agent::NetworkConfig& net_cfg,
                                const GameConfig& game_cfg, std::uint64_t seed) {
  nlohmann::json j = {{"episodes", episodes},
                      {"seed", seed},
                      {"train", train_cfg},
                      {"network", net_cfg},
                      {"game", game_cfg}};
  return j.dump(2) + "\n";
}

TrainResult train(const agent::TrainConfig& train_cfg,
                  const agent::NetworkConfig& net_cfg, const GameConfig& game_cfg,
                  const DensityMap& density, const AttackerPolicy& attacker,
                  std::uint64_t seed, const TrainOptions& options) {
  train_cfg.validate();
  net_cfg.validate();
  game_cfg.validate();
  if (density.side() != game_cfg.grid_side) {
    throw ConfigError("density map does not match grid_side");
  }
  if (net_cfg.input_variant == agent::InputVariant::encoded_20ch &&
      net_cfg.grid_side != game_cfg.grid_side) {
    throw ConfigError("network grid_side does not match the game");
  }

  SharedParameters shared(agent::Network(net_cfg, options.init_seed), train_cfg);
  Progress progress(train_cfg, net_cfg, game_cfg, seed, options, shared);
  std::atomic<int> next_episode{0};
  std::atomic<bool> stop{false};
  RunContext ctx{train_cfg, net_cfg, game_cfg, density, attacker, seed,
                 options,   shared,  progress, next_episode, stop};

  const int workers = options.deterministic ? 1 : train_cfg.workers;
  std::vector<int> per_worker(static_cast<std::size_t>(workers), 0);
  if (workers == 1) {
    worker_loop(ctx, per_worker[0]);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    {
      std::vector<std::jthread> threads;
      for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
          try {
            worker_loop(ctx, per_worker[static_cast<std::size_t>(w)]);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
            stop.store(true);
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  progress.finalize();
  if (!options.checkpoint_dir.empty()) progress.checkpoint("final");

  TrainResult result;
  result.weights = shared.snapshot().net;
  result.log = progress.log();
  result.updates = shared.version();
  result.rejected_updates = shared.rejected_updates();
  result.worker_episodes = std::move(per_worker);
  return result;
}

}  // namespace gsgi::train
