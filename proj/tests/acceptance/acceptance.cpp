// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [criteria...] [--workdir DIR]
//
// With no criteria all seven run. Criterion 5 trains two networks for 20,000
// episodes each and takes over an hour on one core.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "../unit/helpers.hpp"
#include "gsgi/adversary.hpp"
#include "gsgi/agent/checks.hpp"
#include "gsgi/agent/network.hpp"
#include "gsgi/agent/weights.hpp"
#include "gsgi/env.hpp"
#include "gsgi/errors.hpp"
#include "gsgi/eval/eval.hpp"
#include "gsgi/eval/policy.hpp"
#include "gsgi/interp/overlay.hpp"
#include "gsgi/interp/rollout.hpp"
#include "gsgi/interp/trace.hpp"
#include "gsgi/nn/grad_check.hpp"
#include "gsgi/obs.hpp"
#include "gsgi/train/trainer.hpp"

namespace gsgi {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records the first failure only.
  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1. Every kernel and the loss against central differences, 10 seeds each.
Outcome gradient_oracle() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  const std::set<std::string> smooth = {"dense", "relu", "sigmoid", "tanh",
                                        "softmax_log_prob"};
  const auto checks = agent::all_gradient_checks();
  for (const auto& check : checks) {
    const double limit = smooth.contains(check.name) ? 1e-6 : 1e-4;
    o.require(check.tolerance <= limit, check.name + " tolerance looser than required");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto r = nn::grad_check(check.make(seed));
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        worst_name = check.name;
      }
      o.require(r.max_rel_error < limit,
                check.name + " seed " + std::to_string(seed) + " error " +
                    std::to_string(r.max_rel_error));
    }
  }
  const double secs = seconds_since(start);
  o.require(secs < 60.0, fmt("took %.1f s", secs));
  if (o.pass) {
    o.detail = std::to_string(checks.size()) + " checks x 10 seeds, worst " +
               fmt("%.2e", worst) + " (" + worst_name + "), " + fmt("%.1f s", secs);
  }
  return o;
}

// 2. Environment invariants over random play.
Outcome environment_invariants() {
  Outcome o;
  const auto start = Clock::now();
  const GameConfig cfg;
  long steps = 0;
  int captures = 0, exits = 0;
  for (std::uint64_t ep = 0; ep < 10000 && o.pass; ++ep) {
    const auto d = random_density_map(cfg.grid_side, ep / 100);
    auto streams = episode_streams(2024, ep);
    GameState s = new_game(cfg, d, streams.game_seed);
    while (s.status == Status::ongoing) {
      const GameState before = s;
      const auto pa = static_cast<Move>(streams.patroller.below(kNumMoves));
      AttackerAction aa;
      if (s.attacker) aa = random_attacker(make_attacker_view(s, cfg, d), streams.attacker);
      const auto out = step(s, cfg, d, pa, aa);
      ++steps;

      o.require(out.patroller_reward + out.attacker_reward == 0.0, "not zero-sum");

      const Cell p_to = apply_move(before.patroller, pa, cfg.grid_side);
      bool exit_now = false;
      bool co_located = false;
      if (before.attacker) {
        const Cell a_to = apply_move(*before.attacker, aa.move, cfg.grid_side);
        exit_now = a_to == before.entry_corner && before.attacker_left_corner;
        co_located = !exit_now && a_to == p_to;
      }
      int removed = 0, captured = 0, exited = 0;
      double penalty = 0.0;
      for (const auto& e : out.events) {
        removed += e.kind == EventKind::snare_removed;
        captured += e.kind == EventKind::capture;
        exited += e.kind == EventKind::attacker_exited;
        if (e.kind == EventKind::attack_success) penalty += e.penalty;
      }
      o.require((captured == 1) == co_located, "capture does not match co-location");
      o.require(s.attacker_captured == (before.attacker_captured || co_located),
                "capture flag");
      o.require((exited == 1) == exit_now, "exit event");
      if (before.attacker_exited || exit_now) {
        o.require(penalty == 0.0, "attack counted after the attacker exited");
      }
      const double expect = removed * cfg.reward_snare_removal +
                            captured * cfg.reward_capture - penalty;
      o.require(std::abs(out.patroller_reward - expect) < 1e-12, "reward decomposition");

      o.require(s.snares_placed == static_cast<int>(s.snares.size()), "snare count");
      o.require(s.snares_placed <= cfg.max_snares, "too many snares");
      o.require(s.snares_placed - before.snares_placed <= 1, "two snares in one step");
      o.require(s.active_snares() + s.removed_snares() == s.snares_placed,
                "snares not conserved");
      o.require(s.removed_snares() - before.removed_snares() == removed, "removal count");
      for (std::size_t i = 0; i < s.snares.size(); ++i) {
        for (std::size_t j = i + 1; j < s.snares.size(); ++j) {
          o.require(!(s.snares[i].active && s.snares[j].active &&
                      s.snares[i].cell == s.snares[j].cell),
                    "two active snares in one cell");
        }
      }
      o.require(s.t <= cfg.horizon, "episode longer than the horizon");
    }
    captures += s.attacker_captured;
    exits += s.attacker_exited;
    const GameState final_state = s;
    bool threw = false;
    try {
      step(s, cfg, d, Move::up, {});
    } catch (const UsageError&) {
      threw = true;
    }
    o.require(threw && s == final_state, "transition accepted after termination");
  }
  const double secs = seconds_since(start);
  o.require(secs < 60.0, fmt("took %.1f s", secs));
  if (o.pass) {
    o.detail = "10000 episodes, " + std::to_string(steps) + " steps, " +
               std::to_string(captures) + " captures, " + std::to_string(exits) +
               " exits, " + fmt("%.1f s", secs);
  }
  return o;
}

// 3. Encoded observation channels and information hiding.
Outcome observation_contract() {
  Outcome o;
  const GameConfig cfg;
  const int n = cfg.grid_side;
  long steps = 0;
  for (std::uint64_t ep = 0; ep < 1000 && o.pass; ++ep) {
    const auto d = random_density_map(n, 7000 + ep / 50);
    const auto play = testing::play_random(cfg, d, ep);
    for (const GameState& s : play.states) {
      ++steps;
      const nn::Tensor x = encode_observation(s, cfg, d);
      o.require(x.shape() == std::vector<int>{kObsChannels, n, n}, "shape");
      double position_sum = 0.0;
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          const int idx = r * n + c;
          position_sum += x.at(channel::position, r, c);
          const bool here = s.patroller == Cell{r, c};
          o.require(x.at(channel::position, r, c) == (here ? 1.0 : 0.0), "position one-hot");
          o.require(std::abs(x.at(channel::trail, r, c) - 0.1 * s.visits[idx]) < 1e-12,
                    "trail is not 0.1 x visits");
          o.require(std::abs(x.at(channel::time, r, c) -
                             static_cast<double>(s.t) / cfg.horizon) < 1e-12,
                    "time channel");
          o.require(x.at(channel::density, r, c) == d.at(r, c), "density channel");
          const auto attacker_bits = agent_prints(s.footprints[idx], Agent::attacker);
          const auto known_bits = agent_prints(s.known_attacker_prints[idx], Agent::attacker);
          o.require((known_bits & ~attacker_bits) == 0, "known prints were never laid");
          const auto patroller_bits = agent_prints(s.footprints[idx], Agent::patroller);
          for (int k = 0; k < 8; ++k) {
            const double a = x.at(channel::attacker_prints + k, r, c);
            const double p = x.at(channel::patroller_prints + k, r, c);
            if (!s.observed[idx]) o.require(a == 0.0, "attacker prints outside observed cells");
            o.require(a == static_cast<double>((known_bits >> k) & 1), "attacker print channel");
            o.require(p == static_cast<double>((patroller_bits >> k) & 1),
                      "patroller print channel");
            o.require(a == 0.0 || a == 1.0, "print channels not binary");
          }
        }
      }
      o.require(position_sum == 1.0, "position channel sums to " + std::to_string(position_sum));

      GameState hidden = s;
      if (hidden.attacker) {
        hidden.attacker = Cell{(hidden.attacker->row + 3) % n, (hidden.attacker->col + 2) % n};
      } else {
        hidden.attacker = Cell{0, n - 1};
      }
      o.require(encode_observation(hidden, cfg, d) == x, "encoding reveals the attacker");
      if (steps % 10 == 0) {
        o.require(render_color(hidden, cfg, d) == render_color(s, cfg, d),
                  "rendering reveals the attacker");
      }
    }
  }
  if (o.pass) o.detail = "1000 episodes, " + std::to_string(steps) + " states";
  return o;
}

agent::Network default_network(bool lstm, std::uint64_t seed) {
  agent::NetworkConfig cfg;
  cfg.use_convlstm = lstm;
  return agent::Network(cfg, seed);
}

// 4. Seeded runs reproduce bit for bit; traces replay exactly.
Outcome determinism_and_replay() {
  Outcome o;
  const GameConfig game;
  const auto d = random_density_map(7, 11);
  const auto net = default_network(true, 1);

  const auto t1 = interp::record_rollout(net, game, d, 9, "");
  const auto t2 = interp::record_rollout(net, game, d, 9, "");
  o.require(interp::format_trace(t1) == interp::format_trace(t2), "traces differ");

  const auto attacker = make_attacker_policy("heuristic");
  const eval::NetworkPatroller stochastic(net, false);
  const auto e1 = eval::evaluate(stochastic, attacker, "heuristic", game, d, 50, 4);
  const auto e2 = eval::evaluate(stochastic, attacker, "heuristic", game, d, 50, 4);
  const auto e3 = eval::evaluate(stochastic, attacker, "heuristic", game, d, 50, 4, {3, true});
  o.require(eval::format_csv(e1) == eval::format_csv(e2), "eval CSVs differ");
  o.require(eval::format_csv(e1) == eval::format_csv(e3), "eval CSV depends on workers");

  agent::TrainConfig tc;
  tc.total_episodes = 20;
  tc.workers = 1;
  agent::NetworkConfig nc;
  nc.use_convlstm = true;
  nc.feature_channels = 8;
  nc.mlp_hidden = 16;
  train::TrainOptions opts;
  opts.deterministic = true;
  opts.log_every = 5;
  const auto r1 = train::train(tc, nc, game, d, attacker, 3, opts);
  const auto r2 = train::train(tc, nc, game, d, attacker, 3, opts);
  o.require(r1.log.to_csv() == r2.log.to_csv(), "training logs differ");
  o.require(r1.weights.flat_values() == r2.weights.flat_values(), "trained weights differ");

  int replayed = 0;
  for (std::uint64_t ep = 0; ep < 100; ++ep) {
    interp::RolloutOptions ro;
    ro.episode = ep;
    ro.greedy = ep % 2 == 0;
    const auto trace = interp::parse_trace(
        interp::format_trace(interp::record_rollout(net, game, d, 17, "", ro)));
    const auto r = interp::replay_trace(trace);
    o.require(r.ok, "trace " + std::to_string(ep) + ": " + r.message);
    replayed += r.ok;
  }
  if (o.pass) {
    o.detail = "traces, eval CSVs and training logs identical; " + std::to_string(replayed) +
               "/100 traces replay exactly";
  }
  return o;
}

// 5. Desk-scale training beats the random patroller.
Outcome learning_outcome(const fs::path& workdir) {
  Outcome o;
  const GameConfig game;
  const auto attacker = make_attacker_policy("heuristic");
  struct MapCase {
    std::string name;
    DensityMap density;
  };
  const std::vector<MapCase> maps = {{"random11", random_density_map(7, 11)},
                                     {"gaussian", gaussian_density_map(7)}};
  std::vector<std::string> parts;
  for (const auto& m : maps) {
    const auto start = Clock::now();
    agent::TrainConfig tc;
    tc.total_episodes = 20000;
    tc.workers = 1;
    agent::NetworkConfig nc;
    nc.use_convlstm = true;
    train::TrainOptions opts;
    opts.deterministic = true;
    opts.log_every = 1000;
    opts.checkpoint_every = 5000;
    opts.checkpoint_dir = workdir / m.name;
    opts.on_log = [&](const train::LogRecord& r) {
      std::cerr << "  [" << m.name << "] episodes " << r.episodes << " reward "
                << r.mean_reward << " length " << r.mean_length << " entropy " << r.entropy
                << std::endl;
    };
    const auto result = train::train(tc, nc, game, m.density, attacker, 1, opts);
    result.log.save_csv(workdir / m.name / "training_log.csv");

    const eval::NetworkPatroller trained(result.weights);
    const auto a = eval::evaluate(trained, attacker, "heuristic", game, m.density, 1000, 5);
    const auto b =
        eval::evaluate(eval::RandomPatroller{}, attacker, "heuristic", game, m.density, 1000, 5);
    eval::save_csv(a, workdir / m.name / "eval_network.csv");
    eval::save_csv(b, workdir / m.name / "eval_random.csv");
    const auto c = eval::compare(a, b);
    std::cerr << eval::format_comparison(c);
    o.require(c.reward.ci_low > 0.0,
              m.name + fmt(": reward diff %.3f CI [%.3f, %.3f] includes 0", c.reward.diff,
                           c.reward.ci_low, c.reward.ci_high));
    o.require(a.episode_lengths.mean < b.episode_lengths.mean,
              m.name + fmt(": length %.2f not below baseline %.2f", a.episode_lengths.mean,
                           b.episode_lengths.mean));
    parts.push_back(m.name +
                    fmt(" reward %+.2f [%.2f, %.2f]", c.reward.diff, c.reward.ci_low,
                        c.reward.ci_high) +
                    fmt(" length %.1f vs %.1f", a.episode_lengths.mean, b.episode_lengths.mean) +
                    fmt(" (%.0f min)", seconds_since(start) / 60.0));
  }
  if (o.pass) o.detail = parts[0] + "; " + parts[1];
  return o;
}

// 6. Mask range, exact suppression and recurrence.
Outcome mask_semantics() {
  Outcome o;
  const GameConfig game;
  const auto d = random_density_map(7, 11);
  const auto net = default_network(true, 2);
  const auto attacker = make_attacker_policy("heuristic");
  int passes = 0;
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t ep = 0; passes < 10000; ++ep) {
    auto streams = episode_streams(31, ep);
    GameState s = new_game(game, d, streams.game_seed);
    auto state = net.initial_state();
    while (s.status == Status::ongoing && passes < 10000) {
      const auto out = net.forward(encode_observation(s, game, d), &state);
      state = *out.next_lstm_state;
      ++passes;
      for (const nn::Tensor* m : {&out.policy_mask, &out.value_mask}) {
        for (double v : m->data()) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          o.require(v > 0.0 && v < 1.0, "mask value outside (0, 1)");
        }
      }
      Rng act(passes);
      const auto pa = agent::sample_action(out.policy_probs, act);
      AttackerAction aa;
      if (s.attacker) aa = attacker(make_attacker_view(s, game, d), streams.attacker);
      step(s, game, d, pa, aa);
    }
  }

  // A corner input cell reaches only the matching corner feature cell.
  const auto ff = default_network(false, 3);
  Rng rng(4);
  int suppressed = 0, visible = 0;
  const std::array<std::pair<int, int>, 4> corners = {{{0, 0}, {0, 6}, {6, 0}, {6, 6}}};
  for (int trial = 0; trial < 25; ++trial) {
    for (const auto& [r, c] : corners) {
      nn::Tensor x(ff.config().input_shape());
      for (double& v : x.data()) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
      nn::Tensor y = x;
      for (int ch = 0; ch < kObsChannels; ++ch) y.at(ch, r, c) = rng.uniform(-3.0, 3.0);
      nn::Tensor zero_at({1, 3, 3}, 1.0);
      zero_at.at(0, r / 3, c / 3) = 0.0;
      agent::ForwardOptions hide;
      hide.policy_mask_override = zero_at;
      hide.value_mask_override = zero_at;
      const auto a = ff.forward(x, nullptr, nullptr, hide);
      const auto b = ff.forward(y, nullptr, nullptr, hide);
      const bool same = a.logits == b.logits && a.value == b.value;
      o.require(same, "zero mask did not suppress the feature cell");
      suppressed += same;
      agent::ForwardOptions open;
      open.policy_mask_override = nn::Tensor({1, 3, 3}, 1.0);
      open.value_mask_override = nn::Tensor({1, 3, 3}, 1.0);
      const auto a2 = ff.forward(x, nullptr, nullptr, open);
      const auto b2 = ff.forward(y, nullptr, nullptr, open);
      visible += !(a2.logits == b2.logits && a2.value == b2.value);
    }
  }
  o.require(visible >= 90, "perturbation too weak to test suppression");

  // Same final input after different histories.
  auto run = [&](const agent::Network& n, const std::vector<nn::Tensor>& seq) {
    auto st = n.initial_state();
    agent::ForwardOutput out;
    for (const auto& x : seq) {
      out = n.config().use_convlstm ? n.forward(x, &st) : n.forward(x);
      if (out.next_lstm_state) st = *out.next_lstm_state;
    }
    return out;
  };
  const auto play = testing::play_random(game, d, 5);
  const auto play2 = testing::play_random(game, d, 6);
  std::vector<nn::Tensor> h1, h2;
  for (int k = 0; k < 6; ++k) {
    h1.push_back(encode_observation(play.states[k], game, d));
    h2.push_back(encode_observation(play2.states[k], game, d));
  }
  const nn::Tensor last = encode_observation(play.states[10], game, d);
  h1.push_back(last);
  h2.push_back(last);
  const auto r1 = run(net, h1), r2 = run(net, h2);
  o.require(!(r1.logits == r2.logits), "ConvLSTM output ignores history");
  const auto f1 = run(ff, h1), f2 = run(ff, h2);
  o.require(f1.logits == f2.logits && f1.value == f2.value,
            "feed-forward output depends on history");
  if (o.pass) {
    o.detail = std::to_string(passes) + " passes, masks in " + fmt("[%.3g, %.3g]", lo, hi) +
               ", " + std::to_string(suppressed) + "/100 suppressions exact";
  }
  return o;
}

// 7. Weight files and golden images.
Outcome persistence(const fs::path& workdir, const fs::path& golden_dir) {
  Outcome o;
  const GameConfig game;
  const auto d = random_density_map(7, 2);
  const auto net = default_network(true, 8);
  const fs::path path = workdir / "roundtrip.maa3c";
  agent::save_weights(net, path);
  const auto back = agent::load_weights(path, net.config());
  const auto play = testing::play_random(game, d, 3);
  auto sa = net.initial_state(), sb = back.initial_state();
  for (const auto& s : play.states) {
    const auto x = encode_observation(s, game, d);
    const auto a = net.forward(x, &sa), b = back.forward(x, &sb);
    o.require(a.logits == b.logits && a.value == b.value && a.policy_mask == b.policy_mask &&
                  a.value_mask == b.value_mask,
              "forward outputs differ after reload");
    sa = *a.next_lstm_state;
    sb = *b.next_lstm_state;
  }
  o.require(agent::weights_checksum(back) == agent::weights_checksum(net), "checksum differs");

  const Image frame = render_color(testing::scripted_state(game, d), game, d);
  o.require(encode_ppm(frame) == testing::read_file((golden_dir / "render_scripted.ppm").string()),
            "render differs from the golden frame");
  const std::vector<double> mask = {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
  o.require(encode_ppm(interp::overlay_heatmap(frame, mask, 3, 3)) ==
                testing::read_file((golden_dir / "overlay_scripted.ppm").string()),
            "overlay differs from the golden image");
  if (o.pass) {
    o.detail = std::to_string(play.states.size()) +
               " forward passes identical after reload; render and overlay match golden files";
  }
  return o;
}

}  // namespace
}  // namespace gsgi

int main(int argc, char** argv) {
  using namespace gsgi;
  CLI::App app("Acceptance criteria");
  std::vector<int> only;
  std::string workdir = "acceptance_work";
  std::string golden = GSGI_GOLDEN_DIR;
  app.add_option("criteria", only, "Criteria to run (default: all)")->check(CLI::Range(1, 7));
  app.add_option("--workdir", workdir, "Directory for training artifacts");
  app.add_option("--golden", golden, "Golden image directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient oracle", gradient_oracle},
      {"environment invariants", environment_invariants},
      {"observation contract", observation_contract},
      {"determinism and replay", determinism_and_replay},
      {"learning outcome", [&] { return learning_outcome(workdir); }},
      {"mask semantics", mask_semantics},
      {"persistence", [&] { return persistence(workdir, golden); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << "criterion " << id << " " << criteria[i].first << ": "
              << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
