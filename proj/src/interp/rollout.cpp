#include "gsgi/interp/rollout.hpp"

#include <cstdio>
#include <fstream>

#include "gsgi/adversary.hpp"
#include "gsgi/agent/config_json.hpp"
#include "gsgi/agent/weights.hpp"
#include "gsgi/errors.hpp"
#include "gsgi/eval/policy.hpp"
#include "gsgi/interp/tensor_text.hpp"
#include "gsgi/obs.hpp"

namespace gsgi::interp {

namespace {

std::string numbered(const char* stem, int t, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03d%s", stem, t, ext);
  return buf;
}

MaskGrid to_grid(const nn::Tensor& mask) {
  return {mask.dim(1), mask.dim(2), mask.to_vector()};
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& weights) {
  auto p = weights;
  return p.replace_extension(".json");
}

EpisodeTrace record_rollout(const agent::Network& net, const GameConfig& game,
                            const DensityMap& density, std::uint64_t seed,
                            const std::filesystem::path& out_dir,
                            const RolloutOptions& options) {
  const auto& cfg = net.config();
  if (cfg.input_variant == agent::InputVariant::encoded_20ch &&
      cfg.grid_side != game.grid_side) {
    throw ConfigError("network grid_side " + std::to_string(cfg.grid_side) +
                      " does not match the game grid_side " +
                      std::to_string(game.grid_side));
  }
  const AttackerPolicy attacker = make_attacker_policy(options.attacker);
  const bool write = !out_dir.empty();
  if (write) {
    for (const char* sub : {"obs", "frames", "overlays"}) {
      std::filesystem::create_directories(out_dir / sub);
    }
  }

  EpisodeStreams streams = episode_streams(seed, options.episode);
  GameState state = new_game(game, density, streams.game_seed);
  eval::NetworkPatroller patroller(net, options.greedy);

  EpisodeTrace trace;
  auto& h = trace.header;
  h.game = game;
  h.network = cfg;
  h.seed = seed;
  h.episode = options.episode;
  h.game_seed = streams.game_seed;
  h.attacker = options.attacker;
  h.patroller = patroller.name();
  h.density = density.values();
  h.weights_checksum = agent::weights_checksum(net);

  while (state.status == Status::ongoing) {
    TraceStep s;
    s.t = state.t;
    if (write) {
      s.observation = "obs/" + numbered("step", s.t, ".txt");
      save_tensor(encode_observation(state, game, density), out_dir / s.observation);
    }
    const Image frame = render_color(state, game, density);
    s.action = patroller.act(state, game, density, streams.patroller);
    const agent::ForwardOutput& out = *patroller.last_output();
    s.policy_probs = out.policy_probs.to_vector();
    s.value = out.value;
    s.policy_mask = to_grid(out.policy_mask);
    s.value_mask = to_grid(out.value_mask);
    if (write) {
      write_ppm(frame, out_dir / "frames" / numbered("step", s.t, ".ppm"));
      write_overlay(frame, s.policy_mask->values, s.policy_mask->rows,
                    s.policy_mask->cols,
                    out_dir / "overlays" / numbered("policy", s.t, ".ppm"),
                    options.upsample);
      write_overlay(frame, s.value_mask->values, s.value_mask->rows,
                    s.value_mask->cols,
                    out_dir / "overlays" / numbered("value", s.t, ".ppm"),
                    options.upsample);
    }
    if (state.attacker) {
      s.attacker_action =
          attacker(make_attacker_view(state, game, density), streams.attacker);
    }
    const StepOutcome o = step(state, game, density, s.action,
                               s.attacker_action.value_or(AttackerAction{}));
    s.reward = o.patroller_reward;
    s.events = o.events;
    s.status = state.status;
    trace.steps.push_back(std::move(s));
  }
  if (write) save_trace(trace, out_dir / "trace.jsonl");
  return trace;
}

EpisodeTrace rollout_with_maps(const std::filesystem::path& weights,
                               const GameConfig& game, const DensityMap& density,
                               std::uint64_t seed, const std::filesystem::path& out_dir,
                               const RolloutOptions& options) {
  agent::Network net = agent::load_weights(weights);
  const auto manifest = manifest_path(weights);
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("network")) {
      throw FormatError("unreadable weight manifest " + manifest.string());
    }
    const auto expected = j.at("network").get<agent::NetworkConfig>();
    if (!(expected == net.config())) {
      throw FormatError("weight file " + weights.string() + " holds " +
                        agent::format_network_config(net.config()) +
                        " but its manifest says " +
                        agent::format_network_config(expected));
    }
  }
  return record_rollout(net, game, density, seed, out_dir, options);
}

}  // namespace gsgi::interp
