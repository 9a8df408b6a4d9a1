#pragma once

// JSON forms of the configuration structs, used in trace headers and
// checkpoint manifests.

#include <json.hpp>

#include "gsgi/agent/loss.hpp"
#include "gsgi/agent/network.hpp"
#include "gsgi/env.hpp"
#include "gsgi/errors.hpp"

namespace gsgi {

inline void to_json(nlohmann::json& j, const GameConfig& c) {
  j = {{"grid_side", c.grid_side},
       {"horizon", c.horizon},
       {"max_snares", c.max_snares},
       {"reward_snare_removal", c.reward_snare_removal},
       {"reward_capture", c.reward_capture},
       {"attack_mode", c.attack_mode == AttackMode::per_step ? "per_step" : "once_per_snare"},
       {"terminate_on_capture", c.terminate_on_capture},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, GameConfig& c) {
  c.grid_side = j.at("grid_side").get<int>();
  c.horizon = j.at("horizon").get<int>();
  c.max_snares = j.at("max_snares").get<int>();
  c.reward_snare_removal = j.at("reward_snare_removal").get<double>();
  c.reward_capture = j.at("reward_capture").get<double>();
  const auto mode = j.at("attack_mode").get<std::string>();
  if (mode == "per_step") {
    c.attack_mode = AttackMode::per_step;
  } else if (mode == "once_per_snare") {
    c.attack_mode = AttackMode::once_per_snare;
  } else {
    throw FormatError("unknown attack_mode " + mode);
  }
  c.terminate_on_capture = j.at("terminate_on_capture").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
}

namespace agent {

inline void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = {{"input_variant", std::string(variant_name(c.input_variant))},
       {"use_convlstm", c.use_convlstm},
       {"feature_channels", c.feature_channels},
       {"mlp_hidden", c.mlp_hidden},
       {"grid_side", c.grid_side}};
}

inline void from_json(const nlohmann::json& j, NetworkConfig& c) {
  const auto v = parse_variant(j.at("input_variant").get<std::string>());
  if (!v) throw FormatError("unknown input_variant");
  c.input_variant = *v;
  c.use_convlstm = j.at("use_convlstm").get<bool>();
  c.feature_channels = j.at("feature_channels").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.grid_side = j.at("grid_side").get<int>();
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"gamma", c.gamma},
       {"rollout_n", c.rollout_n},
       {"learning_rate", c.learning_rate},
       {"entropy_coef", c.entropy_coef},
       {"value_coef", c.value_coef},
       {"workers", c.workers},
       {"total_episodes", c.total_episodes},
       {"grad_clip_norm", c.grad_clip_norm},
       {"rmsprop_decay", c.rmsprop_decay},
       {"rmsprop_eps", c.rmsprop_eps}};
}

}  // namespace agent
}  // namespace gsgi
