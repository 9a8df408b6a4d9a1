#pragma once

// Traced rollouts of a trained patroller with attention-map images.

#include <cstdint>
#include <filesystem>
#include <string>

#include "gsgi/agent/network.hpp"
#include "gsgi/env.hpp"
#include "gsgi/interp/overlay.hpp"
#include "gsgi/interp/trace.hpp"

namespace gsgi::interp {

struct RolloutOptions {
  std::string attacker = "heuristic";
  bool greedy = true;
  std::uint64_t episode = 0;
  Upsample upsample = Upsample::bilinear;
};

// Plays one episode and, when out_dir is non-empty, writes
//   trace.jsonl
//   obs/step_NNN.txt            encoded observation seen at step NNN
//   frames/step_NNN.ppm         color rendering of the same state
//   overlays/policy_NNN.ppm     policy mask over the frame
//   overlays/value_NNN.ppm      value mask over the frame
EpisodeTrace record_rollout(const agent::Network& net, const GameConfig& game,
                            const DensityMap& density, std::uint64_t seed,
                            const std::filesystem::path& out_dir,
                            const RolloutOptions& options = {});

// Loads weights (checking the sidecar manifest next to them when present)
// and records a rollout. Throws FormatError or ConfigError on a mismatch.
EpisodeTrace rollout_with_maps(const std::filesystem::path& weights,
                               const GameConfig& game, const DensityMap& density,
                               std::uint64_t seed, const std::filesystem::path& out_dir,
                               const RolloutOptions& options = {});

// Sidecar manifest path for a weight file: same stem, ".json".
std::filesystem::path manifest_path(const std::filesystem::path& weights);

}  // namespace gsgi::interp
