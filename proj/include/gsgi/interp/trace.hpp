#pragma once

// Episode traces: one JSON object per line, a header followed by one line
// per step, so a trace cut short by an aborted run still parses.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsgi/agent/network.hpp"
#include "gsgi/env.hpp"

namespace gsgi::interp {

struct TraceHeader {
  GameConfig game;
  std::optional<agent::NetworkConfig> network;
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  std::uint64_t game_seed = 0;
  std::string attacker;
  std::string patroller;
  std::vector<double> density;  // row-major, grid_side^2 values
  std::optional<std::uint64_t> weights_checksum;
  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct MaskGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major
  friend bool operator==(const MaskGrid&, const MaskGrid&) = default;
};

struct TraceStep {
  int t = 0;
  std::string observation;  // path of the encoded observation, relative to the trace
  PatrollerAction action = Move::stand_still;
  std::optional<AttackerAction> attacker_action;  // empty once the attacker is gone
  std::vector<double> policy_probs;
  std::optional<double> value;
  std::optional<MaskGrid> policy_mask;
  std::optional<MaskGrid> value_mask;
  double reward = 0.0;
  std::vector<Event> events;
  Status status = Status::ongoing;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct EpisodeTrace {
  TraceHeader header;
  std::vector<TraceStep> steps;
  // Set by parse_trace when the final line was cut off and dropped.
  bool truncated = false;

  int length() const { return static_cast<int>(steps.size()); }
  double total_reward() const;
  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

std::string format_header_line(const TraceHeader& h);
std::string format_step_line(const TraceStep& s);
std::string format_trace(const EpisodeTrace& trace);
// Throws FormatError; a malformed final line is dropped and flagged instead.
EpisodeTrace parse_trace(std::string_view text);

void save_trace(const EpisodeTrace& trace, const std::filesystem::path& path);
EpisodeTrace load_trace(const std::filesystem::path& path);

// FNV-1a of the formatted trace.
std::uint64_t trace_checksum(const EpisodeTrace& trace);

struct ReplayResult {
  bool ok = true;
  int steps_checked = 0;
  std::string message;
};

// Re-simulates the episode from the header seed and the recorded actions and
// checks every reward, event and status exactly.
ReplayResult replay_trace(const EpisodeTrace& trace);

}  // namespace gsgi::interp
