#include "gsgi/env.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gsgi/errors.hpp"

namespace gsgi {

namespace {

Heading heading_of(Move m) {
  switch (m) {
    case Move::up:
      return Heading::north;
    case Move::down:
      return Heading::south;
    case Move::right:
      return Heading::east;
    case Move::left:
      return Heading::west;
    case Move::stand_still:
      break;
  }
  throw UsageError("stand_still has no heading");
}

void leave_prints(GameState& s, const GameConfig& cfg, Agent agent, Cell from,
                  Cell to, Move m) {
  if (from == to) return;
  const Heading h = heading_of(m);
  s.footprints[cfg.cell_index(from)] |= footprint_flag(agent, h, Sense::leaving);
  s.footprints[cfg.cell_index(to)] |= footprint_flag(agent, h, Sense::entering);
}

// The patroller learns the attacker prints of whatever cell she stands in.
void observe_cell(GameState& s, const GameConfig& cfg, Cell c) {
  const int idx = cfg.cell_index(c);
  s.observed[idx] = 1;
  s.known_attacker_prints[idx] = s.footprints[idx] & 0xFF00;
}

}  // namespace

int attacker_action_index(AttackerAction a) {
  return static_cast<int>(a.move) * 2 + (a.place_snare ? 1 : 0);
}

AttackerAction attacker_action_from_index(int index) {
  if (index < 0 || index >= kNumAttackerActions) {
    throw UsageError("attacker action index out of range");
  }
  return {static_cast<Move>(index / 2), (index % 2) == 1};
}

std::string_view move_name(Move m) {
  switch (m) {
    case Move::up:
      return "up";
    case Move::down:
      return "down";
    case Move::right:
      return "right";
    case Move::left:
      return "left";
    case Move::stand_still:
      return "stand_still";
  }
  return "?";
}

std::optional<Move> parse_move(std::string_view name) {
  for (int i = 0; i < kNumMoves; ++i) {
    if (move_name(static_cast<Move>(i)) == name) return static_cast<Move>(i);
  }
  return std::nullopt;
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::ongoing:
      return "ONGOING";
    case Status::captured:
      return "CAPTURED";
    case Status::timeout:
      return "TIMEOUT";
  }
  return "?";
}

std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::snare_removed:
      return "SNARE_REMOVED";
    case EventKind::capture:
      return "CAPTURE";
    case EventKind::attack_success:
      return "ATTACK_SUCCESS";
    case EventKind::attacker_exited:
      return "ATTACKER_EXITED";
    case EventKind::timeout:
      return "TIMEOUT";
  }
  return "?";
}

void GameConfig::validate() const {
  if (grid_side < 3 || grid_side % 2 == 0) {
    throw ConfigError("grid_side must be odd and at least 3");
  }
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (max_snares < 0) throw ConfigError("max_snares must be non-negative");
  if (!std::isfinite(reward_snare_removal) || !std::isfinite(reward_capture)) {
    throw ConfigError("rewards must be finite");
  }
}

std::array<Cell, 4> GameConfig::corners() const {
  const int e = grid_side - 1;
  return {Cell{0, 0}, Cell{0, e}, Cell{e, 0}, Cell{e, e}};
}

DensityMap::DensityMap(int side, std::vector<double> values)
    : side_(side), values_(std::move(values)) {
  if (side < 1 || values_.size() != static_cast<std::size_t>(side) * side) {
    throw ConfigError("density map size does not match its side");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("density values must lie in [0, 1]");
    }
  }
}

DensityMap random_density_map(int grid_side, std::uint64_t seed) {
  if (grid_side < 1) throw ConfigError("grid_side must be positive");
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(grid_side) * grid_side);
  for (double& x : v) x = 0.5 * rng.uniform();
  return DensityMap(grid_side, std::move(v));
}

DensityMap gaussian_density_map(int grid_side, double peak, double sigma) {
  if (grid_side < 1) throw ConfigError("grid_side must be positive");
  if (!(peak > 0.0 && peak <= 1.0)) throw ConfigError("peak must be in (0, 1]");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  const double mid = (grid_side - 1) / 2.0;
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(grid_side) * grid_side);
  for (int r = 0; r < grid_side; ++r) {
    for (int c = 0; c < grid_side; ++c) {
      const double d2 = (r - mid) * (r - mid) + (c - mid) * (c - mid);
      v.push_back(peak * std::exp(-d2 / (2.0 * sigma * sigma)));
    }
  }
  return DensityMap(grid_side, std::move(v));
}

std::string format_density(const DensityMap& map) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int r = 0; r < map.side(); ++r) {
    for (int c = 0; c < map.side(); ++c) {
      if (c) os << ' ';
      os << map.at(r, c);
    }
    os << '\n';
  }
  return os.str();
}

DensityMap parse_density(std::string_view text) {
  std::vector<double> values;
  int rows = 0;
  int cols = -1;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int n = 0;
    std::string tok;
    while (ls >> tok) {
      double x = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw FormatError("density map: bad number '" + tok + "'");
      }
      values.push_back(x);
      ++n;
    }
    if (cols >= 0 && n != cols) throw FormatError("density map: ragged rows");
    cols = n;
    ++rows;
  }
  if (rows == 0 || rows != cols) {
    throw FormatError("density map must be a non-empty square grid");
  }
  return DensityMap(rows, std::move(values));
}

void save_density(const DensityMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_density(map);
}

DensityMap load_density(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_density(ss.str());
}

int GameState::active_snares() const {
  int n = 0;
  for (const auto& s : snares) n += s.active ? 1 : 0;
  return n;
}

int GameState::removed_snares() const {
  return static_cast<int>(snares.size()) - active_snares();
}

Cell apply_move(Cell from, Move m, int grid_side) {
  Cell to = from;
  switch (m) {
    case Move::up:
      --to.row;
      break;
    case Move::down:
      ++to.row;
      break;
    case Move::right:
      ++to.col;
      break;
    case Move::left:
      --to.col;
      break;
    case Move::stand_still:
      break;
  }
  if (to.row < 0 || to.col < 0 || to.row >= grid_side || to.col >= grid_side) {
    return from;
  }
  return to;
}

EpisodeStreams episode_streams(std::uint64_t run_seed, std::uint64_t episode) {
  const Rng root = Rng(run_seed).split(episode);
  return {root.split(0).next(), root.split(1), root.split(2)};
}

int manhattan(Cell a, Cell b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

GameState new_game(const GameConfig& config, const DensityMap& density,
                   std::uint64_t seed) {
  config.validate();
  if (density.side() != config.grid_side) {
    throw ConfigError("density map side " + std::to_string(density.side()) +
                      " does not match grid_side " +
                      std::to_string(config.grid_side));
  }
  GameState s;
  s.rng = Rng(seed);
  s.patroller = config.center();
  s.entry_corner = config.corners()[s.rng.below(4)];
  s.attacker = s.entry_corner;
  const auto n = static_cast<std::size_t>(config.num_cells());
  s.footprints.assign(n, 0);
  s.observed.assign(n, 0);
  s.known_attacker_prints.assign(n, 0);
  s.visits.assign(n, 0);
  s.visits[config.cell_index(s.patroller)] = 1;
  observe_cell(s, config, s.patroller);
  return s;
}

Status check_termination(const GameState& state, const GameConfig& config) {
  if (state.attacker_captured &&
      (config.terminate_on_capture || state.active_snares() == 0)) {
    return Status::captured;
  }
  if (state.t >= config.horizon) return Status::timeout;
  return Status::ongoing;
}

StepOutcome step(GameState& s, const GameConfig& cfg, const DensityMap& density,
                 PatrollerAction patroller_action,
                 AttackerAction attacker_action) {
  if (s.status != Status::ongoing) {
    throw UsageError("step called on a terminated game");
  }
  StepOutcome out;
  double reward = 0.0;

  const Cell p_from = s.patroller;
  const Cell p_to = apply_move(p_from, patroller_action, cfg.grid_side);
  s.patroller = p_to;
  leave_prints(s, cfg, Agent::patroller, p_from, p_to, patroller_action);

  if (s.attacker) {
    const Cell a_from = *s.attacker;
    const Cell a_to = apply_move(a_from, attacker_action.move, cfg.grid_side);
    if (attacker_action.place_snare && s.snares_placed < cfg.max_snares) {
      bool occupied = false;
      for (const auto& sn : s.snares) occupied |= sn.active && sn.cell == a_from;
      if (!occupied) {
        s.snares.push_back({a_from, true, s.t, false});
        ++s.snares_placed;
      }
    }
    s.attacker = a_to;
    leave_prints(s, cfg, Agent::attacker, a_from, a_to, attacker_action.move);
    if (a_to != s.entry_corner) {
      s.attacker_left_corner = true;
    } else if (s.attacker_left_corner) {
      s.attacker.reset();
      s.attacker_exited = true;
      out.events.push_back({EventKind::attacker_exited, a_to, 0.0});
    }
  }

  observe_cell(s, cfg, p_to);
  ++s.visits[cfg.cell_index(p_to)];

  for (auto& sn : s.snares) {
    if (sn.active && sn.cell == p_to) {
      sn.active = false;
      reward += cfg.reward_snare_removal;
      out.events.push_back({EventKind::snare_removed, p_to, 0.0});
    }
  }

  if (s.attacker && *s.attacker == p_to) {
    s.attacker.reset();
    s.attacker_captured = true;
    reward += cfg.reward_capture;
    out.events.push_back({EventKind::capture, p_to, 0.0});
  }

  if (!s.attacker_exited) {
    for (auto& sn : s.snares) {
      if (!sn.active) continue;
      if (cfg.attack_mode == AttackMode::once_per_snare && sn.has_struck) {
        continue;
      }
      const double p = density.at(sn.cell);
      if (s.rng.bernoulli(p)) {
        sn.has_struck = true;
        reward -= p;
        out.events.push_back({EventKind::attack_success, sn.cell, p});
      }
    }
  }

  ++s.t;
  s.status = check_termination(s, cfg);
  if (s.status == Status::timeout) {
    out.events.push_back({EventKind::timeout, p_to, 0.0});
  }
  out.patroller_reward = reward;
  out.attacker_reward = -reward;
  return out;
}

}  // namespace gsgi
