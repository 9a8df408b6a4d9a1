#include "gsgi/interp/trace.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "gsgi/agent/config_json.hpp"
#include "gsgi/checksum.hpp"
#include "gsgi/errors.hpp"

namespace gsgi::interp {

namespace {

using nlohmann::json;

json mask_json(const MaskGrid& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"values", m.values}};
}

MaskGrid mask_from(const json& j) {
  MaskGrid m;
  m.rows = j.at("rows").get<int>();
  m.cols = j.at("cols").get<int>();
  m.values = j.at("values").get<std::vector<double>>();
  if (m.rows < 1 || m.cols < 1 ||
      m.values.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    throw FormatError("trace: mask size does not match its dimensions");
  }
  return m;
}

Move move_from(const json& j) {
  const auto m = parse_move(j.get<std::string>());
  if (!m) throw FormatError("trace: unknown move " + j.dump());
  return *m;
}

Status status_from(std::string_view name) {
  for (Status s : {Status::ongoing, Status::captured, Status::timeout}) {
    if (status_name(s) == name) return s;
  }
  throw FormatError("trace: unknown status " + std::string(name));
}

EventKind event_from(std::string_view name) {
  for (EventKind k : {EventKind::snare_removed, EventKind::capture,
                      EventKind::attack_success, EventKind::attacker_exited,
                      EventKind::timeout}) {
    if (event_name(k) == name) return k;
  }
  throw FormatError("trace: unknown event " + std::string(name));
}

TraceHeader header_from(const json& j) {
  TraceHeader h;
  h.game = j.at("game").get<GameConfig>();
  if (j.contains("network")) h.network = j.at("network").get<agent::NetworkConfig>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.episode = j.at("episode").get<std::uint64_t>();
  h.game_seed = j.at("game_seed").get<std::uint64_t>();
  h.attacker = j.at("attacker").get<std::string>();
  h.patroller = j.at("patroller").get<std::string>();
  h.density = j.at("density").get<std::vector<double>>();
  if (j.contains("weights_checksum")) {
    h.weights_checksum = std::stoull(j.at("weights_checksum").get<std::string>(), nullptr, 16);
  }
  return h;
}

TraceStep step_from(const json& j) {
  TraceStep s;
  s.t = j.at("t").get<int>();
  s.observation = j.value("observation", "");
  s.action = move_from(j.at("action"));
  if (j.contains("attacker_action")) {
    const auto& a = j.at("attacker_action");
    s.attacker_action = AttackerAction{move_from(a.at("move")), a.at("place_snare").get<bool>()};
  }
  s.policy_probs = j.value("policy_probs", std::vector<double>{});
  if (j.contains("value")) s.value = j.at("value").get<double>();
  if (j.contains("policy_mask")) s.policy_mask = mask_from(j.at("policy_mask"));
  if (j.contains("value_mask")) s.value_mask = mask_from(j.at("value_mask"));
  s.reward = j.at("reward").get<double>();
  for (const auto& e : j.at("events")) {
    s.events.push_back({event_from(e.at("kind").get<std::string>()),
                        Cell{e.at("row").get<int>(), e.at("col").get<int>()},
                        e.at("penalty").get<double>()});
  }
  s.status = status_from(j.at("status").get<std::string>());
  return s;
}

std::string describe_events(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ", ";
    out += std::string(event_name(e.kind)) + "@" + std::to_string(e.cell.row) + "," +
           std::to_string(e.cell.col);
  }
  return "[" + out + "]";
}

}  // namespace

double EpisodeTrace::total_reward() const {
  double r = 0.0;
  for (const auto& s : steps) r += s.reward;
  return r;
}

std::string format_header_line(const TraceHeader& h) {
  json j = {{"kind", "header"},
            {"game", h.game},
            {"seed", h.seed},
            {"episode", h.episode},
            {"game_seed", h.game_seed},
            {"attacker", h.attacker},
            {"patroller", h.patroller},
            {"density", h.density}};
  if (h.network) j["network"] = *h.network;
  if (h.weights_checksum) j["weights_checksum"] = hex64(*h.weights_checksum);
  return j.dump() + "\n";
}

std::string format_step_line(const TraceStep& s) {
  json j = {{"kind", "step"},
            {"t", s.t},
            {"action", move_name(s.action)},
            {"reward", s.reward},
            {"status", status_name(s.status)}};
  if (!s.observation.empty()) j["observation"] = s.observation;
  if (s.attacker_action) {
    j["attacker_action"] = {{"move", move_name(s.attacker_action->move)},
                            {"place_snare", s.attacker_action->place_snare}};
  }
  if (!s.policy_probs.empty()) j["policy_probs"] = s.policy_probs;
  if (s.value) j["value"] = *s.value;
  if (s.policy_mask) j["policy_mask"] = mask_json(*s.policy_mask);
  if (s.value_mask) j["value_mask"] = mask_json(*s.value_mask);
  json events = json::array();
  for (const auto& e : s.events) {
    events.push_back({{"kind", event_name(e.kind)},
                      {"row", e.cell.row},
                      {"col", e.cell.col},
                      {"penalty", e.penalty}});
  }
  j["events"] = std::move(events);
  return j.dump() + "\n";
}

std::string format_trace(const EpisodeTrace& trace) {
  std::string out = format_header_line(trace.header);
  for (const auto& s : trace.steps) out += format_step_line(s);
  return out;
}

EpisodeTrace parse_trace(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    if (end > pos) lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  if (lines.empty()) throw FormatError("trace: empty");

  EpisodeTrace trace;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool last = i + 1 == lines.size();
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) {
      if (last && i > 0) {
        trace.truncated = true;
        break;
      }
      throw FormatError("trace: line " + std::to_string(i + 1) + " is not valid JSON");
    }
    try {
      const auto kind = j.at("kind").get<std::string>();
      if (i == 0) {
        if (kind != "header") throw FormatError("trace: first line must be the header");
        trace.header = header_from(j);
      } else if (kind == "step") {
        trace.steps.push_back(step_from(j));
      } else {
        throw FormatError("trace: unexpected line kind " + kind);
      }
    } catch (const json::exception& e) {
      throw FormatError("trace: line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (trace.steps[i].t != static_cast<int>(i)) {
      throw FormatError("trace: steps out of order at line " + std::to_string(i + 2));
    }
  }
  return trace;
}

void save_trace(const EpisodeTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_trace(trace);
}

EpisodeTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

std::uint64_t trace_checksum(const EpisodeTrace& trace) {
  return fnv1a(format_trace(trace));
}

ReplayResult replay_trace(const EpisodeTrace& trace) {
  ReplayResult r;
  auto fail = [&](int t, const std::string& what) {
    r.ok = false;
    r.message = "step " + std::to_string(t) + ": " + what;
    return r;
  };
  const auto& h = trace.header;
  const DensityMap density(h.game.grid_side, h.density);
  GameState state = new_game(h.game, density, h.game_seed);
  for (const auto& s : trace.steps) {
    if (state.status != Status::ongoing) return fail(s.t, "game already over");
    if (state.t != s.t) return fail(s.t, "time mismatch");
    if (state.attacker.has_value() != s.attacker_action.has_value()) {
      return fail(s.t, "attacker presence mismatch");
    }
    const StepOutcome o =
        step(state, h.game, density, s.action, s.attacker_action.value_or(AttackerAction{}));
    if (o.patroller_reward != s.reward) {
      std::ostringstream os;
      os << std::setprecision(17) << "reward " << o.patroller_reward << " != recorded "
         << s.reward;
      return fail(s.t, os.str());
    }
    if (o.events != s.events) {
      return fail(s.t, "events " + describe_events(o.events) + " != recorded " +
                           describe_events(s.events));
    }
    if (state.status != s.status) return fail(s.t, "status mismatch");
    ++r.steps_checked;
  }
  if (!trace.truncated && state.status == Status::ongoing) {
    return fail(state.t, "trace ends before the episode does");
  }
  r.message = "replayed " + std::to_string(r.steps_checked) + " steps";
  return r;
}

}  // namespace gsgi::interp
