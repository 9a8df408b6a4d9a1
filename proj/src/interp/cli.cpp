#include "gsgi/interp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>

#include "gsgi/adversary.hpp"
#include "gsgi/agent/checks.hpp"
#include "gsgi/agent/weights.hpp"
#include "gsgi/checksum.hpp"
#include "gsgi/errors.hpp"
#include "gsgi/eval/eval.hpp"
#include "gsgi/interp/rollout.hpp"
#include "gsgi/interp/tensor_text.hpp"
#include "gsgi/obs.hpp"
#include "gsgi/train/trainer.hpp"

namespace gsgi::interp {

namespace {

struct GameFlags {
  GameConfig game;
  std::string attack_mode = "per_step";
  std::string map = "random";
  std::string density_file;
  std::uint64_t map_seed = 0;
  double peak = 0.6;
  double sigma = 2.0;

  void add(CLI::App& app) {
    app.add_option("--grid-side", game.grid_side, "Grid side length (odd)")
        ->capture_default_str();
    app.add_option("--horizon", game.horizon, "Episode step limit")->capture_default_str();
    app.add_option("--max-snares", game.max_snares, "Snares the attacker may lay")
        ->capture_default_str();
    app.add_option("--reward-snare", game.reward_snare_removal, "Reward per removed snare")
        ->capture_default_str();
    app.add_option("--reward-capture", game.reward_capture, "Reward for a capture")
        ->capture_default_str();
    app.add_option("--attack-mode", attack_mode, "per_step or once_per_snare")
        ->check(CLI::IsMember({"per_step", "once_per_snare"}))
        ->capture_default_str();
    app.add_option("--terminate-on-capture", game.terminate_on_capture,
                   "End the episode at capture (1) or once no snares remain (0)")
        ->capture_default_str();
    app.add_option("--map", map, "Density map: random or gaussian")
        ->check(CLI::IsMember({"random", "gaussian"}))
        ->capture_default_str();
    app.add_option("--density-file", density_file, "Load the density map from a file");
    app.add_option("--map-seed", map_seed, "Seed of the random density map")
        ->capture_default_str();
    app.add_option("--peak", peak, "Gaussian map peak")->capture_default_str();
    app.add_option("--sigma", sigma, "Gaussian map width")->capture_default_str();
  }

  GameConfig config() const {
    GameConfig g = game;
    g.attack_mode =
        attack_mode == "per_step" ? AttackMode::per_step : AttackMode::once_per_snare;
    g.validate();
    return g;
  }

  DensityMap density() const {
    if (!density_file.empty()) return load_density(density_file);
    if (map == "gaussian") return gaussian_density_map(game.grid_side, peak, sigma);
    return random_density_map(game.grid_side, map_seed);
  }
};

void add_common(CLI::App& app, std::uint64_t& seed) {
  app.add_option("--config", "File of key=value lines; command-line flags take precedence");
  app.add_option("--seed", seed, "Run seed")->capture_default_str();
}

void attacker_option(CLI::App& app, std::string& name) {
  app.add_option("--attacker", name, "Scripted attacker: heuristic or random")
      ->check(CLI::IsMember({"heuristic", "random"}))
      ->capture_default_str();
}

int run_gradcheck(int seeds, std::ostream& out) {
  bool ok = true;
  out << std::left << std::setw(20) << "check" << std::setw(14) << "max_rel_err"
      << std::setw(10) << "tol" << "result\n";
  double overall = 0.0;
  for (const auto& check : agent::all_gradient_checks()) {
    double worst = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const auto r = nn::grad_check(check.make(static_cast<std::uint64_t>(s)));
      worst = std::max(worst, r.max_rel_error);
    }
    const bool pass = worst < check.tolerance;
    ok = ok && pass;
    overall = std::max(overall, worst);
    out << std::setw(20) << check.name << std::setw(14) << std::setprecision(3)
        << std::scientific << worst << std::setw(10) << check.tolerance
        << std::defaultfloat << (pass ? "PASS" : "FAIL") << "\n";
  }
  out << "worst " << std::scientific << std::setprecision(3) << overall
      << std::defaultfloat << "\n";
  return ok ? kExitOk : kExitFailure;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.starts_with(flag + "=");
  });
}

// Appends "--key=value" for every line of the --config file whose key is not
// given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::string line;
  int lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ParseError(path + ":" + std::to_string(lineno) + ": expected key=value",
                            CLI::ExitCodes::ConfigError);
    }
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.starts_with("--")) key = key.substr(2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty() || key == "config") continue;
    const std::string flag = "--" + key;
    if (!has_flag(args, flag)) extra.push_back(flag + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Patrolling agents for the green security game"};
  app.require_subcommand(1);

  // train
  CLI::App* train_cmd = app.add_subcommand("train", "Train a patroller network");
  std::uint64_t train_seed = 0;
  GameFlags train_game;
  agent::TrainConfig tc;
  agent::NetworkConfig nc;
  nc.use_convlstm = true;
  std::string train_input = "encoded_20ch";
  std::string train_attacker = "heuristic";
  std::string train_out;
  train::TrainOptions topts;
  add_common(*train_cmd, train_seed);
  train_game.add(*train_cmd);
  attacker_option(*train_cmd, train_attacker);
  train_cmd->add_option("--input", train_input, "encoded_20ch or color_rgb")
      ->check(CLI::IsMember({"encoded_20ch", "encoded", "color_rgb", "color"}))
      ->capture_default_str();
  train_cmd->add_option("--convlstm", nc.use_convlstm, "Use the ConvLSTM layer (1/0)")
      ->capture_default_str();
  train_cmd->add_option("--feature-channels", nc.feature_channels)->capture_default_str();
  train_cmd->add_option("--mlp-hidden", nc.mlp_hidden)->capture_default_str();
  train_cmd->add_option("--episodes", tc.total_episodes)->capture_default_str();
  train_cmd->add_option("--lr", tc.learning_rate)->capture_default_str();
  train_cmd->add_option("--gamma", tc.gamma)->capture_default_str();
  train_cmd->add_option("--rollout", tc.rollout_n)->capture_default_str();
  train_cmd->add_option("--entropy-coef", tc.entropy_coef)->capture_default_str();
  train_cmd->add_option("--value-coef", tc.value_coef)->capture_default_str();
  train_cmd->add_option("--clip", tc.grad_clip_norm)->capture_default_str();
  train_cmd->add_option("--rmsprop-decay", tc.rmsprop_decay)->capture_default_str();
  train_cmd->add_option("--rmsprop-eps", tc.rmsprop_eps)->capture_default_str();
  train_cmd->add_option("--workers", tc.workers, "Rollout workers")
      ->envname("GSGI_NUM_WORKERS")
      ->capture_default_str();
  train_cmd->add_option("--log-every", topts.log_every)->capture_default_str();
  train_cmd->add_option("--checkpoint-every", topts.checkpoint_every)
      ->capture_default_str();
  train_cmd->add_option("--init-seed", topts.init_seed)->capture_default_str();
  train_cmd->add_flag("--deterministic", topts.deterministic,
                      "Single worker, reproducible log");
  train_cmd->add_option("--out", train_out, "Output directory")->required();

  // eval
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a patroller");
  std::uint64_t eval_seed = 0;
  GameFlags eval_game;
  std::string eval_weights;
  std::string eval_patroller = "network";
  std::string eval_attacker = "heuristic";
  std::string eval_baseline;
  std::string eval_csv;
  int eval_episodes = 1000;
  int eval_workers = 1;
  bool eval_stochastic = false;
  add_common(*eval_cmd, eval_seed);
  eval_game.add(*eval_cmd);
  attacker_option(*eval_cmd, eval_attacker);
  eval_cmd->add_option("--weights", eval_weights, "Weight file of a trained network");
  eval_cmd->add_option("--patroller", eval_patroller, "network, random or still")
      ->check(CLI::IsMember({"network", "random", "still"}))
      ->capture_default_str();
  eval_cmd->add_option("--baseline", eval_baseline, "Also run and compare against: random or still")
      ->check(CLI::IsMember({"random", "still"}));
  eval_cmd->add_option("--episodes", eval_episodes)->capture_default_str();
  eval_cmd->add_option("--workers", eval_workers)
      ->envname("GSGI_NUM_WORKERS")
      ->capture_default_str();
  eval_cmd->add_flag("--stochastic", eval_stochastic, "Sample actions instead of argmax");
  eval_cmd->add_option("--csv", eval_csv, "Write per-episode rows here");

  // rollout
  CLI::App* rollout_cmd = app.add_subcommand("rollout", "Trace one episode with attention maps");
  std::uint64_t rollout_seed = 0;
  GameFlags rollout_game;
  std::string rollout_weights;
  std::string rollout_out;
  RolloutOptions ropts;
  bool rollout_nearest = false;
  add_common(*rollout_cmd, rollout_seed);
  rollout_game.add(*rollout_cmd);
  attacker_option(*rollout_cmd, ropts.attacker);
  rollout_cmd->add_option("--weights", rollout_weights, "Weight file")->required();
  rollout_cmd->add_option("--out", rollout_out, "Output directory")->required();
  rollout_cmd->add_option("--episode", ropts.episode)->capture_default_str();
  rollout_cmd->add_flag("--nearest", rollout_nearest, "Nearest-neighbor mask upsampling");

  // render
  CLI::App* render_cmd = app.add_subcommand("render", "Render a game state as a PPM image");
  std::uint64_t render_seed = 0;
  GameFlags render_game;
  int render_steps = 0;
  std::string render_out;
  std::string render_obs;
  add_common(*render_cmd, render_seed);
  render_game.add(*render_cmd);
  render_cmd->add_option("--steps", render_steps,
                         "Random-patroller steps against the heuristic attacker before rendering")
      ->capture_default_str();
  render_cmd->add_option("--out", render_out, "Output image")->required();
  render_cmd->add_option("--obs-out", render_obs, "Also write the encoded observation");

  // gradcheck
  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  std::uint64_t grad_seed = 0;
  int grad_seeds = 10;
  add_common(*grad_cmd, grad_seed);
  grad_cmd->add_option("--seeds", grad_seeds, "Random problems per check")
      ->capture_default_str();

  // maps
  CLI::App* maps_cmd = app.add_subcommand("maps", "Generate a density map");
  std::uint64_t maps_seed = 0;
  std::string maps_kind = "random";
  int maps_side = 7;
  double maps_peak = 0.6;
  double maps_sigma = 2.0;
  std::string maps_out;
  add_common(*maps_cmd, maps_seed);
  maps_cmd->add_option("--kind", maps_kind)
      ->check(CLI::IsMember({"random", "gaussian"}))
      ->capture_default_str();
  maps_cmd->add_option("--side", maps_side)->capture_default_str();
  maps_cmd->add_option("--peak", maps_peak)->capture_default_str();
  maps_cmd->add_option("--sigma", maps_sigma)->capture_default_str();
  maps_cmd->add_option("--out", maps_out, "Output file (stdout when omitted)");

  try {
    const auto expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (*train_cmd) {
      const auto variant = agent::parse_variant(train_input);
      nc.input_variant = *variant;
      const GameConfig game = train_game.config();
      nc.grid_side = game.grid_side;
      const DensityMap density = train_game.density();
      topts.checkpoint_dir = train_out;
      topts.on_log = [&out](const train::LogRecord& r) {
        out << "episodes " << r.episodes << " reward " << r.mean_reward << " length "
            << r.mean_length << " entropy " << r.entropy << std::endl;
      };
      const auto result = train::train(tc, nc, game, density,
                                       make_attacker_policy(train_attacker), train_seed,
                                       topts);
      result.log.save_csv(std::filesystem::path(train_out) / "training_log.csv");
      save_density(density, std::filesystem::path(train_out) / "density.txt");
      out << "updates " << result.updates << " rejected " << result.rejected_updates
          << "\nweights " << (std::filesystem::path(train_out) / "final.maa3c").string()
          << "\n";
      return kExitOk;
    }

    if (*eval_cmd) {
      const GameConfig game = eval_game.config();
      const DensityMap density = eval_game.density();
      auto make_policy = [&](const std::string& kind) -> std::unique_ptr<eval::PatrollerPolicy> {
        if (kind == "random") return std::make_unique<eval::RandomPatroller>();
        if (kind == "still") return std::make_unique<eval::StillPatroller>();
        if (eval_weights.empty()) {
          throw CLI::RequiredError("--weights (needed for --patroller network)");
        }
        return std::make_unique<eval::NetworkPatroller>(agent::load_weights(eval_weights),
                                                        !eval_stochastic);
      };
      std::unique_ptr<eval::PatrollerPolicy> policy;
      try {
        policy = make_policy(eval_patroller);
      } catch (const CLI::RequiredError& e) {
        err << e.what() << "\n" << eval_cmd->help();
        return kExitUsage;
      }
      const AttackerPolicy attacker = make_attacker_policy(eval_attacker);
      eval::EvalOptions eopts;
      eopts.workers = eval_workers;
      const auto stats = eval::evaluate(*policy, attacker, eval_attacker, game, density,
                                        eval_episodes, eval_seed, eopts);
      out << "patroller " << policy->name() << "\n" << eval::format_report(stats);
      if (!eval_csv.empty()) eval::save_csv(stats, eval_csv);
      if (!eval_baseline.empty()) {
        const auto base = make_policy(eval_baseline);
        const auto bstats = eval::evaluate(*base, attacker, eval_attacker, game, density,
                                           eval_episodes, eval_seed, eopts);
        out << "baseline " << base->name() << "\n"
            << eval::format_report(bstats) << "A = " << policy->name()
            << ", B = " << base->name() << "\n"
            << eval::format_comparison(eval::compare(stats, bstats, {.seed = eval_seed}));
      }
      return kExitOk;
    }

    if (*rollout_cmd) {
      ropts.upsample = rollout_nearest ? Upsample::nearest : Upsample::bilinear;
      const auto trace = rollout_with_maps(rollout_weights, rollout_game.config(),
                                           rollout_game.density(), rollout_seed,
                                           rollout_out, ropts);
      out << "steps " << trace.length() << "\nreward " << trace.total_reward()
          << "\nstatus " << status_name(trace.steps.back().status) << "\nchecksum "
          << hex64(trace_checksum(trace)) << "\n";
      return kExitOk;
    }

    if (*render_cmd) {
      const GameConfig game = render_game.config();
      const DensityMap density = render_game.density();
      EpisodeStreams streams = episode_streams(render_seed, 0);
      GameState state = new_game(game, density, streams.game_seed);
      const AttackerPolicy attacker = make_attacker_policy("heuristic");
      eval::RandomPatroller patroller;
      for (int i = 0; i < render_steps && state.status == Status::ongoing; ++i) {
        const PatrollerAction pa = patroller.act(state, game, density, streams.patroller);
        AttackerAction aa;
        if (state.attacker) {
          aa = attacker(make_attacker_view(state, game, density), streams.attacker);
        }
        step(state, game, density, pa, aa);
      }
      write_ppm(render_color(state, game, density), render_out);
      if (!render_obs.empty()) {
        save_tensor(encode_observation(state, game, density), render_obs);
      }
      out << "t " << state.t << " status " << status_name(state.status) << "\n";
      return kExitOk;
    }

    if (*grad_cmd) {
      if (grad_seeds < 1) {
        err << "--seeds must be at least 1\n";
        return kExitUsage;
      }
      return run_gradcheck(grad_seeds, out);
    }

    if (*maps_cmd) {
      const DensityMap map = maps_kind == "gaussian"
                                 ? gaussian_density_map(maps_side, maps_peak, maps_sigma)
                                 : random_density_map(maps_side, maps_seed);
      if (maps_out.empty()) {
        out << format_density(map);
      } else {
        save_density(map, maps_out);
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli(args, out, err);
}

}  // namespace gsgi::interp
