#include "gsgi/eval/policy.hpp"

#include "gsgi/agent/observe.hpp"

namespace gsgi::eval {

PatrollerAction RandomPatroller::act(const GameState&, const GameConfig&,
                                     const DensityMap&, Rng& rng) {
  return static_cast<Move>(rng.below(kNumMoves));
}

std::unique_ptr<PatrollerPolicy> RandomPatroller::clone() const {
  return std::make_unique<RandomPatroller>(*this);
}

std::unique_ptr<PatrollerPolicy> StillPatroller::clone() const {
  return std::make_unique<StillPatroller>(*this);
}

NetworkPatroller::NetworkPatroller(agent::Network net, bool greedy)
    : net_(std::move(net)), greedy_(greedy) {
  begin_episode();
}

std::string NetworkPatroller::name() const {
  return greedy_ ? "network-greedy" : "network-stochastic";
}

void NetworkPatroller::begin_episode() {
  if (net_.config().use_convlstm) lstm_ = net_.initial_state();
  last_.reset();
}

PatrollerAction NetworkPatroller::act(const GameState& state, const GameConfig& game,
                                      const DensityMap& density, Rng& rng) {
  const auto& cfg = net_.config();
  const nn::Tensor obs = agent::observe(state, game, density, cfg.input_variant);
  agent::ForwardOutput out = net_.forward(obs, cfg.use_convlstm ? &lstm_ : nullptr);
  if (out.next_lstm_state) lstm_ = *out.next_lstm_state;
  const PatrollerAction a = agent::sample_action(out.policy_probs, rng, greedy_);
  last_ = std::move(out);
  return a;
}

std::unique_ptr<PatrollerPolicy> NetworkPatroller::clone() const {
  return std::make_unique<NetworkPatroller>(*this);
}

}  // namespace gsgi::eval
