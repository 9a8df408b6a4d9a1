#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gsgi/agent/network.hpp"

namespace gsgi::agent {

struct TrainConfig {
  double gamma = 0.99;
  int rollout_n = 20;
  double learning_rate = 1e-4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int workers = 8;
  int total_episodes = 100000;
  double grad_clip_norm = 40.0;
  double rmsprop_decay = 0.99;
  double rmsprop_eps = 1e-5;

  void validate() const;
};

// G_t = r_t + gamma * G_{t+1}, seeded with the bootstrap value.
std::vector<double> n_step_returns(std::span<const double> rewards,
                                   double bootstrap_value, double gamma);

struct LossResult {
  double total = 0.0;
  double policy_loss = 0.0;  // sum of -log pi(a) * advantage
  double value_loss = 0.0;   // sum of (G - V)^2
  double entropy = 0.0;      // sum of H(pi)
  std::vector<StepGrad> grads;
};

// sum_t [ -log pi(a_t) * A_t + value_coef * (G_t - V_t)^2 - entropy_coef * H(pi_t) ]
// with A_t = G_t - V_t treated as a constant. `fixed_advantages`, when given,
// replaces the computed A_t (used to evaluate the loss at perturbed weights
// while holding the advantage where it was).
LossResult a3c_loss(std::span<const ForwardOutput> outputs,
                    std::span<const PatrollerAction> actions,
                    std::span<const double> returns, const TrainConfig& cfg,
                    std::optional<std::span<const double>> fixed_advantages = {});

double entropy(const Tensor& probs);

}  // namespace gsgi::agent
