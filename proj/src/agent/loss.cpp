#include "gsgi/agent/loss.hpp"

#include <algorithm>
#include <cmath>

#include "gsgi/errors.hpp"

namespace gsgi::agent {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (rollout_n < 1) throw ConfigError("rollout_n must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (total_episodes < 0) throw ConfigError("total_episodes must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(grad_clip_norm > 0.0)) throw ConfigError("grad_clip_norm must be positive");
}

std::vector<double> n_step_returns(std::span<const double> rewards,
                                   double bootstrap_value, double gamma) {
  if (rewards.empty()) throw UsageError("n_step_returns: empty reward list");
  std::vector<double> out(rewards.size());
  double g = bootstrap_value;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    g = rewards[t] + gamma * g;
    out[t] = g;
  }
  return out;
}

namespace {

std::vector<double> log_softmax(const Tensor& logits) {
  double hi = logits[0];
  for (double z : logits.data()) hi = std::max(hi, z);
  double total = 0.0;
  for (double z : logits.data()) total += std::exp(z - hi);
  const double lse = hi + std::log(total);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = logits[k] - lse;
  return out;
}

}  // namespace

double entropy(const Tensor& probs) {
  double h = 0.0;
  for (double p : probs.data()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

LossResult a3c_loss(std::span<const ForwardOutput> outputs,
                    std::span<const PatrollerAction> actions,
                    std::span<const double> returns, const TrainConfig& cfg,
                    std::optional<std::span<const double>> fixed_advantages) {
  const std::size_t n = outputs.size();
  if (actions.size() != n || returns.size() != n ||
      (fixed_advantages && fixed_advantages->size() != n)) {
    throw UsageError("a3c_loss: trajectory lengths differ");
  }
  LossResult r;
  r.grads.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const ForwardOutput& o = outputs[t];
    const Tensor& p = o.policy_probs;
    const int a = static_cast<int>(actions[t]);
    const double td = returns[t] - o.value;
    const double adv = fixed_advantages ? (*fixed_advantages)[t] : td;
    const std::vector<double> logp = log_softmax(o.logits);
    double h = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) h -= p[k] * logp[k];
    r.policy_loss += -logp[static_cast<std::size_t>(a)] * adv;
    r.value_loss += td * td;
    r.entropy += h;

    // d(-log p_a)/dz_k = p_k - [k == a];  d(-H)/dz_k = p_k (log p_k + H).
    Tensor g(p.shape());
    for (int k = 0; k < static_cast<int>(p.size()); ++k) {
      g[k] = adv * (p[k] - (k == a ? 1.0 : 0.0)) +
             cfg.entropy_coef * p[k] * (logp[k] + h);
    }
    r.grads[t].logits = std::move(g);
    r.grads[t].value = -2.0 * cfg.value_coef * td;
  }
  r.total = r.policy_loss + cfg.value_coef * r.value_loss - cfg.entropy_coef * r.entropy;
  return r;
}

}  // namespace gsgi::agent
