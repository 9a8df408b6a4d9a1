#include "gsgi/train/shared_parameters.hpp"

#include <cmath>
#include <mutex>

#include "gsgi/errors.hpp"

namespace gsgi::train {

double global_norm(std::span<const double> grads) {
  double s = 0.0;
  for (double g : grads) s += g * g;
  return std::sqrt(s);
}

RmsProp::RmsProp(std::size_t size, const agent::TrainConfig& cfg)
    : square_avg_(size, 0.0),
      lr_(cfg.learning_rate),
      decay_(cfg.rmsprop_decay),
      eps_(cfg.rmsprop_eps),
      clip_(cfg.grad_clip_norm) {}

double RmsProp::step(agent::Network& net, std::span<const double> grads) {
  if (grads.size() != square_avg_.size()) {
    throw UsageError("optimizer: gradient has " + std::to_string(grads.size()) +
                     " entries, expected " + std::to_string(square_avg_.size()));
  }
  const double norm = global_norm(grads);
  const double scale = norm > clip_ ? clip_ / norm : 1.0;
  std::size_t k = 0;
  for (agent::Parameter* p : net.parameters()) {
    for (double& w : p->value.data()) {
      const double g = grads[k] * scale;
      double& s = square_avg_[k];
      s = decay_ * s + (1.0 - decay_) * g * g;
      w -= lr_ * g / (std::sqrt(s) + eps_);
      ++k;
    }
  }
  return scale;
}

SharedParameters::SharedParameters(agent::Network net,
                                   const agent::TrainConfig& cfg)
    : net_(std::move(net)), optimizer_(net_.parameter_count(), cfg) {}

Snapshot SharedParameters::snapshot() const {
  std::shared_lock lock(mutex_);
  return {net_, version_};
}

std::uint64_t SharedParameters::apply_update(std::span<const double> grads) {
  for (double g : grads) {
    if (!std::isfinite(g)) {
      ++rejected_;
      std::shared_lock lock(mutex_);
      return version_;
    }
  }
  std::unique_lock lock(mutex_);
  optimizer_.step(net_, grads);
  ++version_;
  if (observer_) observer_(version_, net_);
  return version_;
}

std::uint64_t SharedParameters::version() const {
  std::shared_lock lock(mutex_);
  return version_;
}

void SharedParameters::set_update_observer(
    std::function<void(std::uint64_t, const agent::Network&)> observer) {
  std::unique_lock lock(mutex_);
  observer_ = std::move(observer);
}

}  // namespace gsgi::train
