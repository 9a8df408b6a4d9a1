#include "gsgi/agent/checks.hpp"

#include "gsgi/agent/loss.hpp"
#include "gsgi/agent/network.hpp"

namespace gsgi::agent {

namespace {

struct Trajectory {
  std::vector<Tensor> obs;
  std::vector<PatrollerAction> actions;
  std::vector<double> returns;
};

std::vector<ForwardOutput> run(const Network& net, const Trajectory& traj,
                               std::vector<ForwardCache>* caches) {
  std::vector<ForwardOutput> outs;
  nn::ConvLstmState state = net.initial_state();
  if (caches) caches->resize(traj.obs.size());
  for (std::size_t t = 0; t < traj.obs.size(); ++t) {
    outs.push_back(net.forward(traj.obs[t], &state, caches ? &(*caches)[t] : nullptr));
    state = *outs.back().next_lstm_state;
  }
  return outs;
}

}  // namespace

nn::KernelCheck a3c_loss_check() {
  return {"a3c_loss", 1e-4, [](std::uint64_t seed) {
            NetworkConfig cfg;
            cfg.use_convlstm = true;
            cfg.feature_channels = 3;
            cfg.mlp_hidden = 6;
            cfg.grid_side = 5;
            Rng rng(seed);
            const Network base(cfg, rng.next());
            Trajectory traj;
            for (int t = 0; t < 3; ++t) {
              Tensor o(cfg.input_shape());
              for (double& x : o.data()) x = rng.uniform(-1.0, 1.0);
              traj.obs.push_back(std::move(o));
              traj.actions.push_back(static_cast<PatrollerAction>(rng.below(kNumMoves)));
              traj.returns.push_back(rng.uniform(-3.0, 3.0));
            }
            TrainConfig tc;
            tc.entropy_coef = 0.05;
            tc.value_coef = 0.5;

            std::vector<double> advantages;
            for (std::size_t t = 0; const auto& o : run(base, traj, nullptr)) {
              advantages.push_back(traj.returns[t++] - o.value);
            }

            nn::GradProblem p;
            for (const Parameter* param : base.parameters()) {
              p.names.push_back(param->name);
              p.variables.push_back(param->value);
            }
            auto with_values = [base](const std::vector<Tensor>& v) {
              Network net = base;
              auto params = net.parameters();
              for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = v[i];
              return net;
            };
            p.loss = [=](const std::vector<Tensor>& v) {
              const Network net = with_values(v);
              const auto outs = run(net, traj, nullptr);
              return a3c_loss(outs, traj.actions, traj.returns, tc,
                              std::span<const double>(advantages))
                  .total;
            };
            p.gradient = [=](const std::vector<Tensor>& v) {
              Network net = with_values(v);
              net.zero_grad();
              std::vector<ForwardCache> caches;
              const auto outs = run(net, traj, &caches);
              const LossResult loss = a3c_loss(outs, traj.actions, traj.returns, tc);
              net.backward(caches, loss.grads);
              std::vector<Tensor> g;
              for (const Parameter* param : net.parameters()) g.push_back(param->grad);
              return g;
            };
            return p;
          }};
}

std::vector<nn::KernelCheck> all_gradient_checks() {
  auto checks = nn::kernel_checks();
  checks.push_back(a3c_loss_check());
  return checks;
}

}  // namespace gsgi::agent
