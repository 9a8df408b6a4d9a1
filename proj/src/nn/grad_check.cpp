#include "gsgi/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsgi/nn/kernels.hpp"
#include "gsgi/rng.hpp"

namespace gsgi::nn {

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), kRelErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const GradProblem& problem, double eps) {
  GradCheckResult result;
  const std::vector<Tensor> analytic = problem.gradient(problem.variables);
  std::vector<Tensor> vars = problem.variables;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    for (std::size_t i = 0; i < vars[v].size(); ++i) {
      const double orig = vars[v][i];
      vars[v][i] = orig + eps;
      const double up = problem.loss(vars);
      vars[v][i] = orig - eps;
      const double down = problem.loss(vars);
      vars[v][i] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(analytic[v][i], numeric);
      ++result.coordinates;
      if (err > result.max_rel_error || result.worst_variable.empty()) {
        result.max_rel_error = err;
        result.worst_variable = problem.names[v];
        result.worst_index = i;
        result.analytic = analytic[v][i];
        result.numeric = numeric;
      }
    }
  }
  return result;
}

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero so relu never sits within eps of its kink.
Tensor kink_free_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) {
    const double mag = rng.uniform(0.05, 1.0);
    x = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

// Distinct values at least 0.01 apart so pooling windows never tie.
Tensor distinct_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  std::vector<int> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = 0.01 * order[i] - 0.5 + rng.uniform(0.0, 0.002);
  }
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

using ElementwiseFn = Tensor (*)(const Tensor&);

KernelCheck elementwise_check(std::string name, ElementwiseFn fn,
                              bool kink_free) {
  return {name, 1e-6, [fn, kink_free](std::uint64_t seed) {
            Rng rng(seed);
            GradProblem p;
            p.names = {"input"};
            p.variables = {kink_free ? kink_free_tensor({4, 5}, rng)
                                     : random_tensor({4, 5}, rng, -3.0, 3.0)};
            const Tensor w = random_tensor({4, 5}, rng);
            p.loss = [fn, w](const std::vector<Tensor>& v) {
              return dot(w, fn(v[0]));
            };
            p.gradient = [fn, w](const std::vector<Tensor>& v) {
              Tensor g(v[0].shape());
              const Tensor y = fn(v[0]);
              if (fn == static_cast<ElementwiseFn>(relu)) {
                relu_backward(v[0], w, g);
              } else if (fn == static_cast<ElementwiseFn>(sigmoid)) {
                sigmoid_backward(y, w, g);
              } else {
                tanh_backward(y, w, g);
              }
              return std::vector<Tensor>{g};
            };
            return p;
          }};
}

ConvLstmParams lstm_from(const std::vector<Tensor>& v, std::size_t first) {
  ConvLstmParams p;
  p.input_kernel = Parameter("lstm.input_kernel", v[first]);
  p.hidden_kernel = Parameter("lstm.hidden_kernel", v[first + 1]);
  p.bias = Parameter("lstm.bias", v[first + 2]);
  p.peep_input = Parameter("lstm.peep_input", v[first + 3]);
  p.peep_forget = Parameter("lstm.peep_forget", v[first + 4]);
  p.peep_output = Parameter("lstm.peep_output", v[first + 5]);
  p.padding = v[first].dim(2) / 2;
  return p;
}

}  // namespace

std::vector<KernelCheck> kernel_checks() {
  std::vector<KernelCheck> checks;

  checks.push_back({"conv2d", 1e-4, [](std::uint64_t seed) {
                      Rng rng(seed);
                      GradProblem p;
                      p.names = {"input", "kernel", "bias"};
                      p.variables = {random_tensor({3, 5, 5}, rng),
                                     random_tensor({4, 3, 3, 3}, rng),
                                     random_tensor({4}, rng)};
                      const Tensor w = random_tensor({4, 5, 5}, rng);
                      p.loss = [w](const std::vector<Tensor>& v) {
                        return dot(w, conv2d(v[0], v[1], v[2], 1));
                      };
                      p.gradient = [w](const std::vector<Tensor>& v) {
                        std::vector<Tensor> g{Tensor(v[0].shape()),
                                              Tensor(v[1].shape()),
                                              Tensor(v[2].shape())};
                        conv2d_backward(v[0], v[1], 1, w, &g[0], g[1], &g[2]);
                        return g;
                      };
                      return p;
                    }});

  checks.push_back({"maxpool2d", 1e-4, [](std::uint64_t seed) {
                      Rng rng(seed);
                      GradProblem p;
                      p.names = {"input"};
                      p.variables = {distinct_tensor({3, 7, 7}, rng)};
                      const Tensor w = random_tensor({3, 3, 3}, rng);
                      p.loss = [w](const std::vector<Tensor>& v) {
                        std::vector<int> idx;
                        return dot(w, maxpool2d(v[0], 2, idx));
                      };
                      p.gradient = [w](const std::vector<Tensor>& v) {
                        std::vector<int> idx;
                        maxpool2d(v[0], 2, idx);
                        Tensor g(v[0].shape());
                        maxpool2d_backward(w, idx, g);
                        return std::vector<Tensor>{g};
                      };
                      return p;
                    }});

  checks.push_back({"dense", 1e-6, [](std::uint64_t seed) {
                      Rng rng(seed);
                      GradProblem p;
                      p.names = {"input", "weight", "bias"};
                      p.variables = {random_tensor({6}, rng),
                                     random_tensor({4, 6}, rng),
                                     random_tensor({4}, rng)};
                      const Tensor w = random_tensor({4}, rng);
                      p.loss = [w](const std::vector<Tensor>& v) {
                        return dot(w, dense(v[0], v[1], v[2]));
                      };
                      p.gradient = [w](const std::vector<Tensor>& v) {
                        std::vector<Tensor> g{Tensor(v[0].shape()),
                                              Tensor(v[1].shape()),
                                              Tensor(v[2].shape())};
                        dense_backward(v[0], v[1], w, &g[0], g[1], g[2]);
                        return g;
                      };
                      return p;
                    }});

  checks.push_back(elementwise_check("relu", relu, true));
  checks.push_back(elementwise_check("sigmoid", sigmoid, false));
  checks.push_back(elementwise_check("tanh", tanh, false));

  checks.push_back({"mask_apply", 1e-6, [](std::uint64_t seed) {
                      Rng rng(seed);
                      GradProblem p;
                      p.names = {"features", "mask"};
                      p.variables = {random_tensor({3, 4, 4}, rng),
                                     random_tensor({1, 4, 4}, rng, 0.0, 1.0)};
                      const Tensor w = random_tensor({3, 4, 4}, rng);
                      p.loss = [w](const std::vector<Tensor>& v) {
                        return dot(w, mask_apply(v[0], v[1]));
                      };
                      p.gradient = [w](const std::vector<Tensor>& v) {
                        std::vector<Tensor> g{Tensor(v[0].shape()),
                                              Tensor(v[1].shape())};
                        mask_apply_backward(v[0], v[1], w, &g[0], &g[1]);
                        return g;
                      };
                      return p;
                    }});

  checks.push_back({"softmax_log_prob", 1e-6, [](std::uint64_t seed) {
                      Rng rng(seed);
                      GradProblem p;
                      p.names = {"logits"};
                      p.variables = {random_tensor({5}, rng, -2.0, 2.0)};
                      const Tensor w = random_tensor({5}, rng);
                      p.loss = [w](const std::vector<Tensor>& v) {
                        const Tensor probs = softmax(v[0]);
                        double s = 0.0;
                        for (int a = 0; a < 5; ++a) s += w[a] * std::log(probs[a]);
                        return s;
                      };
                      p.gradient = [w](const std::vector<Tensor>& v) {
                        const Tensor probs = softmax(v[0]);
                        Tensor g({5});
                        for (int a = 0; a < 5; ++a) {
                          const Tensor ga = log_softmax_grad(probs, a);
                          for (int k = 0; k < 5; ++k) g[k] += w[a] * ga[k];
                        }
                        return std::vector<Tensor>{g};
                      };
                      return p;
                    }});

  checks.push_back({"convlstm_bptt3", 1e-4, [](std::uint64_t seed) {
                      Rng rng(seed);
                      constexpr int steps = 3;
                      const int cin = 2, ch = 3, h = 3, w = 3, k = 3;
                      GradProblem p;
                      for (int t = 0; t < steps; ++t) {
                        p.names.push_back("x" + std::to_string(t));
                        p.variables.push_back(random_tensor({cin, h, w}, rng));
                      }
                      p.names.insert(p.names.end(),
                                     {"h0", "c0", "input_kernel", "hidden_kernel",
                                      "bias", "peep_input", "peep_forget",
                                      "peep_output"});
                      p.variables.push_back(random_tensor({ch, h, w}, rng, -0.5, 0.5));
                      p.variables.push_back(random_tensor({ch, h, w}, rng, -0.5, 0.5));
                      p.variables.push_back(random_tensor({4 * ch, cin, k, k}, rng, -0.5, 0.5));
                      p.variables.push_back(random_tensor({4 * ch, ch, k, k}, rng, -0.5, 0.5));
                      p.variables.push_back(random_tensor({4 * ch}, rng, -0.5, 0.5));
                      for (int i = 0; i < 3; ++i) {
                        p.variables.push_back(random_tensor({ch, h, w}, rng, -0.5, 0.5));
                      }
                      std::vector<Tensor> wh;
                      for (int t = 0; t < steps; ++t) {
                        wh.push_back(random_tensor({ch, h, w}, rng));
                      }
                      const Tensor wc = random_tensor({ch, h, w}, rng);
                      const std::size_t first = steps + 2;
                      p.loss = [=](const std::vector<Tensor>& v) {
                        const ConvLstmParams params = lstm_from(v, first);
                        ConvLstmState s{v[steps], v[steps + 1]};
                        double total = 0.0;
                        for (int t = 0; t < steps; ++t) {
                          s = convlstm_step(v[t], s, params);
                          total += dot(wh[t], s.hidden);
                        }
                        return total + dot(wc, s.cell);
                      };
                      p.gradient = [=](const std::vector<Tensor>& v) {
                        ConvLstmParams params = lstm_from(v, first);
                        std::vector<ConvLstmCache> caches(steps);
                        ConvLstmState s{v[steps], v[steps + 1]};
                        for (int t = 0; t < steps; ++t) {
                          s = convlstm_step(v[t], s, params, &caches[t]);
                        }
                        std::vector<Tensor> g;
                        for (const auto& t : v) g.emplace_back(t.shape());
                        Tensor dh({ch, h, w});
                        Tensor dc = wc;
                        for (int t = steps - 1; t >= 0; --t) {
                          for (std::size_t j = 0; j < dh.size(); ++j) dh[j] += wh[t][j];
                          ConvLstmState prev;
                          convlstm_step_backward(caches[t], params, dh, dc, &g[t], prev);
                          dh = prev.hidden;
                          dc = prev.cell;
                        }
                        g[steps] = dh;
                        g[steps + 1] = dc;
                        auto all = params.all();
                        for (std::size_t i = 0; i < all.size(); ++i) {
                          g[first + i] = all[i]->grad;
                        }
                        return g;
                      };
                      return p;
                    }});
  return checks;
}

}  // namespace gsgi::nn
