#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gsgi/nn/tensor.hpp"

namespace gsgi::nn {

// A scalar function of several tensors together with its claimed gradient.
struct GradProblem {
  std::vector<std::string> names;
  std::vector<Tensor> variables;
  std::function<double(const std::vector<Tensor>&)> loss;
  // One gradient tensor per variable, same shapes.
  std::function<std::vector<Tensor>(const std::vector<Tensor>&)> gradient;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_variable;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

// Coordinates whose gradient magnitude is below this floor are compared in
// absolute terms.
inline constexpr double kRelErrorFloor = 1e-3;

double relative_error(double analytic, double numeric);

// Central differences over every coordinate of every variable.
GradCheckResult grad_check(const GradProblem& problem, double eps = 1e-5);

struct KernelCheck {
  std::string name;
  double tolerance;
  std::function<GradProblem(std::uint64_t seed)> make;
};

// conv2d, maxpool2d, dense, relu, sigmoid, tanh, mask_apply, softmax
// log-probability and a three-step ConvLSTM unroll.
std::vector<KernelCheck> kernel_checks();

}  // namespace gsgi::nn
