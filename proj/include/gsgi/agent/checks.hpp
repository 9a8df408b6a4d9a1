#pragma once

#include <vector>

#include "gsgi/nn/grad_check.hpp"

namespace gsgi::agent {

// Full-network check: a3c_loss over a three-step trajectory of a small
// recurrent network, differentiated with respect to every weight.
nn::KernelCheck a3c_loss_check();

// Every kernel check plus the loss check; what `gradcheck` runs.
std::vector<nn::KernelCheck> all_gradient_checks();

}  // namespace gsgi::agent
