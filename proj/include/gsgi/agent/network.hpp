#pragma once

// Mask-attention actor-critic network. A convolutional feature extractor
// (optionally followed by a ConvLSTM) feeds two heads; each head learns a
// sigmoid spatial mask, multiplies it onto the shared features and runs a
// small MLP. The masks are the interpretation output.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsgi/env.hpp"
#include "gsgi/nn/kernels.hpp"
#include "gsgi/rng.hpp"

namespace gsgi::agent {

using nn::Parameter;
using nn::Tensor;

enum class InputVariant { encoded_20ch, color_rgb };
std::string_view variant_name(InputVariant v);
std::optional<InputVariant> parse_variant(std::string_view name);

struct NetworkConfig {
  InputVariant input_variant = InputVariant::encoded_20ch;
  bool use_convlstm = false;
  int feature_channels = 64;
  int mlp_hidden = 128;
  // Spatial side of the encoded input; ignored by the color variant.
  int grid_side = 7;

  void validate() const;
  std::vector<int> input_shape() const;
  // Spatial size of the shared feature map (and of both masks).
  int feature_side() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct ConvBlock {
  Parameter kernel;
  Parameter bias;
};

struct Head {
  Parameter mask_kernel;  // 1 x C x 1 x 1
  Parameter mask_bias;    // 1
  Parameter hidden_weight;
  Parameter hidden_bias;
  Parameter out_weight;
  Parameter out_bias;
};

struct ForwardOutput {
  Tensor logits;        // 5
  Tensor policy_probs;  // 5
  double value = 0.0;
  Tensor policy_mask;  // 1 x H x W
  Tensor value_mask;   // 1 x H x W
  std::optional<nn::ConvLstmState> next_lstm_state;
};

// Diagnostic hook: replace a head's mask with a fixed tensor.
struct ForwardOptions {
  std::optional<Tensor> policy_mask_override;
  std::optional<Tensor> value_mask_override;
};

struct HeadCache {
  Tensor mask;
  Tensor masked;
  Tensor hidden_pre;
  Tensor hidden;
};

struct BlockCache {
  Tensor input;
  Tensor conv_out;
  std::vector<int> argmax;
  Tensor pooled;
};

// Everything backward() needs from one forward pass.
struct ForwardCache {
  std::vector<BlockCache> blocks;
  Tensor features;  // shared features entering the heads
  std::optional<nn::ConvLstmCache> lstm;
  std::array<HeadCache, 2> heads;
  bool masks_overridden = false;
};

// Loss gradient with respect to one step's outputs.
struct StepGrad {
  Tensor logits;  // 5
  double value = 0.0;
};

class Network {
 public:
  Network() = default;
  // Kaiming-uniform weights from `init_seed`, zero biases and peepholes.
  explicit Network(const NetworkConfig& cfg, std::uint64_t init_seed = 0);

  const NetworkConfig& config() const { return cfg_; }

  // Fixed order; defines the weight file layout.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

  nn::ConvLstmState initial_state() const;

  // `lstm_state` is required iff use_convlstm. Throws UsageError on a shape
  // mismatch.
  ForwardOutput forward(const Tensor& obs,
                        const nn::ConvLstmState* lstm_state = nullptr,
                        ForwardCache* cache = nullptr,
                        const ForwardOptions& options = {}) const;

  // Backpropagates a sequence of consecutive steps (through time when the
  // ConvLSTM is enabled; the state entering the first step is a constant) and
  // accumulates into every parameter gradient.
  void backward(std::span<const ForwardCache> caches,
                std::span<const StepGrad> grads);

  void zero_grad();

  // Flat copies of all values / gradients in parameters() order.
  std::vector<double> flat_values() const;
  std::vector<double> flat_grads() const;
  void set_flat_values(std::span<const double> values);

 private:
  NetworkConfig cfg_;
  std::vector<ConvBlock> blocks_;
  std::optional<nn::ConvLstmParams> lstm_;
  std::array<Head, 2> heads_;  // policy, value
};

inline constexpr int kPolicyHead = 0;
inline constexpr int kValueHead = 1;

// Closed-form parameter count for a configuration.
std::size_t expected_parameter_count(const NetworkConfig& cfg);

// Categorical sample, or argmax with first-index tie-break when greedy.
PatrollerAction sample_action(const Tensor& policy_probs, Rng& rng,
                              bool greedy = false);

struct MaskView {
  std::string head;
  int height = 0;
  int width = 0;
  int step = 0;
  std::vector<double> values;  // row-major H x W
};

std::array<MaskView, 2> extract_masks(const ForwardOutput& out, int step);

}  // namespace gsgi::agent
