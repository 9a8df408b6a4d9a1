#include "gsgi/agent/network.hpp"

#include <cmath>

#include "gsgi/errors.hpp"
#include "gsgi/obs.hpp"

namespace gsgi::agent {

namespace {

constexpr std::array<int, 3> kColorChannels = {16, 32, 0};  // last = features
constexpr const char* kHeadNames[2] = {"policy", "value"};

Head make_head(const std::string& name, int channels, int side, int hidden,
               int outputs, Rng& rng) {
  Head h;
  h.mask_kernel = Parameter(name + ".mask.kernel", Tensor({1, channels, 1, 1}));
  h.mask_bias = Parameter(name + ".mask.bias", Tensor({1}));
  h.hidden_weight =
      Parameter(name + ".fc1.weight", Tensor({hidden, channels * side * side}));
  h.hidden_bias = Parameter(name + ".fc1.bias", Tensor({hidden}));
  h.out_weight = Parameter(name + ".out.weight", Tensor({outputs, hidden}));
  h.out_bias = Parameter(name + ".out.bias", Tensor({outputs}));
  nn::kaiming_uniform(h.mask_kernel.value, channels, rng);
  nn::kaiming_uniform(h.hidden_weight.value, channels * side * side, rng);
  nn::kaiming_uniform(h.out_weight.value, hidden, rng);
  return h;
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

std::string_view variant_name(InputVariant v) {
  return v == InputVariant::encoded_20ch ? "encoded_20ch" : "color_rgb";
}

std::optional<InputVariant> parse_variant(std::string_view name) {
  if (name == "encoded_20ch" || name == "encoded") return InputVariant::encoded_20ch;
  if (name == "color_rgb" || name == "color") return InputVariant::color_rgb;
  return std::nullopt;
}

void NetworkConfig::validate() const {
  if (feature_channels < 1) throw ConfigError("feature_channels must be >= 1");
  if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be >= 1");
  if (input_variant == InputVariant::encoded_20ch && grid_side < 2) {
    throw ConfigError("grid_side must be >= 2 for the encoded variant");
  }
}

std::vector<int> NetworkConfig::input_shape() const {
  if (input_variant == InputVariant::encoded_20ch) {
    return {kObsChannels, grid_side, grid_side};
  }
  return {3, kImageSide, kImageSide};
}

int NetworkConfig::feature_side() const {
  if (input_variant == InputVariant::encoded_20ch) return grid_side / 2;
  return kImageSide / 8;
}

Network::Network(const NetworkConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(init_seed);
  const int fc = cfg_.feature_channels;
  std::vector<std::pair<int, int>> io;
  if (cfg_.input_variant == InputVariant::encoded_20ch) {
    io.emplace_back(kObsChannels, fc);
  } else {
    io = {{3, kColorChannels[0]},
          {kColorChannels[0], kColorChannels[1]},
          {kColorChannels[1], fc}};
  }
  for (std::size_t b = 0; b < io.size(); ++b) {
    const auto [cin, cout] = io[b];
    const std::string prefix = "features.conv" + std::to_string(b);
    ConvBlock block{Parameter(prefix + ".kernel", Tensor({cout, cin, 3, 3})),
                    Parameter(prefix + ".bias", Tensor({cout}))};
    nn::kaiming_uniform(block.kernel.value, cin * 9, rng);
    blocks_.push_back(std::move(block));
  }
  const int side = cfg_.feature_side();
  if (cfg_.use_convlstm) {
    lstm_ = nn::ConvLstmParams::make(fc, fc, side, side, 3);
    nn::kaiming_uniform(lstm_->input_kernel.value, fc * 9, rng);
    nn::kaiming_uniform(lstm_->hidden_kernel.value, fc * 9, rng);
  }
  heads_[kPolicyHead] = make_head("policy", fc, side, cfg_.mlp_hidden, kNumMoves, rng);
  heads_[kValueHead] = make_head("value", fc, side, cfg_.mlp_hidden, 1, rng);
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& b : blocks_) {
    out.push_back(&b.kernel);
    out.push_back(&b.bias);
  }
  if (lstm_) {
    for (Parameter* p : lstm_->all()) out.push_back(p);
  }
  for (auto& h : heads_) {
    for (Parameter* p : {&h.mask_kernel, &h.mask_bias, &h.hidden_weight,
                         &h.hidden_bias, &h.out_weight, &h.out_bias}) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<const Parameter*> Network::parameters() const {
  auto params = const_cast<Network*>(this)->parameters();
  return {params.begin(), params.end()};
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

std::size_t expected_parameter_count(const NetworkConfig& cfg) {
  const std::size_t fc = cfg.feature_channels;
  const std::size_t side = cfg.feature_side();
  const std::size_t hidden = cfg.mlp_hidden;
  std::size_t n = 0;
  if (cfg.input_variant == InputVariant::encoded_20ch) {
    n += fc * kObsChannels * 9 + fc;
  } else {
    n += 16 * 3 * 9 + 16;
    n += 32 * 16 * 9 + 32;
    n += fc * 32 * 9 + fc;
  }
  if (cfg.use_convlstm) {
    n += 2 * (4 * fc * fc * 9) + 4 * fc + 3 * fc * side * side;
  }
  const std::size_t head_common = (fc + 1) + (hidden * fc * side * side + hidden);
  n += head_common + hidden * kNumMoves + kNumMoves;
  n += head_common + hidden + 1;
  return n;
}

nn::ConvLstmState Network::initial_state() const {
  const int side = cfg_.feature_side();
  return nn::zero_lstm_state(cfg_.feature_channels, side, side);
}

ForwardOutput Network::forward(const Tensor& obs,
                               const nn::ConvLstmState* lstm_state,
                               ForwardCache* cache,
                               const ForwardOptions& options) const {
  if (obs.shape() != cfg_.input_shape()) {
    throw UsageError("observation shape " + obs.shape_string() +
                     " does not match the network input " +
                     Tensor(cfg_.input_shape()).shape_string());
  }
  if (cfg_.use_convlstm && lstm_state == nullptr) {
    throw UsageError("recurrent network needs an LSTM state");
  }
  if (cache) {
    cache->blocks.assign(blocks_.size(), {});
    cache->lstm.reset();
    cache->masks_overridden = options.policy_mask_override.has_value() ||
                              options.value_mask_override.has_value();
  }

  Tensor x = obs;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    Tensor conv = nn::conv2d(x, blocks_[b].kernel.value, blocks_[b].bias.value, 1);
    std::vector<int> argmax;
    Tensor pooled = nn::maxpool2d(conv, 2, argmax);
    Tensor act = nn::relu(pooled);
    if (cache) {
      auto& bc = cache->blocks[b];
      bc.input = std::move(x);
      bc.conv_out = std::move(conv);
      bc.argmax = std::move(argmax);
      bc.pooled = std::move(pooled);
    }
    x = std::move(act);
  }

  ForwardOutput out;
  if (lstm_) {
    nn::ConvLstmCache* lc = nullptr;
    if (cache) lc = &cache->lstm.emplace();
    nn::ConvLstmState next;
    try {
      next = nn::convlstm_step(x, *lstm_state, *lstm_, lc);
    } catch (const KernelError& e) {
      throw UsageError(std::string("LSTM state mismatch: ") + e.what());
    }
    x = next.hidden;
    out.next_lstm_state = std::move(next);
  }
  const Tensor& features = x;

  for (int h = 0; h < 2; ++h) {
    const Head& head = heads_[h];
    const auto& override_mask =
        h == kPolicyHead ? options.policy_mask_override : options.value_mask_override;
    Tensor mask;
    if (override_mask) {
      mask = *override_mask;
    } else {
      mask = nn::sigmoid(nn::conv2d(features, head.mask_kernel.value,
                                    head.mask_bias.value, 0));
    }
    Tensor masked = nn::mask_apply(features, mask);
    Tensor hidden_pre = nn::dense(masked, head.hidden_weight.value, head.hidden_bias.value);
    Tensor hidden = nn::relu(hidden_pre);
    Tensor result = nn::dense(hidden, head.out_weight.value, head.out_bias.value);
    if (h == kPolicyHead) {
      out.policy_probs = nn::softmax(result);
      out.logits = std::move(result);
      out.policy_mask = mask;
    } else {
      out.value = result[0];
      out.value_mask = mask;
    }
    if (cache) {
      cache->heads[h] = {std::move(mask), std::move(masked), std::move(hidden_pre),
                         std::move(hidden)};
    }
  }
  if (cache) cache->features = features;
  return out;
}

void Network::backward(std::span<const ForwardCache> caches,
                       std::span<const StepGrad> grads) {
  if (caches.size() != grads.size()) {
    throw UsageError("backward: caches and gradients differ in length");
  }
  std::optional<nn::ConvLstmState> carry;
  if (lstm_) {
    const int side = cfg_.feature_side();
    carry = nn::zero_lstm_state(cfg_.feature_channels, side, side);
  }
  for (std::size_t k = caches.size(); k-- > 0;) {
    const ForwardCache& c = caches[k];
    if (c.masks_overridden) {
      throw UsageError("backward through an overridden mask is not supported");
    }
    Tensor dfeat(c.features.shape());
    for (int h = 0; h < 2; ++h) {
      Head& head = heads_[h];
      const HeadCache& hc = c.heads[h];
      Tensor dout;
      if (h == kPolicyHead) {
        dout = grads[k].logits;
      } else {
        dout = Tensor({1}, std::vector<double>{grads[k].value});
      }
      Tensor dhidden(hc.hidden.shape());
      nn::dense_backward(hc.hidden, head.out_weight.value, dout, &dhidden,
                         head.out_weight.grad, head.out_bias.grad);
      Tensor dpre(hc.hidden_pre.shape());
      nn::relu_backward(hc.hidden_pre, dhidden, dpre);
      Tensor dmasked(hc.masked.shape());
      nn::dense_backward(hc.masked, head.hidden_weight.value, dpre, &dmasked,
                         head.hidden_weight.grad, head.hidden_bias.grad);
      Tensor dmask(hc.mask.shape());
      nn::mask_apply_backward(c.features, hc.mask, dmasked, &dfeat, &dmask);
      Tensor dmask_pre(hc.mask.shape());
      nn::sigmoid_backward(hc.mask, dmask, dmask_pre);
      nn::conv2d_backward(c.features, head.mask_kernel.value, 0, dmask_pre,
                          &dfeat, head.mask_kernel.grad, &head.mask_bias.grad);
    }

    Tensor dx;
    if (lstm_) {
      add_into(dfeat, carry->hidden);
      nn::ConvLstmState dprev;
      dx = Tensor(c.lstm->input.shape());
      nn::convlstm_step_backward(*c.lstm, *lstm_, dfeat, carry->cell, &dx, dprev);
      carry = std::move(dprev);
    } else {
      dx = std::move(dfeat);
    }

    for (std::size_t b = blocks_.size(); b-- > 0;) {
      const BlockCache& bc = c.blocks[b];
      Tensor dpooled(bc.pooled.shape());
      nn::relu_backward(bc.pooled, dx, dpooled);
      Tensor dconv(bc.conv_out.shape());
      nn::maxpool2d_backward(dpooled, bc.argmax, dconv);
      Tensor din;
      Tensor* din_ptr = nullptr;
      if (b > 0) {
        din = Tensor(bc.input.shape());
        din_ptr = &din;
      }
      nn::conv2d_backward(bc.input, blocks_[b].kernel.value, 1, dconv, din_ptr,
                          blocks_[b].kernel.grad, &blocks_[b].bias.grad);
      dx = std::move(din);
    }
  }
}

void Network::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

std::vector<double> Network::flat_values() const {
  std::vector<double> v;
  v.reserve(parameter_count());
  for (const Parameter* p : parameters()) {
    v.insert(v.end(), p->value.data().begin(), p->value.data().end());
  }
  return v;
}

std::vector<double> Network::flat_grads() const {
  std::vector<double> v;
  v.reserve(parameter_count());
  for (const Parameter* p : parameters()) {
    v.insert(v.end(), p->grad.data().begin(), p->grad.data().end());
  }
  return v;
}

void Network::set_flat_values(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw UsageError("set_flat_values: expected " +
                     std::to_string(parameter_count()) + " values, got " +
                     std::to_string(values.size()));
  }
  std::size_t off = 0;
  for (Parameter* p : parameters()) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), p->value.size(),
                p->value.data().begin());
    off += p->value.size();
  }
}

PatrollerAction sample_action(const Tensor& policy_probs, Rng& rng, bool greedy) {
  if (policy_probs.size() != static_cast<std::size_t>(kNumMoves)) {
    throw UsageError("policy must have 5 probabilities");
  }
  if (greedy) {
    int best = 0;
    for (int a = 1; a < kNumMoves; ++a) {
      if (policy_probs[a] > policy_probs[best]) best = a;
    }
    return static_cast<PatrollerAction>(best);
  }
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (int a = 0; a < kNumMoves; ++a) {
    if (policy_probs[a] <= 0.0) continue;
    acc += policy_probs[a];
    last = a;
    if (u < acc) return static_cast<PatrollerAction>(a);
  }
  return static_cast<PatrollerAction>(last);
}

std::array<MaskView, 2> extract_masks(const ForwardOutput& out, int step) {
  std::array<MaskView, 2> views;
  const Tensor* masks[2] = {&out.policy_mask, &out.value_mask};
  for (int h = 0; h < 2; ++h) {
    views[h].head = kHeadNames[h];
    views[h].height = masks[h]->dim(1);
    views[h].width = masks[h]->dim(2);
    views[h].step = step;
    views[h].values.assign(masks[h]->data().begin(), masks[h]->data().end());
  }
  return views;
}

}  // namespace gsgi::agent
