#include "gsgi/nn/kernels.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace gsgi::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

void check_conv_shapes(const Tensor& input, const Tensor& kernel, int padding) {
  if (input.rank() != 3 || kernel.rank() != 4) {
    throw KernelError("conv2d: expected input rank 3 and kernel rank 4, got " +
                      input.shape_string() + " and " + kernel.shape_string());
  }
  if (kernel.dim(1) != input.dim(0) || kernel.dim(2) != kernel.dim(3)) {
    throw KernelError("conv2d: kernel " + kernel.shape_string() +
                      " does not fit input " + input.shape_string());
  }
  if (padding < 0 || input.dim(1) + 2 * padding < kernel.dim(2) ||
      input.dim(2) + 2 * padding < kernel.dim(2)) {
    throw KernelError("conv2d: kernel larger than padded input");
  }
}

// Column matrix of shape (C_in*k*k) x (H_out*W_out).
RowMat im2col(const Tensor& input, int k, int padding, int out_h, int out_w) {
  const int channels = input.dim(0);
  const int h = input.dim(1);
  const int w = input.dim(2);
  RowMat col = RowMat::Zero(channels * k * k, out_h * out_w);
  for (int c = 0; c < channels; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        double* row = col.row((c * k + kh) * k + kw).data();
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh + kh - padding;
          if (ih < 0 || ih >= h) continue;
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow + kw - padding;
            if (iw < 0 || iw >= w) continue;
            row[oh * out_w + ow] = input.at(c, ih, iw);
          }
        }
      }
    }
  }
  return col;
}

void col2im_add(const RowMat& col, int k, int padding, int out_h, int out_w,
                Tensor& grad_input) {
  const int channels = grad_input.dim(0);
  const int h = grad_input.dim(1);
  const int w = grad_input.dim(2);
  for (int c = 0; c < channels; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const double* row = col.row((c * k + kh) * k + kw).data();
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh + kh - padding;
          if (ih < 0 || ih >= h) continue;
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow + kw - padding;
            if (iw < 0 || iw >= w) continue;
            grad_input.at(c, ih, iw) += row[oh * out_w + ow];
          }
        }
      }
    }
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw KernelError(std::string(what) + ": shape mismatch " +
                      a.shape_string() + " vs " + b.shape_string());
  }
}

}  // namespace

void kaiming_uniform(Tensor& t, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& x : t.data()) x = rng.uniform(-bound, bound);
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int padding) {
  check_conv_shapes(input, kernel, padding);
  const int c_out = kernel.dim(0);
  const int k = kernel.dim(2);
  require_shape(bias, {c_out}, "conv2d bias");
  const int out_h = input.dim(1) + 2 * padding - k + 1;
  const int out_w = input.dim(2) + 2 * padding - k + 1;
  const RowMat col = im2col(input, k, padding, out_h, out_w);
  Tensor out({c_out, out_h, out_w});
  ConstMatMap wmat(kernel.data().data(), c_out, col.rows());
  MatMap omat(out.data().data(), c_out, out_h * out_w);
  omat.noalias() = wmat * col;
  for (int c = 0; c < c_out; ++c) omat.row(c).array() += bias[c];
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernel, int padding,
                     const Tensor& grad_out, Tensor* grad_input,
                     Tensor& grad_kernel, Tensor* grad_bias) {
  check_conv_shapes(input, kernel, padding);
  const int c_out = kernel.dim(0);
  const int k = kernel.dim(2);
  const int out_h = input.dim(1) + 2 * padding - k + 1;
  const int out_w = input.dim(2) + 2 * padding - k + 1;
  require_shape(grad_out, {c_out, out_h, out_w}, "conv2d grad_out");
  require_same(grad_kernel, kernel, "conv2d grad_kernel");
  const RowMat col = im2col(input, k, padding, out_h, out_w);
  ConstMatMap gout(grad_out.data().data(), c_out, out_h * out_w);
  MatMap gk(grad_kernel.data().data(), c_out, col.rows());
  gk.noalias() += gout * col.transpose();
  if (grad_bias) {
    require_shape(*grad_bias, {c_out}, "conv2d grad_bias");
    VecMap(grad_bias->data().data(), c_out) += gout.rowwise().sum();
  }
  if (grad_input) {
    require_same(*grad_input, input, "conv2d grad_input");
    ConstMatMap wmat(kernel.data().data(), c_out, col.rows());
    const RowMat gcol = wmat.transpose() * gout;
    col2im_add(gcol, k, padding, out_h, out_w, *grad_input);
  }
}

Tensor maxpool2d(const Tensor& input, int window, std::vector<int>& argmax) {
  if (input.rank() != 3 || window < 1 || input.dim(1) < window ||
      input.dim(2) < window) {
    throw KernelError("maxpool2d: input " + input.shape_string() +
                      " smaller than window");
  }
  const int channels = input.dim(0);
  const int h = input.dim(1);
  const int w = input.dim(2);
  const int out_h = h / window;
  const int out_w = w / window;
  Tensor out({channels, out_h, out_w});
  argmax.assign(out.size(), 0);
  std::size_t o = 0;
  for (int c = 0; c < channels; ++c) {
    for (int oh = 0; oh < out_h; ++oh) {
      for (int ow = 0; ow < out_w; ++ow, ++o) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = -1;
        for (int dh = 0; dh < window; ++dh) {
          for (int dw = 0; dw < window; ++dw) {
            const int idx = (c * h + oh * window + dh) * w + ow * window + dw;
            if (best_idx < 0 || input[idx] > best) {
              best = input[idx];
              best_idx = idx;
            }
          }
        }
        out[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
  return out;
}

void maxpool2d_backward(const Tensor& grad_out, const std::vector<int>& argmax,
                        Tensor& grad_input) {
  if (argmax.size() != grad_out.size()) {
    throw KernelError("maxpool2d_backward: argmax size mismatch");
  }
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    grad_input[static_cast<std::size_t>(argmax[i])] += grad_out[i];
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

void relu_backward(const Tensor& input, const Tensor& grad_out,
                   Tensor& grad_input) {
  require_same(input, grad_out, "relu_backward");
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] > 0.0) grad_input[i] += grad_out[i];
  }
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = sigmoid(v);
  return y;
}

void sigmoid_backward(const Tensor& output, const Tensor& grad_out,
                      Tensor& grad_input) {
  require_same(output, grad_out, "sigmoid_backward");
  for (std::size_t i = 0; i < output.size(); ++i) {
    grad_input[i] += grad_out[i] * output[i] * (1.0 - output[i]);
  }
}

Tensor tanh(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = std::tanh(v);
  return y;
}

void tanh_backward(const Tensor& output, const Tensor& grad_out,
                   Tensor& grad_input) {
  require_same(output, grad_out, "tanh_backward");
  for (std::size_t i = 0; i < output.size(); ++i) {
    grad_input[i] += grad_out[i] * (1.0 - output[i] * output[i]);
  }
}

Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 2 || weight.dim(1) != static_cast<int>(input.size())) {
    throw KernelError("dense: weight " + weight.shape_string() +
                      " does not accept input of size " +
                      std::to_string(input.size()));
  }
  const int m = weight.dim(0);
  const int n = weight.dim(1);
  require_shape(bias, {m}, "dense bias");
  Tensor out({m});
  VecMap(out.data().data(), m).noalias() =
      ConstMatMap(weight.data().data(), m, n) *
          ConstVecMap(input.data().data(), n) +
      ConstVecMap(bias.data().data(), m);
  return out;
}

void dense_backward(const Tensor& input, const Tensor& weight,
                    const Tensor& grad_out, Tensor* grad_input,
                    Tensor& grad_weight, Tensor& grad_bias) {
  const int m = weight.dim(0);
  const int n = weight.dim(1);
  if (static_cast<int>(input.size()) != n ||
      static_cast<int>(grad_out.size()) != m) {
    throw KernelError("dense_backward: shape mismatch");
  }
  require_same(grad_weight, weight, "dense grad_weight");
  ConstVecMap g(grad_out.data().data(), m);
  ConstVecMap x(input.data().data(), n);
  MatMap(grad_weight.data().data(), m, n).noalias() += g * x.transpose();
  VecMap(grad_bias.data().data(), m) += g;
  if (grad_input) {
    if (grad_input->size() != input.size()) {
      throw KernelError("dense_backward: grad_input size mismatch");
    }
    VecMap(grad_input->data().data(), n).noalias() +=
        ConstMatMap(weight.data().data(), m, n).transpose() * g;
  }
}

Tensor mask_apply(const Tensor& features, const Tensor& mask) {
  if (features.rank() != 3 || mask.rank() != 3 || mask.dim(0) != 1 ||
      mask.dim(1) != features.dim(1) || mask.dim(2) != features.dim(2)) {
    throw KernelError("mask_apply: mask " + mask.shape_string() +
                      " does not fit features " + features.shape_string());
  }
  const std::size_t plane = mask.size();
  Tensor out = features;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i % plane];
  return out;
}

void mask_apply_backward(const Tensor& features, const Tensor& mask,
                         const Tensor& grad_out, Tensor* grad_features,
                         Tensor* grad_mask) {
  require_same(features, grad_out, "mask_apply_backward");
  const std::size_t plane = mask.size();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (grad_features) (*grad_features)[i] += grad_out[i] * mask[i % plane];
    if (grad_mask) (*grad_mask)[i % plane] += grad_out[i] * features[i];
  }
}

Tensor softmax(const Tensor& logits) {
  if (logits.empty()) throw KernelError("softmax of empty tensor");
  double hi = logits[0];
  for (double v : logits.data()) hi = std::max(hi, v);
  Tensor p = logits;
  double total = 0.0;
  for (double& v : p.data()) {
    v = std::exp(v - hi);
    total += v;
  }
  for (double& v : p.data()) v /= total;
  return p;
}

Tensor log_softmax_grad(const Tensor& probs, int index) {
  Tensor g = probs;
  for (double& v : g.data()) v = -v;
  g[static_cast<std::size_t>(index)] += 1.0;
  return g;
}

ConvLstmParams ConvLstmParams::make(int in_channels, int channels, int height,
                                    int width, int kernel_size) {
  ConvLstmParams p;
  p.input_kernel = Parameter(
      "lstm.input_kernel",
      Tensor({4 * channels, in_channels, kernel_size, kernel_size}));
  p.hidden_kernel = Parameter(
      "lstm.hidden_kernel",
      Tensor({4 * channels, channels, kernel_size, kernel_size}));
  p.bias = Parameter("lstm.bias", Tensor({4 * channels}));
  p.peep_input = Parameter("lstm.peep_input", Tensor({channels, height, width}));
  p.peep_forget = Parameter("lstm.peep_forget", Tensor({channels, height, width}));
  p.peep_output = Parameter("lstm.peep_output", Tensor({channels, height, width}));
  p.padding = kernel_size / 2;
  return p;
}

std::vector<Parameter*> ConvLstmParams::all() {
  return {&input_kernel, &hidden_kernel, &bias,
          &peep_input,   &peep_forget,   &peep_output};
}

ConvLstmState zero_lstm_state(int channels, int height, int width) {
  return {Tensor({channels, height, width}), Tensor({channels, height, width})};
}

ConvLstmState convlstm_step(const Tensor& input, const ConvLstmState& state,
                            const ConvLstmParams& params,
                            ConvLstmCache* cache) {
  const int ch = params.channels();
  const std::vector<int> plane_shape = params.peep_input.value.shape();
  require_shape(state.hidden, plane_shape, "convlstm hidden state");
  require_shape(state.cell, plane_shape, "convlstm cell state");

  Tensor gates = conv2d(input, params.input_kernel.value, params.bias.value,
                        params.padding);
  const Tensor zero_bias({4 * ch});
  const Tensor rec = conv2d(state.hidden, params.hidden_kernel.value, zero_bias,
                            params.padding);
  if (gates.shape() != rec.shape() || gates.dim(1) != plane_shape[1] ||
      gates.dim(2) != plane_shape[2]) {
    throw KernelError("convlstm: input " + input.shape_string() +
                      " incompatible with state " + state.hidden.shape_string());
  }
  for (std::size_t i = 0; i < gates.size(); ++i) gates[i] += rec[i];

  const std::size_t n = state.cell.size();
  Tensor in_gate(plane_shape), forget_gate(plane_shape), out_gate(plane_shape),
      candidate(plane_shape), cell(plane_shape), tanh_cell(plane_shape),
      hidden(plane_shape);
  const auto& pi = params.peep_input.value;
  const auto& pf = params.peep_forget.value;
  const auto& po = params.peep_output.value;
  for (std::size_t j = 0; j < n; ++j) {
    const double c_prev = state.cell[j];
    in_gate[j] = sigmoid(gates[j] + pi[j] * c_prev);
    forget_gate[j] = sigmoid(gates[n + j] + pf[j] * c_prev);
    candidate[j] = std::tanh(gates[3 * n + j]);
    cell[j] = forget_gate[j] * c_prev + in_gate[j] * candidate[j];
    out_gate[j] = sigmoid(gates[2 * n + j] + po[j] * cell[j]);
    tanh_cell[j] = std::tanh(cell[j]);
    hidden[j] = out_gate[j] * tanh_cell[j];
  }
  if (cache) {
    cache->input = input;
    cache->prev = state;
    cache->in_gate = in_gate;
    cache->forget_gate = forget_gate;
    cache->out_gate = out_gate;
    cache->candidate = candidate;
    cache->cell = cell;
    cache->tanh_cell = tanh_cell;
  }
  return {std::move(hidden), std::move(cell)};
}

void convlstm_step_backward(const ConvLstmCache& cache, ConvLstmParams& params,
                            const Tensor& grad_hidden, const Tensor& grad_cell,
                            Tensor* grad_input, ConvLstmState& grad_prev) {
  const std::vector<int>& plane_shape = cache.cell.shape();
  require_shape(grad_hidden, plane_shape, "convlstm grad_hidden");
  require_shape(grad_cell, plane_shape, "convlstm grad_cell");
  const int ch = plane_shape[0];
  const std::size_t n = cache.cell.size();
  Tensor dgates({4 * ch, plane_shape[1], plane_shape[2]});
  grad_prev.hidden = Tensor(plane_shape);
  grad_prev.cell = Tensor(plane_shape);

  const auto& pi = params.peep_input.value;
  const auto& pf = params.peep_forget.value;
  const auto& po = params.peep_output.value;
  auto& gpi = params.peep_input.grad;
  auto& gpf = params.peep_forget.grad;
  auto& gpo = params.peep_output.grad;
  for (std::size_t j = 0; j < n; ++j) {
    const double i = cache.in_gate[j];
    const double f = cache.forget_gate[j];
    const double o = cache.out_gate[j];
    const double g = cache.candidate[j];
    const double tc = cache.tanh_cell[j];
    const double c_prev = cache.prev.cell[j];
    const double dzo = grad_hidden[j] * tc * o * (1.0 - o);
    const double dc = grad_cell[j] + grad_hidden[j] * o * (1.0 - tc * tc) +
                      dzo * po[j];
    gpo[j] += dzo * cache.cell[j];
    const double dzi = dc * g * i * (1.0 - i);
    const double dzf = dc * c_prev * f * (1.0 - f);
    const double dzg = dc * i * (1.0 - g * g);
    gpi[j] += dzi * c_prev;
    gpf[j] += dzf * c_prev;
    grad_prev.cell[j] = dc * f + dzi * pi[j] + dzf * pf[j];
    dgates[j] = dzi;
    dgates[n + j] = dzf;
    dgates[2 * n + j] = dzo;
    dgates[3 * n + j] = dzg;
  }
  conv2d_backward(cache.input, params.input_kernel.value, params.padding, dgates,
                  grad_input, params.input_kernel.grad, &params.bias.grad);
  conv2d_backward(cache.prev.hidden, params.hidden_kernel.value, params.padding,
                  dgates, &grad_prev.hidden, params.hidden_kernel.grad, nullptr);
}

}  // namespace gsgi::nn
