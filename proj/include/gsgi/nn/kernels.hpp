#pragma once

// Forward and backward kernels for the layers the network needs. Forward
// functions are pure. Backward functions accumulate (+=) into the gradient
// tensors they are handed; a null input-gradient pointer skips that output.

#include <string>
#include <vector>

#include "gsgi/nn/tensor.hpp"
#include "gsgi/rng.hpp"

namespace gsgi::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.zero(); }
};

// Kaiming-uniform: U(-b, b) with b = sqrt(6 / fan_in).
void kaiming_uniform(Tensor& t, int fan_in, Rng& rng);

// Cross-correlation, stride 1, zero padding.
// input C_in x H x W, kernel C_out x C_in x k x k, bias C_out.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int padding);
void conv2d_backward(const Tensor& input, const Tensor& kernel, int padding,
                     const Tensor& grad_out, Tensor* grad_input,
                     Tensor& grad_kernel, Tensor* grad_bias);

// Non-overlapping window x window max pooling; trailing rows/cols that do not
// fill a window are dropped. `argmax` receives the flat input index chosen
// for each output (first index in raster order on ties).
Tensor maxpool2d(const Tensor& input, int window, std::vector<int>& argmax);
void maxpool2d_backward(const Tensor& grad_out, const std::vector<int>& argmax,
                        Tensor& grad_input);

Tensor relu(const Tensor& x);
// Derivative at 0 is 0.
void relu_backward(const Tensor& input, const Tensor& grad_out, Tensor& grad_input);
Tensor sigmoid(const Tensor& x);
void sigmoid_backward(const Tensor& output, const Tensor& grad_out,
                      Tensor& grad_input);
Tensor tanh(const Tensor& x);
void tanh_backward(const Tensor& output, const Tensor& grad_out,
                   Tensor& grad_input);

double sigmoid(double x);

// y = W x + b; input is treated as a flat vector of length n.
Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias);
void dense_backward(const Tensor& input, const Tensor& weight,
                    const Tensor& grad_out, Tensor* grad_input,
                    Tensor& grad_weight, Tensor& grad_bias);

// features C x H x W times mask 1 x H x W broadcast across channels.
Tensor mask_apply(const Tensor& features, const Tensor& mask);
void mask_apply_backward(const Tensor& features, const Tensor& mask,
                         const Tensor& grad_out, Tensor* grad_features,
                         Tensor* grad_mask);

// Max-shifted softmax over a flat vector.
Tensor softmax(const Tensor& logits);
// Gradient of log softmax(logits)[index] with respect to the logits.
Tensor log_softmax_grad(const Tensor& probs, int index);

// Convolutional LSTM with peephole connections.
//   i = sig(Wxi*x + Whi*h + pi.c_prev + bi)
//   f = sig(Wxf*x + Whf*h + pf.c_prev + bf)
//   g = tanh(Wxg*x + Whg*h + bg)
//   c = f.c_prev + i.g
//   o = sig(Wxo*x + Who*h + po.c + bo)
//   h = o.tanh(c)
// Gate blocks are stacked [i, f, o, g] along the output channels.
struct ConvLstmState {
  Tensor hidden;
  Tensor cell;
  friend bool operator==(const ConvLstmState&, const ConvLstmState&) = default;
};

struct ConvLstmParams {
  Parameter input_kernel;   // 4C x C_in x k x k
  Parameter hidden_kernel;  // 4C x C x k x k
  Parameter bias;           // 4C
  Parameter peep_input;     // C x H x W
  Parameter peep_forget;    // C x H x W
  Parameter peep_output;    // C x H x W
  int padding = 1;

  static ConvLstmParams make(int in_channels, int channels, int height,
                             int width, int kernel_size);
  int channels() const { return peep_input.value.dim(0); }
  std::vector<Parameter*> all();
};

ConvLstmState zero_lstm_state(int channels, int height, int width);

struct ConvLstmCache {
  Tensor input;
  ConvLstmState prev;
  Tensor in_gate, forget_gate, out_gate, candidate;
  Tensor cell, tanh_cell;
};

// Returns the new state; its hidden tensor is the step's output.
ConvLstmState convlstm_step(const Tensor& input, const ConvLstmState& state,
                            const ConvLstmParams& params,
                            ConvLstmCache* cache = nullptr);

// grad_hidden and grad_cell are the total gradients arriving at this step's
// outputs. Writes the gradients for the previous state into grad_prev and
// accumulates parameter gradients.
void convlstm_step_backward(const ConvLstmCache& cache,
                            ConvLstmParams& params, const Tensor& grad_hidden,
                            const Tensor& grad_cell, Tensor* grad_input,
                            ConvLstmState& grad_prev);

}  // namespace gsgi::nn
