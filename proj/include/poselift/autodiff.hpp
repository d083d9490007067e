#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "poselift/tensor.hpp"

namespace poselift {

// ---------------------------------------------------------------------------
// Forward kernels. These are the single source of truth for the arithmetic;
// the tape ops below call them, so the recorded and the plain path agree
// bit for bit. Reductions run in ascending index order, kernel tap innermost,
// then input channel.
// ---------------------------------------------------------------------------

// Valid (unpadded) dilated 1-D cross-correlation.
//   input  C_in x T, weight C_out x C_in x K, bias C_out
//   out[o][t] = bias[o] + sum_{c,k} weight[o][c][k] * input[c][t + k*dilation]
inline Tensor conv1d_dilated(const Tensor& input, const Tensor& weight, const Tensor& bias,
                             std::size_t dilation) {
  if (input.rank() != 2) throw TensorError("conv1d_dilated: input must be rank 2, got " + input.shape_str());
  if (weight.rank() != 3) throw TensorError("conv1d_dilated: weight must be rank 3, got " + weight.shape_str());
  if (dilation == 0) throw TensorError("conv1d_dilated: dilation must be positive");
  const std::size_t c_in = input.dim(0), t_len = input.dim(1);
  const std::size_t c_out = weight.dim(0), kernel = weight.dim(2);
  if (weight.dim(1) != c_in) {
    throw TensorError("conv1d_dilated: weight input-channel dim 1 is " + std::to_string(weight.dim(1)) +
                      ", input channel dim 0 is " + std::to_string(c_in));
  }
  if (bias.rank() != 1 || bias.dim(0) != c_out) {
    throw TensorError("conv1d_dilated: bias dim 0 must be " + std::to_string(c_out) +
                      ", got " + bias.shape_str());
  }
  const std::size_t span = (kernel - 1) * dilation + 1;
  if (t_len < span) {
    throw TensorError("conv1d_dilated: window underflow, need T >= " + std::to_string(span) +
                      " frames, got " + std::to_string(t_len));
  }
  const std::size_t t_out = t_len - (kernel - 1) * dilation;
  Tensor out({c_out, t_out});
  const double* x = input.data();
  const double* w = weight.data();
  double* y = out.data();
  // t innermost vectorizes; each output element still accumulates its terms
  // in tap-then-channel order, so results are bit-identical to the naive loop
  for (std::size_t o = 0; o < c_out; ++o) {
    double* y_o = y + o * t_out;
    for (std::size_t t = 0; t < t_out; ++t) y_o[t] = bias[o];
    const double* w_o = w + o * c_in * kernel;
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* x_c = x + c * t_len;
      for (std::size_t k = 0; k < kernel; ++k) {
        const double wv = w_o[c * kernel + k];
        const double* x_ck = x_c + k * dilation;
        for (std::size_t t = 0; t < t_out; ++t) y_o[t] += wv * x_ck[t];
      }
    }
  }
  return out;
}

inline Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

// Per-frame affine map: input C_in x T, weight C_out x C_in, bias C_out.
inline Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (input.rank() != 2) throw TensorError("linear: input must be rank 2, got " + input.shape_str());
  if (weight.rank() != 2) throw TensorError("linear: weight must be rank 2, got " + weight.shape_str());
  const std::size_t c_in = input.dim(0), t_len = input.dim(1);
  const std::size_t c_out = weight.dim(0);
  if (weight.dim(1) != c_in) {
    throw TensorError("linear: weight inner dim 1 is " + std::to_string(weight.dim(1)) +
                      ", input channel dim 0 is " + std::to_string(c_in));
  }
  if (bias.rank() != 1 || bias.dim(0) != c_out) {
    throw TensorError("linear: bias dim 0 must be " + std::to_string(c_out) + ", got " + bias.shape_str());
  }
  Tensor out({c_out, t_len});
  const double* x = input.data();
  const double* w = weight.data();
  double* y = out.data();
  for (std::size_t o = 0; o < c_out; ++o) {
    double* y_o = y + o * t_len;
    for (std::size_t t = 0; t < t_len; ++t) y_o[t] = bias[o];
    const double* w_o = w + o * c_in;
    for (std::size_t c = 0; c < c_in; ++c) {
      const double wv = w_o[c];
      const double* x_c = x + c * t_len;
      for (std::size_t t = 0; t < t_len; ++t) y_o[t] += wv * x_c[t];
    }
  }
  return out;
}

// Drops `margin` frames from each end of the temporal axis (rank-2, C x T).
inline Tensor crop_time(const Tensor& input, std::size_t margin) {
  if (input.rank() != 2) throw TensorError("crop_time: input must be rank 2, got " + input.shape_str());
  const std::size_t c = input.dim(0), t_len = input.dim(1);
  if (t_len < 2 * margin + 1) {
    throw TensorError("crop_time: window underflow, need T >= " + std::to_string(2 * margin + 1) +
                      ", got " + std::to_string(t_len));
  }
  const std::size_t t_out = t_len - 2 * margin;
  Tensor out({c, t_out});
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t t = 0; t < t_out; ++t) out.at(i, t) = input.at(i, t + margin);
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw TensorError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
  return out;
}

namespace detail {

// Root-relative mean per-joint distance of a single pose (J x 3), plus its
// gradient with respect to pred. Joint 0 is the root; a per-joint distance of
// exactly zero contributes zero gradient.
inline double mpjpe_pose_and_grad(const Tensor& pred, const Tensor& gt, Tensor* grad_out) {
  const std::size_t joints = pred.dim(0);
  if (grad_out) *grad_out = Tensor({joints, 3});
  double total = 0.0;
  for (std::size_t j = 0; j < joints; ++j) {
    double delta[3];
    double dist_sq = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double p = pred.at(j, c) - pred.at(0, c);
      const double g = gt.at(j, c) - gt.at(0, c);
      delta[c] = p - g;
      dist_sq += delta[c] * delta[c];
    }
    const double dist = std::sqrt(dist_sq);
    total += dist;
    if (grad_out && dist > 0.0) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double u = delta[c] / (dist * static_cast<double>(joints));
        grad_out->at(j, c) += u;
        grad_out->at(0, c) -= u;
      }
    }
  }
  return total / static_cast<double>(joints);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GradTape: ordered record of executed ops with the saved inputs needed for
// backward. Node ids only ever reference earlier nodes, so reverse insertion
// order is reverse execution order. Gradients accumulate additively at
// fan-out. A tape is single-owner; do not share one across threads.
// ---------------------------------------------------------------------------

class GradTape {
 public:
  enum class Op {
    Input,        // constant leaf
    Param,        // differentiable leaf, non-owning pointer
    Conv1d,       // inputs: x, w, b; attr dilation
    Relu,
    Linear,       // inputs: x, w, b
    Add,
    CropTime,     // attr margin
    Reshape,
    Sum,          // all elements -> scalar
    Scale,        // attr factor
    MeanScalars,  // n scalar inputs -> scalar
    MpjpeLoss,    // input: pred (J x 3); gt stored as constant
  };

  int input(Tensor value) {
    Node n;
    n.op = Op::Input;
    n.value = std::move(value);
    return push(std::move(n));
  }

  // Registers an externally owned parameter tensor. The pointer must stay
  // valid for the life of the tape; updates to it after recording invalidate
  // recorded forward values.
  int param(const Tensor* p) {
    Node n;
    n.op = Op::Param;
    n.external = p;
    return push(std::move(n));
  }

  int conv1d(int x, int w, int b, std::size_t dilation) {
    Node n;
    n.op = Op::Conv1d;
    n.inputs = {x, w, b};
    n.attr = dilation;
    n.value = conv1d_dilated(value(x), value(w), value(b), dilation);
    return push(std::move(n));
  }

  int relu(int x) {
    Node n;
    n.op = Op::Relu;
    n.inputs = {x};
    n.value = poselift::relu(value(x));
    return push(std::move(n));
  }

  int linear(int x, int w, int b) {
    Node n;
    n.op = Op::Linear;
    n.inputs = {x, w, b};
    n.value = poselift::linear(value(x), value(w), value(b));
    return push(std::move(n));
  }

  int add(int a, int b) {
    Node n;
    n.op = Op::Add;
    n.inputs = {a, b};
    n.value = poselift::add(value(a), value(b));
    return push(std::move(n));
  }

  int crop_time(int x, std::size_t margin) {
    Node n;
    n.op = Op::CropTime;
    n.inputs = {x};
    n.attr = margin;
    n.value = poselift::crop_time(value(x), margin);
    return push(std::move(n));
  }

  int reshape(int x, std::vector<std::size_t> shape) {
    Node n;
    n.op = Op::Reshape;
    n.inputs = {x};
    n.value = Tensor::from(std::move(shape), value(x).values());
    return push(std::move(n));
  }

  int sum(int x) {
    Node n;
    n.op = Op::Sum;
    n.inputs = {x};
    double acc = 0.0;
    for (double v : value(x).values()) acc += v;
    n.value = Tensor::from({1}, {acc});
    return push(std::move(n));
  }

  int scale(int x, double factor) {
    Node n;
    n.op = Op::Scale;
    n.inputs = {x};
    n.factor = factor;
    n.value = value(x);
    for (double& v : n.value.values()) v *= factor;
    return push(std::move(n));
  }

  int mean_scalars(const std::vector<int>& xs) {
    if (xs.empty()) throw TensorError("mean_scalars: empty input list");
    Node n;
    n.op = Op::MeanScalars;
    n.inputs = xs;
    double acc = 0.0;
    for (int id : xs) {
      if (value(id).numel() != 1) throw TensorError("mean_scalars: inputs must be scalar");
      acc += value(id)[0];
    }
    n.value = Tensor::from({1}, {acc / static_cast<double>(xs.size())});
    return push(std::move(n));
  }

  int mpjpe_loss(int pred, Tensor gt) {
    const Tensor& p = value(pred);
    if (p.rank() != 2 || p.dim(1) != 3 || !p.same_shape(gt)) {
      throw TensorError("mpjpe_loss: pred " + p.shape_str() + " and gt " + gt.shape_str() +
                        " must both be J x 3");
    }
    Node n;
    n.op = Op::MpjpeLoss;
    n.inputs = {pred};
    n.constant = std::move(gt);
    n.value = Tensor::from({1}, {detail::mpjpe_pose_and_grad(p, n.constant, nullptr)});
    return push(std::move(n));
  }

  const Tensor& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.op == Op::Param ? *n.external : n.value;
  }

  // Reverse-mode sweep from a scalar root. Grads are reset first, so repeated
  // calls on the same tape give the same result.
  void backward(int root, double loss_grad = 1.0) {
    const Tensor& root_value = value(root);
    if (root_value.numel() != 1) {
      throw TensorError("backward: root must be scalar, got " + root_value.shape_str());
    }
    grads_.assign(nodes_.size(), Tensor());
    grad_at(root)[0] = loss_grad;
    for (int id = root; id >= 0; --id) {
      const Node& n = nodes_[static_cast<std::size_t>(id)];
      if (grads_[static_cast<std::size_t>(id)].numel() == 0) continue;  // not reached from root
      const Tensor& g = grads_[static_cast<std::size_t>(id)];
      switch (n.op) {
        case Op::Input:
        case Op::Param:
          break;
        case Op::Conv1d:
          backward_conv1d(n, g);
          break;
        case Op::Relu: {
          Tensor& gx = grad_at(n.inputs[0]);
          const Tensor& x = value(n.inputs[0]);
          for (std::size_t i = 0; i < x.numel(); ++i)
            if (x[i] > 0.0) gx[i] += g[i];
          break;
        }
        case Op::Linear:
          backward_linear(n, g);
          break;
        case Op::Add: {
          Tensor& ga = grad_at(n.inputs[0]);
          Tensor& gb = grad_at(n.inputs[1]);
          for (std::size_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
          }
          break;
        }
        case Op::CropTime: {
          Tensor& gx = grad_at(n.inputs[0]);
          const std::size_t margin = n.attr;
          const std::size_t c = n.value.dim(0), t_out = n.value.dim(1);
          const std::size_t t_in = gx.dim(1);
          (void)t_in;
          for (std::size_t i = 0; i < c; ++i)
            for (std::size_t t = 0; t < t_out; ++t) gx.at(i, t + margin) += g.at(i, t);
          break;
        }
        case Op::Reshape: {
          Tensor& gx = grad_at(n.inputs[0]);
          for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
          break;
        }
        case Op::Sum: {
          Tensor& gx = grad_at(n.inputs[0]);
          for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g[0];
          break;
        }
        case Op::Scale: {
          Tensor& gx = grad_at(n.inputs[0]);
          for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g[i] * n.factor;
          break;
        }
        case Op::MeanScalars: {
          const double share = g[0] / static_cast<double>(n.inputs.size());
          for (int in : n.inputs) grad_at(in)[0] += share;
          break;
        }
        case Op::MpjpeLoss: {
          Tensor pose_grad;
          detail::mpjpe_pose_and_grad(value(n.inputs[0]), n.constant, &pose_grad);
          Tensor& gx = grad_at(n.inputs[0]);
          for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g[0] * pose_grad[i];
          break;
        }
      }
    }
  }

  // Gradient of the last backward() with respect to node `id`; zeros if the
  // node was not reached from the root.
  Tensor grad(int id) const {
    const Tensor& g = grads_.at(static_cast<std::size_t>(id));
    if (g.numel() > 0) return g;
    return Tensor(value(id).shape());
  }

  // Gradient for a registered parameter tensor.
  Tensor grad_for(const Tensor* p) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].op == Op::Param && nodes_[i].external == p) return grad(static_cast<int>(i));
    }
    throw TensorError("grad_for: tensor was never registered on this tape");
  }

  std::size_t size() const { return nodes_.size(); }

  // Smallest |x| feeding any recorded relu. A central-difference check with
  // step eps is only valid when this clears eps comfortably; instances that
  // straddle the kink make the numeric side of the comparison meaningless.
  double min_relu_input_magnitude() const {
    double best = std::numeric_limits<double>::infinity();
    for (const Node& n : nodes_) {
      if (n.op != Op::Relu) continue;
      for (double v : value(n.inputs[0]).values()) best = std::min(best, std::fabs(v));
    }
    return best;
  }

 private:
  struct Node {
    Op op;
    std::vector<int> inputs;
    std::size_t attr = 0;      // dilation or crop margin
    double factor = 1.0;       // Scale
    Tensor value;              // owned forward result (empty for Param)
    Tensor constant;           // MpjpeLoss ground truth
    const Tensor* external = nullptr;
  };

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  Tensor& grad_at(int id) {
    Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.numel() == 0) g = Tensor(value(id).shape());
    return g;
  }

  void backward_conv1d(const Node& n, const Tensor& g) {
    const Tensor& x_t = value(n.inputs[0]);
    const Tensor& w_t = value(n.inputs[1]);
    Tensor& gx_t = grad_at(n.inputs[0]);
    Tensor& gw_t = grad_at(n.inputs[1]);
    Tensor& gb = grad_at(n.inputs[2]);
    const std::size_t d = n.attr;
    const std::size_t c_out = w_t.dim(0), c_in = w_t.dim(1), kernel = w_t.dim(2);
    const std::size_t t_out = g.dim(1), t_in = x_t.dim(1);
    const double* x = x_t.data();
    const double* w = w_t.data();
    double* gx = gx_t.data();
    double* gw = gw_t.data();
    for (std::size_t o = 0; o < c_out; ++o) {
      const double* g_o = g.data() + o * t_out;
      const double* w_o = w + o * c_in * kernel;
      double* gw_o = gw + o * c_in * kernel;
      for (std::size_t t = 0; t < t_out; ++t) gb[o] += g_o[t];
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* x_c = x + c * t_in;
        double* gx_c = gx + c * t_in;
        for (std::size_t k = 0; k < kernel; ++k) {
          const double wv = w_o[c * kernel + k];
          double gw_acc = 0.0;
          const double* x_ck = x_c + k * d;
          double* gx_ck = gx_c + k * d;
          for (std::size_t t = 0; t < t_out; ++t) {
            gw_acc += g_o[t] * x_ck[t];
            gx_ck[t] += g_o[t] * wv;
          }
          gw_o[c * kernel + k] += gw_acc;
        }
      }
    }
  }

  void backward_linear(const Node& n, const Tensor& g) {
    const Tensor& x_t = value(n.inputs[0]);
    const Tensor& w_t = value(n.inputs[1]);
    Tensor& gx_t = grad_at(n.inputs[0]);
    Tensor& gw_t = grad_at(n.inputs[1]);
    Tensor& gb = grad_at(n.inputs[2]);
    const std::size_t c_out = w_t.dim(0), c_in = w_t.dim(1), t_len = x_t.dim(1);
    const double* x = x_t.data();
    const double* w = w_t.data();
    double* gx = gx_t.data();
    double* gw = gw_t.data();
    for (std::size_t o = 0; o < c_out; ++o) {
      const double* g_o = g.data() + o * t_len;
      for (std::size_t t = 0; t < t_len; ++t) gb[o] += g_o[t];
      for (std::size_t c = 0; c < c_in; ++c) {
        const double* x_c = x + c * t_len;
        double* gx_c = gx + c * t_len;
        const double wv = w[o * c_in + c];
        double gw_acc = 0.0;
        for (std::size_t t = 0; t < t_len; ++t) {
          gw_acc += g_o[t] * x_c[t];
          gx_c[t] += g_o[t] * wv;
        }
        gw[o * c_in + c] += gw_acc;
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

// ---------------------------------------------------------------------------
// Finite-difference oracle. `build` records the scalar loss for the current
// parameter values on a fresh tape and returns the root node id. Compares the
// tape's analytic gradient against central differences per coordinate and
// returns the worst relative error.
// ---------------------------------------------------------------------------

inline double grad_check(const std::function<int(GradTape&)>& build,
                         const std::vector<Tensor*>& params, double eps) {
  if (eps <= 0.0) throw TensorError("grad_check: eps must be positive");

  const auto eval = [&]() {
    GradTape tape;
    const int root = build(tape);
    const double v = tape.value(root)[0];
    if (!std::isfinite(v)) throw TensorError("grad_check: non-finite loss value");
    return v;
  };

  GradTape tape;
  const int root = build(tape);
  if (!std::isfinite(tape.value(root)[0])) throw TensorError("grad_check: non-finite loss value");
  tape.backward(root);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Tensor* p : params) analytic.push_back(tape.grad_for(p));

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = *params[pi];
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double up = eval();
      p[i] = saved - eps;
      const double down = eval();
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double ana = analytic[pi][i];
      const double scale = std::max({std::fabs(numeric), std::fabs(ana), 1e-6});
      worst = std::max(worst, std::fabs(numeric - ana) / scale);
    }
  }
  return worst;
}

}  // namespace poselift
