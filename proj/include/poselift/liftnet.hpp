#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "poselift/autodiff.hpp"
#include "poselift/io.hpp"
#include "poselift/rng.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

// Temporal dilated-convolutional lifting model: a window of 2-D keypoints in,
// the root-relative 3-D pose of the window's center frame out.
//
// Layer stack for B >= 1:
//   project 2J -> C channels, ReLU, then B residual blocks
//     h <- crop(h, 3^b) + relu(conv1d(h, kernel 3, dilation 3^b))
//   each block shrinks the temporal axis by 2*3^b; after B blocks one frame
//   remains and a linear head maps C -> 3J.
// B == 0 degenerates to a per-frame MLP with two linear+ReLU layers.

struct LiftNetSpec {
  std::size_t joints = 16;
  std::size_t blocks = 3;
  std::size_t channels = 64;
  std::uint64_t seed = 1;

  static constexpr std::size_t kernel = 3;

  std::size_t receptive_field() const {
    std::size_t f = 1;
    for (std::size_t b = 0; b < blocks; ++b) f *= 3;
    return f;
  }

  void validate() const {
    if (joints < 2) throw Error("liftnet: joints must be >= 2, got " + std::to_string(joints));
    if (channels < 1) throw Error("liftnet: channels must be >= 1");
  }
};

struct LiftNetParams {
  LiftNetSpec spec;
  Tensor w_in, b_in;                  // C x 2J, C
  Tensor w_mid, b_mid;                // second MLP layer, only when blocks == 0
  std::vector<Tensor> w_conv, b_conv; // per block: C x C x 3, C
  Tensor w_head, b_head;              // 3J x C, 3J

  // Declaration order; also the checkpoint serialization order.
  std::vector<Tensor*> all() {
    std::vector<Tensor*> out{&w_in, &b_in};
    if (spec.blocks == 0) {
      out.push_back(&w_mid);
      out.push_back(&b_mid);
    }
    for (std::size_t b = 0; b < w_conv.size(); ++b) {
      out.push_back(&w_conv[b]);
      out.push_back(&b_conv[b]);
    }
    out.push_back(&w_head);
    out.push_back(&b_head);
    return out;
  }

  std::vector<const Tensor*> all() const {
    std::vector<const Tensor*> out{&w_in, &b_in};
    if (spec.blocks == 0) {
      out.push_back(&w_mid);
      out.push_back(&b_mid);
    }
    for (std::size_t b = 0; b < w_conv.size(); ++b) {
      out.push_back(&w_conv[b]);
      out.push_back(&b_conv[b]);
    }
    out.push_back(&w_head);
    out.push_back(&b_head);
    return out;
  }
};

namespace detail {

// Scaled-uniform init: U(-1, 1) * sqrt(2 / fan_in). Biases start at zero.
inline Tensor init_weight(std::vector<std::size_t> shape, std::size_t fan_in, SplitMix64& rng) {
  Tensor t(std::move(shape));
  const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : t.values()) v = rng.next_uniform(-1.0, 1.0) * scale;
  return t;
}

}  // namespace detail

inline LiftNetParams build_liftnet(const LiftNetSpec& spec) {
  spec.validate();
  SplitMix64 rng(derive_stream(spec.seed, {0x6C69667400ULL}));
  LiftNetParams p;
  p.spec = spec;
  const std::size_t c = spec.channels, j2 = 2 * spec.joints, j3 = 3 * spec.joints;
  p.w_in = detail::init_weight({c, j2}, j2, rng);
  p.b_in = Tensor({c});
  if (spec.blocks == 0) {
    p.w_mid = detail::init_weight({c, c}, c, rng);
    p.b_mid = Tensor({c});
  }
  std::size_t dilation = 1;
  for (std::size_t b = 0; b < spec.blocks; ++b) {
    p.w_conv.push_back(detail::init_weight({c, c, LiftNetSpec::kernel}, c * LiftNetSpec::kernel, rng));
    p.b_conv.push_back(Tensor({c}));
    dilation *= 3;
  }
  (void)dilation;
  p.w_head = detail::init_weight({j3, c}, c, rng);
  p.b_head = Tensor({j3});
  return p;
}

// Input conditioning applied to every window before the network proper:
// keypoints are shifted by the center frame's root (joint 0) position and
// divided by a fixed pixel scale. Uses only in-window data, so the model's
// receptive field is exactly the window.
inline constexpr double kInputPixelScale = 100.0;

// The head regresses coordinates in units of 100 mm; a fixed gain converts to
// millimetres. Keeps activations and Adam steps at O(1) while the loss stays
// in mm.
inline constexpr double kOutputScaleMm = 100.0;

inline Tensor normalize_window(const Tensor& window) {
  const std::size_t t_len = window.dim(1);
  const std::size_t center = (t_len - 1) / 2;
  const double root_x = window.at(0, center);
  const double root_y = window.at(1, center);
  Tensor out = window;
  const std::size_t rows = window.dim(0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double shift = (r % 2 == 0) ? root_x : root_y;
    for (std::size_t t = 0; t < t_len; ++t) out.at(r, t) = (window.at(r, t) - shift) / kInputPixelScale;
  }
  return out;
}

// Registers every parameter on the tape; index order matches params.all().
inline std::vector<int> register_liftnet(GradTape& tape, const LiftNetParams& params) {
  std::vector<int> ids;
  for (const Tensor* t : params.all()) ids.push_back(tape.param(t));
  return ids;
}

// Records the forward pass for one window node (already normalized) and
// returns the J x 3 prediction node.
inline int liftnet_forward_nodes(GradTape& tape, const LiftNetSpec& spec,
                                 const std::vector<int>& param_ids, int window_node) {
  const std::size_t expect_f = spec.receptive_field();
  const Tensor& win = tape.value(window_node);
  if (win.rank() != 2 || win.dim(0) != 2 * spec.joints) {
    throw TensorError("liftnet: window must be 2J x F = " + std::to_string(2 * spec.joints) +
                      " x " + std::to_string(expect_f) + ", got " + win.shape_str());
  }
  if (win.dim(1) < expect_f) {
    throw TensorError("liftnet: window underflow, need " + std::to_string(expect_f) +
                      " frames, got " + std::to_string(win.dim(1)));
  }
  if (win.dim(1) > expect_f) {
    throw TensorError("liftnet: window overflow, need " + std::to_string(expect_f) +
                      " frames, got " + std::to_string(win.dim(1)));
  }

  std::size_t next = 0;
  const int w_in = param_ids[next++], b_in = param_ids[next++];
  int h = tape.relu(tape.linear(window_node, w_in, b_in));
  if (spec.blocks == 0) {
    const int w_mid = param_ids[next++], b_mid = param_ids[next++];
    h = tape.relu(tape.linear(h, w_mid, b_mid));
  }
  std::size_t dilation = 1;
  for (std::size_t b = 0; b < spec.blocks; ++b) {
    const int w = param_ids[next++], bias = param_ids[next++];
    const int branch = tape.relu(tape.conv1d(h, w, bias, dilation));
    h = tape.add(tape.crop_time(h, dilation), branch);
    dilation *= 3;
  }
  const int w_head = param_ids[next++], b_head = param_ids[next++];
  const int out = tape.scale(tape.linear(h, w_head, b_head), kOutputScaleMm);  // 3J x 1, mm
  return tape.reshape(out, {spec.joints, 3});
}

// Plain inference: runs the same recorded ops on a scratch tape.
inline Tensor liftnet_forward(const LiftNetParams& params, const Tensor& window) {
  GradTape tape;
  const std::vector<int> ids = register_liftnet(tape, params);
  const int win = tape.input(normalize_window(window));
  const int out = liftnet_forward_nodes(tape, params.spec, ids, win);
  return tape.value(out);
}

// Root-relative mean per-joint distance for one pose, with gradient w.r.t.
// the prediction. Gradient is zero wherever a per-joint distance is exactly
// zero.
inline std::pair<double, Tensor> loss_mpjpe(const Tensor& pred, const Tensor& gt) {
  if (!pred.same_shape(gt) || pred.rank() != 2 || pred.dim(1) != 3) {
    throw TensorError("loss_mpjpe: pred " + pred.shape_str() + " and gt " + gt.shape_str() +
                      " must both be J x 3");
  }
  Tensor grad;
  const double value = detail::mpjpe_pose_and_grad(pred, gt, &grad);
  return {value, std::move(grad)};
}

// Slides an F-frame window over a 2J x T clip; window starting at frame s
// predicts frame s + (F-1)/2. Output is (T-F+1) x J x 3, ordered by frame.
inline Tensor predict_sequence(const LiftNetParams& params, const Tensor& clip2d) {
  const std::size_t f = params.spec.receptive_field();
  const std::size_t t_len = clip2d.dim(1);
  if (t_len < f) {
    throw TensorError("predict_sequence: clip has " + std::to_string(t_len) +
                      " frames, receptive field needs " + std::to_string(f));
  }
  const std::size_t n_out = t_len - f + 1;
  const std::size_t rows = clip2d.dim(0);
  Tensor out({n_out, params.spec.joints, 3});
  Tensor window({rows, f});
  for (std::size_t s = 0; s < n_out; ++s) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t t = 0; t < f; ++t) window.at(r, t) = clip2d.at(r, s + t);
    const Tensor pose = liftnet_forward(params, window);
    for (std::size_t j = 0; j < params.spec.joints; ++j)
      for (std::size_t c = 0; c < 3; ++c) out.at(s, j, c) = pose.at(j, c);
  }
  return out;
}

// Checkpoint format: magic "PLM1", then J, B, C, K as u32, F and seed as u64,
// then every parameter tensor as little-endian f64 in declaration order.
inline void save_checkpoint(const std::string& path, const LiftNetParams& params) {
  auto os = io::open_out(path, /*binary=*/true);
  io::write_magic(os, "PLM1");
  io::write_u32(os, static_cast<std::uint32_t>(params.spec.joints));
  io::write_u32(os, static_cast<std::uint32_t>(params.spec.blocks));
  io::write_u32(os, static_cast<std::uint32_t>(params.spec.channels));
  io::write_u32(os, static_cast<std::uint32_t>(LiftNetSpec::kernel));
  io::write_u64(os, params.spec.receptive_field());
  io::write_u64(os, params.spec.seed);
  for (const Tensor* t : params.all())
    for (double v : t->values()) io::write_f64(os, v);
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

inline LiftNetParams load_checkpoint(const std::string& path) {
  auto is = io::open_in(path, /*binary=*/true);
  io::expect_magic(is, "PLM1", path);
  LiftNetSpec spec;
  spec.joints = io::read_u32(is);
  spec.blocks = io::read_u32(is);
  spec.channels = io::read_u32(is);
  const std::uint32_t kernel = io::read_u32(is);
  const std::uint64_t field = io::read_u64(is);
  spec.seed = io::read_u64(is);
  if (kernel != LiftNetSpec::kernel) throw IoError(path + ": unsupported kernel size");
  if (field != spec.receptive_field()) throw IoError(path + ": receptive field does not match block count");
  LiftNetParams params = build_liftnet(spec);
  for (Tensor* t : params.all())
    for (double& v : t->values()) v = io::read_f64(is);
  return params;
}

}  // namespace poselift
