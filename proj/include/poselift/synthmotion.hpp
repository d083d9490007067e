#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "poselift/io.hpp"
#include "poselift/rng.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

// Deterministic generator of action-labeled motion clips. Each non-root joint
// follows sinusoidal spherical angles around its parent and positions come
// from forward kinematics, so bone lengths are constant by construction.

struct SkeletonSpec {
  std::size_t joints = 0;
  std::vector<std::size_t> parent;       // parent[0] == 0 (root is its own parent)
  std::vector<double> bone_lengths_mm;   // per joint; entry 0 unused

  void validate() const {
    if (joints == 0 || parent.size() != joints || bone_lengths_mm.size() != joints) {
      throw Error("skeleton: joint count and array sizes disagree");
    }
    if (parent[0] != 0) throw Error("skeleton: joint 0 must be the root (its own parent)");
    for (std::size_t j = 1; j < joints; ++j) {
      if (parent[j] >= joints) throw Error("skeleton: parent index out of range at joint " + std::to_string(j));
      if (bone_lengths_mm[j] <= 0.0) throw Error("skeleton: bone length must be > 0 at joint " + std::to_string(j));
      // walk to the root; a cycle never reaches it within `joints` steps
      std::size_t cur = j;
      for (std::size_t steps = 0; cur != 0; ++steps) {
        if (steps >= joints || parent[cur] == cur) throw Error("skeleton: cycle detected at joint " + std::to_string(j));
        cur = parent[cur];
      }
    }
  }

  // Joint order in which every parent precedes its children.
  std::vector<std::size_t> topo_order() const {
    std::vector<std::size_t> order;
    std::vector<char> placed(joints, 0);
    order.reserve(joints);
    order.push_back(0);
    placed[0] = 1;
    while (order.size() < joints) {
      const std::size_t before = order.size();
      for (std::size_t j = 1; j < joints; ++j) {
        if (!placed[j] && placed[parent[j]]) {
          order.push_back(j);
          placed[j] = 1;
        }
      }
      if (order.size() == before) throw Error("skeleton: parent array is not a tree");
    }
    return order;
  }

  // 16-joint humanoid stand-in: pelvis, spine, neck, head, two arms, two legs.
  static SkeletonSpec humanoid16() {
    SkeletonSpec s;
    s.joints = 16;
    s.parent = {0, 0, 1, 2, 2, 4, 5, 2, 7, 8, 0, 10, 11, 0, 13, 14};
    s.bone_lengths_mm = {0.0, 250.0, 200.0, 150.0, 180.0, 280.0, 250.0,
                         180.0, 280.0, 250.0, 120.0, 420.0, 400.0, 120.0, 420.0, 400.0};
    return s;
  }
};

struct CameraModel {
  double scale_px_per_mm = 0.5;
  double principal_x = 500.0;
  double principal_y = 500.0;
};

struct PoseClip {
  int action = 0;
  int subject = 0;
  std::size_t frames = 0;
  Tensor joints3d;  // T x J x 3, mm
  Tensor joints2d;  // T x J x 2, px
};

struct Dataset {
  std::vector<PoseClip> clips;
  int n_actions = 0;
  std::size_t joints = 0;

  // f(i): total frames carrying action i.
  std::vector<long> frames_per_action() const {
    std::vector<long> totals(static_cast<std::size_t>(n_actions), 0);
    for (const PoseClip& c : clips) totals[static_cast<std::size_t>(c.action)] += static_cast<long>(c.frames);
    return totals;
  }

  std::vector<std::size_t> clips_of_action(int action) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < clips.size(); ++i)
      if (clips[i].action == action) idx.push_back(i);
    return idx;
  }
};

struct GenConfig {
  int n_actions = 15;
  int subjects = 1;
  int clips_per_action = 4;   // per subject
  std::size_t frames_per_clip = 500;
  SkeletonSpec skeleton = SkeletonSpec::humanoid16();
  CameraModel camera;
  double noise_px = 1.0;
  std::uint64_t seed = 1;
};

// (x, y) = scale * (X, Y) + principal point; depth discarded.
inline Tensor project_weak_perspective(const Tensor& pose3d, const CameraModel& cam) {
  if (cam.scale_px_per_mm <= 0.0) throw Error("weak perspective: scale must be > 0");
  const std::size_t joints = pose3d.dim(0);
  Tensor out({joints, 2});
  for (std::size_t j = 0; j < joints; ++j) {
    out.at(j, 0) = cam.scale_px_per_mm * pose3d.at(j, 0) + cam.principal_x;
    out.at(j, 1) = cam.scale_px_per_mm * pose3d.at(j, 1) + cam.principal_y;
  }
  return out;
}

namespace detail {

constexpr double kTwoPi = 2.0 * 3.141592653589793238462643383279502884;

// Per-joint sinusoidal parameters for one clip.
struct JointMotion {
  double theta0, theta_amp, theta_freq, theta_phase;
  double phi0, phi_amp, phi_freq, phi_phase;
};

// Action-level motion signature: the rest pose, base frequency and base
// amplitude are properties of the action, so clips of one action share
// structure and differ only in phases and small jitter. The frequency ladder
// is geometric so actions stay separable by a frequency feature even after
// forward kinematics mixes harmonics.
struct ActionSignature {
  std::vector<double> rest_theta, rest_phi;  // per joint
  double base_freq = 0.0;                    // cycles per frame
  double base_amp = 0.0;                     // radians
};

inline ActionSignature action_signature(std::uint64_t seed, int action, std::size_t joints) {
  ActionSignature sig;
  sig.base_freq = std::min(0.005 * std::pow(1.22, static_cast<double>(action)), 0.2);
  sig.base_amp = 0.25 + 0.01 * static_cast<double>(action);
  SplitMix64 rng(derive_stream(seed, {0x616374696F6EULL, static_cast<std::uint64_t>(action)}));
  sig.rest_theta.resize(joints, 0.0);
  sig.rest_phi.resize(joints, 0.0);
  for (std::size_t j = 1; j < joints; ++j) {
    sig.rest_theta[j] = rng.next_uniform(0.25 * 3.141592653589793, 0.75 * 3.141592653589793);
    sig.rest_phi[j] = rng.next_uniform(0.0, kTwoPi);
  }
  return sig;
}

}  // namespace detail

inline PoseClip gen_clip(const GenConfig& cfg, int action, int subject, int clip_index) {
  const SkeletonSpec& sk = cfg.skeleton;
  const std::size_t joints = sk.joints, frames = cfg.frames_per_clip;
  const auto order = sk.topo_order();

  SplitMix64 motion_rng(derive_stream(cfg.seed, {static_cast<std::uint64_t>(action),
                                                 static_cast<std::uint64_t>(subject),
                                                 static_cast<std::uint64_t>(clip_index), 0}));
  SplitMix64 noise_rng(derive_stream(cfg.seed, {static_cast<std::uint64_t>(action),
                                                static_cast<std::uint64_t>(subject),
                                                static_cast<std::uint64_t>(clip_index), 1}));

  const detail::ActionSignature sig = detail::action_signature(cfg.seed, action, joints);

  std::vector<detail::JointMotion> motion(joints);
  for (std::size_t j = 1; j < joints; ++j) {
    detail::JointMotion& m = motion[j];
    m.theta0 = sig.rest_theta[j] + motion_rng.next_uniform(-0.05, 0.05);
    m.theta_amp = sig.base_amp * motion_rng.next_uniform(0.8, 1.2);
    m.theta_freq = sig.base_freq * motion_rng.next_uniform(0.95, 1.05);
    m.theta_phase = motion_rng.next_uniform(0.0, detail::kTwoPi);
    m.phi0 = sig.rest_phi[j] + motion_rng.next_uniform(-0.05, 0.05);
    m.phi_amp = sig.base_amp * motion_rng.next_uniform(0.8, 1.2);
    m.phi_freq = sig.base_freq * motion_rng.next_uniform(0.95, 1.05);
    m.phi_phase = motion_rng.next_uniform(0.0, detail::kTwoPi);
  }
  // root sway: pure translation, bone lengths untouched
  const double root_amp = 80.0;
  const double root_freq = sig.base_freq * motion_rng.next_uniform(0.95, 1.05);
  const double root_phase[3] = {motion_rng.next_uniform(0.0, detail::kTwoPi),
                                motion_rng.next_uniform(0.0, detail::kTwoPi),
                                motion_rng.next_uniform(0.0, detail::kTwoPi)};

  PoseClip clip;
  clip.action = action;
  clip.subject = subject;
  clip.frames = frames;
  clip.joints3d = Tensor({frames, joints, 3});
  clip.joints2d = Tensor({frames, joints, 2});

  std::vector<double> pos(joints * 3, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double ft = static_cast<double>(t);
    pos[0] = root_amp * std::sin(detail::kTwoPi * root_freq * ft + root_phase[0]);
    pos[1] = 0.2 * root_amp * std::sin(detail::kTwoPi * root_freq * ft + root_phase[1]);
    pos[2] = root_amp * std::sin(detail::kTwoPi * root_freq * ft + root_phase[2]);
    for (std::size_t oi = 1; oi < order.size(); ++oi) {
      const std::size_t j = order[oi];
      const detail::JointMotion& m = motion[j];
      const double theta = m.theta0 + m.theta_amp * std::sin(detail::kTwoPi * m.theta_freq * ft + m.theta_phase);
      const double phi = m.phi0 + m.phi_amp * std::sin(detail::kTwoPi * m.phi_freq * ft + m.phi_phase);
      const double dir_x = std::sin(theta) * std::cos(phi);
      const double dir_y = std::cos(theta);
      const double dir_z = std::sin(theta) * std::sin(phi);
      const std::size_t p = sk.parent[j];
      pos[j * 3 + 0] = pos[p * 3 + 0] + sk.bone_lengths_mm[j] * dir_x;
      pos[j * 3 + 1] = pos[p * 3 + 1] + sk.bone_lengths_mm[j] * dir_y;
      pos[j * 3 + 2] = pos[p * 3 + 2] + sk.bone_lengths_mm[j] * dir_z;
    }
    for (std::size_t j = 0; j < joints; ++j) {
      for (std::size_t c = 0; c < 3; ++c) clip.joints3d.at(t, j, c) = pos[j * 3 + c];
      double px = cfg.camera.scale_px_per_mm * pos[j * 3 + 0] + cfg.camera.principal_x;
      double py = cfg.camera.scale_px_per_mm * pos[j * 3 + 1] + cfg.camera.principal_y;
      if (cfg.noise_px > 0.0) {
        px += cfg.noise_px * noise_rng.next_gaussian();
        py += cfg.noise_px * noise_rng.next_gaussian();
      }
      clip.joints2d.at(t, j, 0) = px;
      clip.joints2d.at(t, j, 1) = py;
    }
  }
  return clip;
}

// Clips are assembled in fixed (action, subject, clip) order regardless of
// how they were produced, and every clip has its own stream, so the result is
// a pure function of the config.
inline Dataset gen_dataset(const GenConfig& cfg) {
  if (cfg.n_actions < 1 || cfg.subjects < 1 || cfg.clips_per_action < 1 || cfg.frames_per_clip < 1) {
    throw Error("gen_dataset: all counts must be >= 1");
  }
  if (cfg.noise_px < 0.0) throw Error("gen_dataset: noise sigma must be >= 0");
  cfg.skeleton.validate();
  Dataset ds;
  ds.n_actions = cfg.n_actions;
  ds.joints = cfg.skeleton.joints;
  for (int a = 0; a < cfg.n_actions; ++a)
    for (int s = 0; s < cfg.subjects; ++s)
      for (int c = 0; c < cfg.clips_per_action; ++c) ds.clips.push_back(gen_clip(cfg, a, s, c));
  return ds;
}

// Max over frames and bones of | measured - specified | bone length, mm.
inline double bone_length_audit(const PoseClip& clip, const SkeletonSpec& sk) {
  double worst = 0.0;
  for (std::size_t t = 0; t < clip.frames; ++t) {
    for (std::size_t j = 1; j < sk.joints; ++j) {
      const std::size_t p = sk.parent[j];
      double d2 = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = clip.joints3d.at(t, j, c) - clip.joints3d.at(t, p, c);
        d2 += d * d;
      }
      worst = std::max(worst, std::fabs(std::sqrt(d2) - sk.bone_lengths_mm[j]));
    }
  }
  return worst;
}

// Clip-level split, stratified by action. Each action's clips are shuffled on
// an action-local stream and at least one clip lands on each side.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction,
                                                 std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("split: test fraction must be in (0, 1)");
  }
  std::vector<char> is_test(ds.clips.size(), 0);
  for (int a = 0; a < ds.n_actions; ++a) {
    std::vector<std::size_t> idx = ds.clips_of_action(a);
    if (idx.size() < 2) {
      throw Error("split: action " + std::to_string(a) + " has " + std::to_string(idx.size()) +
                  " clip(s), cannot stratify");
    }
    SplitMix64 rng(derive_stream(seed, {0x73706C6974ULL, static_cast<std::uint64_t>(a)}));
    seeded_shuffle(idx, rng);
    std::size_t n_test = static_cast<std::size_t>(test_fraction * static_cast<double>(idx.size()));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    for (std::size_t i = 0; i < n_test; ++i) is_test[idx[i]] = 1;
  }
  Dataset train, test;
  train.n_actions = test.n_actions = ds.n_actions;
  train.joints = test.joints = ds.joints;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    (is_test[i] ? test : train).clips.push_back(ds.clips[i]);
  }
  return {std::move(train), std::move(test)};
}

// Dataset file: magic "PLB1"; header n_ac, J, clip count (u32); per clip the
// action id, subject id and T (u32) followed by joints3d then joints2d as
// little-endian f64.
inline void write_dataset(const std::string& path, const Dataset& ds) {
  auto os = io::open_out(path, /*binary=*/true);
  io::write_magic(os, "PLB1");
  io::write_u32(os, static_cast<std::uint32_t>(ds.n_actions));
  io::write_u32(os, static_cast<std::uint32_t>(ds.joints));
  io::write_u32(os, static_cast<std::uint32_t>(ds.clips.size()));
  for (const PoseClip& c : ds.clips) {
    io::write_u32(os, static_cast<std::uint32_t>(c.action));
    io::write_u32(os, static_cast<std::uint32_t>(c.subject));
    io::write_u32(os, static_cast<std::uint32_t>(c.frames));
    for (double v : c.joints3d.values()) io::write_f64(os, v);
    for (double v : c.joints2d.values()) io::write_f64(os, v);
  }
  if (!os) throw IoError("failed writing dataset: " + path);
}

inline Dataset read_dataset(const std::string& path) {
  auto is = io::open_in(path, /*binary=*/true);
  io::expect_magic(is, "PLB1", path);
  Dataset ds;
  ds.n_actions = static_cast<int>(io::read_u32(is));
  ds.joints = io::read_u32(is);
  const std::uint32_t n_clips = io::read_u32(is);
  for (std::uint32_t i = 0; i < n_clips; ++i) {
    PoseClip c;
    c.action = static_cast<int>(io::read_u32(is));
    c.subject = static_cast<int>(io::read_u32(is));
    c.frames = io::read_u32(is);
    c.joints3d = Tensor({c.frames, ds.joints, 3});
    c.joints2d = Tensor({c.frames, ds.joints, 2});
    for (double& v : c.joints3d.values()) v = io::read_f64(is);
    for (double& v : c.joints2d.values()) v = io::read_f64(is);
    ds.clips.push_back(std::move(c));
  }
  return ds;
}

// One row per frame, for eyeballing clips in a spreadsheet.
inline void write_dataset_csv(const std::string& path, const Dataset& ds) {
  auto os = io::open_out(path, /*binary=*/false);
  os << "action,subject,clip,frame";
  for (std::size_t j = 0; j < ds.joints; ++j)
    os << ",j" << j << "_x3d,j" << j << "_y3d,j" << j << "_z3d";
  for (std::size_t j = 0; j < ds.joints; ++j) os << ",j" << j << "_x2d,j" << j << "_y2d";
  os << "\n";
  os.precision(17);
  int clip_no = 0;
  int last_action = -1, last_subject = -1;
  for (const PoseClip& c : ds.clips) {
    if (c.action != last_action || c.subject != last_subject) clip_no = 0;
    for (std::size_t t = 0; t < c.frames; ++t) {
      os << c.action << ',' << c.subject << ',' << clip_no << ',' << t;
      for (std::size_t j = 0; j < ds.joints; ++j)
        os << ',' << c.joints3d.at(t, j, 0) << ',' << c.joints3d.at(t, j, 1) << ',' << c.joints3d.at(t, j, 2);
      for (std::size_t j = 0; j < ds.joints; ++j)
        os << ',' << c.joints2d.at(t, j, 0) << ',' << c.joints2d.at(t, j, 1);
      os << "\n";
    }
    ++clip_no;
    last_action = c.action;
    last_subject = c.subject;
  }
}

inline std::string action_name(int action, int n_actions) {
  static const std::vector<std::string> names = {
      "Dir.", "Disc.", "Eat", "Greet", "Phone", "Photo", "Pose", "Purch.",
      "Sit", "SitD.", "Smoke", "Wait", "WkD.", "Walk", "WkT."};
  if (n_actions <= static_cast<int>(names.size()) && action < static_cast<int>(names.size())) {
    return names[static_cast<std::size_t>(action)];
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "A%02d", action);
  return buf;
}

// Resolves an action given either its display name or a numeric id.
inline int resolve_action(const std::string& text, int n_actions) {
  for (int a = 0; a < n_actions; ++a)
    if (action_name(a, n_actions) == text) return a;
  try {
    const int a = std::stoi(text);
    if (a >= 0 && a < n_actions) return a;
  } catch (...) {
  }
  throw Error("unknown action \"" + text + "\" (expected a name like \"Eat\" or an id below " +
              std::to_string(n_actions) + ")");
}

}  // namespace poselift
