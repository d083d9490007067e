#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "poselift/adam.hpp"
#include "poselift/autodiff.hpp"
#include "poselift/budgeting.hpp"
#include "poselift/liftnet.hpp"
#include "poselift/metrics.hpp"
#include "poselift/rng.hpp"
#include "poselift/synthmotion.hpp"

namespace poselift {

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr = 3e-4;
  double lr_decay = 0.95;  // per unit epoch
  std::uint64_t seed = 1;
  bool parallel_rounds = false;

  void validate() const {
    if (batch_size < 1) throw Error("train config: batch size must be >= 1");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw Error("train config: decay must be in (0, 1]");
  }

  // lr at unit epoch e (1-based): lr * decay^(e-1), exactly
  double lr_at(long epoch) const { return lr * std::pow(lr_decay, static_cast<double>(epoch - 1)); }
};

struct SampleWindow {
  std::size_t clip_index = 0;
  std::size_t start = 0;  // window covers [start, start + F)
};

// Enumerates every valid window start over the given clips, shuffles on the
// seed, and truncates to the budget. Pure function of its arguments.
inline std::vector<SampleWindow> sample_windows(const Dataset& ds,
                                                const std::vector<std::size_t>& clip_indices,
                                                std::size_t receptive_field, long budget,
                                                std::uint64_t seed) {
  std::vector<SampleWindow> windows;
  for (std::size_t ci : clip_indices) {
    const PoseClip& clip = ds.clips.at(ci);
    if (clip.frames < receptive_field) {
      throw Error("sample_windows: clip with " + std::to_string(clip.frames) +
                  " frames is shorter than the receptive field " + std::to_string(receptive_field));
    }
    for (std::size_t s = 0; s + receptive_field <= clip.frames; ++s) windows.push_back({ci, s});
  }
  if (windows.empty()) throw Error("sample_windows: no valid windows");
  SplitMix64 rng(seed);
  seeded_shuffle(windows, rng);
  if (budget >= 0 && static_cast<std::size_t>(budget) < windows.size()) {
    windows.resize(static_cast<std::size_t>(budget));
  }
  return windows;
}

namespace detail {

// PoseClip 2-D track as the 2J x T channel layout the network consumes
// (row 2j = x of joint j, row 2j+1 = y).
inline Tensor clip_2d_channels(const PoseClip& clip) {
  const std::size_t joints = clip.joints2d.dim(1), frames = clip.frames;
  Tensor out({2 * joints, frames});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < joints; ++j) {
      out.at(2 * j, t) = clip.joints2d.at(t, j, 0);
      out.at(2 * j + 1, t) = clip.joints2d.at(t, j, 1);
    }
  }
  return out;
}

inline Tensor window_of(const Tensor& channels, std::size_t start, std::size_t length) {
  const std::size_t rows = channels.dim(0);
  Tensor out({rows, length});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < length; ++t) out.at(r, t) = channels.at(r, start + t);
  return out;
}

inline Tensor center_pose(const PoseClip& clip, std::size_t frame) {
  const std::size_t joints = clip.joints3d.dim(1);
  Tensor out({joints, 3});
  for (std::size_t j = 0; j < joints; ++j)
    for (std::size_t c = 0; c < 3; ++c) out.at(j, c) = clip.joints3d.at(frame, j, c);
  return out;
}

// Ground-truth slice covered by a sliding-window prediction: frames
// [pad, pad + n) where pad = (F-1)/2.
inline Tensor covered_gt(const PoseClip& clip, std::size_t receptive_field) {
  const std::size_t pad = (receptive_field - 1) / 2;
  const std::size_t n = clip.frames - receptive_field + 1;
  const std::size_t joints = clip.joints3d.dim(1);
  Tensor out({n, joints, 3});
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < joints; ++j)
      for (std::size_t c = 0; c < 3; ++c) out.at(t, j, c) = clip.joints3d.at(t + pad, j, c);
  return out;
}

struct WeightedError {
  double weighted_sum = 0.0;
  double weight = 0.0;

  void add(double value, double w) {
    weighted_sum += value * w;
    weight += w;
  }

  double mean() const {
    if (weight <= 0.0) throw Error("evaluation: no frames to average over");
    return weighted_sum / weight;
  }
};

}  // namespace detail

// Validation MPJPE over the test clips whose action is in `actions`
// (frame-weighted across clips).
inline double evaluate_mpjpe(const LiftNetParams& params, const Dataset& test,
                             const std::vector<int>& actions) {
  const std::size_t field = params.spec.receptive_field();
  detail::WeightedError acc;
  for (const PoseClip& clip : test.clips) {
    bool wanted = false;
    for (int a : actions) wanted = wanted || (clip.action == a);
    if (!wanted || clip.frames < field) continue;
    const Tensor pred = predict_sequence(params, detail::clip_2d_channels(clip));
    const Tensor gt = detail::covered_gt(clip, field);
    acc.add(mpjpe(pred, gt), static_cast<double>(pred.dim(0)));
  }
  return acc.mean();
}

inline double evaluate_vmpjpe(const LiftNetParams& params, const Dataset& test,
                              const std::vector<int>& actions) {
  const std::size_t field = params.spec.receptive_field();
  detail::WeightedError acc;
  for (const PoseClip& clip : test.clips) {
    bool wanted = false;
    for (int a : actions) wanted = wanted || (clip.action == a);
    if (!wanted || clip.frames < field + 1) continue;
    const Tensor pred = predict_sequence(params, detail::clip_2d_channels(clip));
    const Tensor gt = detail::covered_gt(clip, field);
    acc.add(v_mpjpe(pred, gt), static_cast<double>(pred.dim(0) - 1));
  }
  return acc.mean();
}

struct RoundResult {
  std::string label;
  std::vector<int> actions;
  LiftNetParams params;
  ErrorCurve curve;            // validation MPJPE after each unit epoch
  double vmpjpe_half = 0.0;    // velocity error at the epoch nearest UE/2
  double vmpjpe_final = 0.0;   // velocity error after the last unit epoch
  double seconds = 0.0;        // optimization loop only
};

// Observed epoch nearest to half the epoch budget; ties go to the earlier
// epoch, and the first epoch is the floor.
inline long half_epoch_of(long unit_epochs) {
  const double half = static_cast<double>(unit_epochs) / 2.0;
  const double lo = std::floor(half);
  const long epoch = (half - lo <= 0.5) ? static_cast<long>(lo) : static_cast<long>(lo) + 1;
  return epoch < 1 ? 1 : epoch;
}

struct RunRecord {
  std::string manifest;
  std::vector<RoundResult> rounds;
  double total_seconds = 0.0;  // sum over rounds, comparable across schedules
};

// One training round: `unit_epochs` passes over the round's allotted windows
// in seeded-shuffled order, Adam updates per batch, validation MPJPE after
// every unit epoch on the held-out clips of the round's own action set.
// Single-threaded and bit-reproducible for fixed inputs.
inline RoundResult train_round(const PlanRound& round, const Dataset& train, const Dataset& test,
                               const LiftNetSpec& model_spec, const TrainConfig& config,
                               std::uint64_t round_seed) {
  config.validate();
  const std::size_t field = model_spec.receptive_field();

  RoundResult result;
  result.label = round.label;
  for (const auto& [action, frames] : round.action_frames) result.actions.push_back(action);

  // per-action allotments, merged then shuffled once more for pooled rounds
  const std::vector<long> have = train.frames_per_action();
  std::vector<SampleWindow> allotment;
  for (const auto& [action, frames] : round.action_frames) {
    if (frames > have.at(static_cast<std::size_t>(action))) {
      throw Error("round \"" + round.label + "\" budget " + std::to_string(frames) +
                  " exceeds available frames " + std::to_string(have[static_cast<std::size_t>(action)]) +
                  " for action " + std::to_string(action));
    }
    const auto windows = sample_windows(train, train.clips_of_action(action), field, frames,
                                        derive_stream(round_seed, {2, static_cast<std::uint64_t>(action)}));
    allotment.insert(allotment.end(), windows.begin(), windows.end());
  }

  LiftNetSpec spec = model_spec;
  spec.seed = derive_stream(round_seed, {1});
  result.params = build_liftnet(spec);
  std::vector<Tensor*> params = result.params.all();
  AdamState adam = make_adam_state(params);

  // 2-D channel tracks cached per referenced clip
  std::vector<Tensor> tracks(train.clips.size());
  for (const SampleWindow& w : allotment) {
    if (tracks[w.clip_index].numel() == 0) tracks[w.clip_index] = detail::clip_2d_channels(train.clips[w.clip_index]);
  }

  using clock = std::chrono::steady_clock;
  const std::size_t pad = (field - 1) / 2;

  for (long epoch = 1; epoch <= round.unit_epochs; ++epoch) {
    const auto t0 = clock::now();
    std::vector<SampleWindow> order = allotment;
    SplitMix64 shuffle_rng(derive_stream(round_seed, {3, static_cast<std::uint64_t>(epoch)}));
    seeded_shuffle(order, shuffle_rng);

    AdamHyper hp;
    hp.lr = config.lr_at(epoch);

    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      GradTape tape;
      const std::vector<int> param_ids = register_liftnet(tape, result.params);
      std::vector<int> losses;
      losses.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        const SampleWindow& w = order[i];
        const int win = tape.input(normalize_window(detail::window_of(tracks[w.clip_index], w.start, field)));
        const int pose = liftnet_forward_nodes(tape, spec, param_ids, win);
        losses.push_back(tape.mpjpe_loss(pose, detail::center_pose(train.clips[w.clip_index], w.start + pad)));
      }
      const int loss = tape.mean_scalars(losses);
      const double loss_value = tape.value(loss)[0];
      if (!std::isfinite(loss_value)) {
        throw Error("round \"" + round.label + "\": non-finite loss at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(batch_index));
      }
      tape.backward(loss);
      std::vector<Tensor> grads;
      grads.reserve(params.size());
      for (const Tensor* p : params) grads.push_back(tape.grad_for(p));
      adam_step(params, grads, adam, hp);
    }
    result.seconds += std::chrono::duration<double>(clock::now() - t0).count();

    result.curve.points.emplace_back(epoch, evaluate_mpjpe(result.params, test, result.actions));
    if (epoch == half_epoch_of(round.unit_epochs)) {
      result.vmpjpe_half = evaluate_vmpjpe(result.params, test, result.actions);
    }
    if (epoch == round.unit_epochs) {
      result.vmpjpe_final = evaluate_vmpjpe(result.params, test, result.actions);
    }
  }
  result.curve.validate();
  return result;
}

// Executes every round of a plan. Rounds share nothing (own model, own
// streams), so the optional parallel path gives identical params and curves;
// only the wall-clock fields differ. Results always merge in plan order.
inline RunRecord run_plan(const TrainPlan& plan, const Dataset& train, const Dataset& test,
                          const LiftNetSpec& model_spec, const TrainConfig& config) {
  if (plan.rounds.empty()) throw Error("run_plan: plan has no rounds");
  check_plan_frames(plan, train.frames_per_action());

  RunRecord record;
  record.manifest = plan.manifest();
  record.rounds.resize(plan.rounds.size());

  const auto job = [&](std::size_t i) {
    const std::uint64_t round_seed = derive_stream(config.seed, {0x726F756E64ULL, i});
    record.rounds[i] = train_round(plan.rounds[i], train, test, model_spec, config, round_seed);
  };

  if (config.parallel_rounds && plan.rounds.size() > 1) {
    std::vector<std::exception_ptr> errors(plan.rounds.size());
    std::vector<std::thread> threads;
    threads.reserve(plan.rounds.size());
    for (std::size_t i = 0; i < plan.rounds.size(); ++i) {
      threads.emplace_back([&, i]() {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (std::thread& t : threads) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < plan.rounds.size(); ++i) job(i);
  }

  for (const RoundResult& r : record.rounds) record.total_seconds += r.seconds;
  return record;
}

}  // namespace poselift
