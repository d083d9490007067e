#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "poselift/tensor.hpp"

namespace poselift {

// Evaluation protocols and training-efficiency metrics.

// Mean per-joint position error over a T x J x 3 sequence pair, millimetres.
// Both sequences are root-aligned per frame (joint 0 subtracted) first.
inline double mpjpe(const Tensor& pred, const Tensor& gt) {
  if (!pred.same_shape(gt) || pred.rank() != 3 || pred.dim(2) != 3) {
    throw TensorError("mpjpe: need matching T x J x 3 tensors, got " + pred.shape_str() + " and " +
                      gt.shape_str());
  }
  const std::size_t frames = pred.dim(0), joints = pred.dim(1);
  if (frames < 1) throw TensorError("mpjpe: empty sequence");
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < joints; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double p = pred.at(t, j, c) - pred.at(t, 0, c);
        const double g = gt.at(t, j, c) - gt.at(t, 0, c);
        d2 += (p - g) * (p - g);
      }
      total += std::sqrt(d2);
    }
  }
  return total / static_cast<double>(frames * joints);
}

// Velocity error: mean distance between first-order temporal differences.
// No root re-alignment of the differences; constants cancel in the diff.
inline double v_mpjpe(const Tensor& pred, const Tensor& gt) {
  if (!pred.same_shape(gt) || pred.rank() != 3 || pred.dim(2) != 3) {
    throw TensorError("v_mpjpe: need matching T x J x 3 tensors, got " + pred.shape_str() + " and " +
                      gt.shape_str());
  }
  const std::size_t frames = pred.dim(0), joints = pred.dim(1);
  if (frames < 2) throw TensorError("v_mpjpe: need at least 2 frames, got " + std::to_string(frames));
  double total = 0.0;
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t j = 0; j < joints; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double vp = pred.at(t, j, c) - pred.at(t - 1, j, c);
        const double vg = gt.at(t, j, c) - gt.at(t - 1, j, c);
        d2 += (vp - vg) * (vp - vg);
      }
      total += std::sqrt(d2);
    }
  }
  return total / static_cast<double>((frames - 1) * joints);
}

// Regulated error: k-scaled mean of two models' half-training errors.
inline double epsilon0(double eps_half_model1, double eps_half_model2, double k) {
  if (eps_half_model1 < 0.0 || eps_half_model2 < 0.0) throw Error("epsilon0: errors must be >= 0");
  if (k <= 0.0) throw Error("epsilon0: k must be > 0");
  return (eps_half_model1 + eps_half_model2) / 2.0 * k;
}

// Time-precision rate: error reduction from the regulated baseline per second
// of training. Negative when a model ends worse than the baseline.
inline double tpr(double eps0, double eps_final, double seconds) {
  if (seconds <= 0.0) throw Error("tpr: training time must be > 0 seconds");
  return (eps0 - eps_final) / seconds;
}

// Per-epoch validation error series; epochs strictly increasing.
struct ErrorCurve {
  std::vector<std::pair<long, double>> points;

  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!std::isfinite(points[i].second)) throw Error("error curve: non-finite error value");
      if (i > 0 && points[i].first <= points[i - 1].first) {
        throw Error("error curve: epochs must be strictly increasing");
      }
    }
  }

  double final_error() const {
    if (points.empty()) throw Error("error curve: empty");
    return points.back().second;
  }

  // Error at the observed epoch closest to `epoch`; ties go to the earlier one.
  double value_nearest(double epoch) const {
    if (points.empty()) throw Error("error curve: empty");
    std::size_t best = 0;
    double best_dist = std::fabs(static_cast<double>(points[0].first) - epoch);
    for (std::size_t i = 1; i < points.size(); ++i) {
      const double d = std::fabs(static_cast<double>(points[i].first) - epoch);
      if (d < best_dist) {
        best = i;
        best_dist = d;
      }
    }
    return points[best].second;
  }
};

// First observed epoch whose error is within delta of the final observed
// error; nullopt ("no convergence") when only the final epoch qualifies.
inline std::optional<long> convergence_epoch(const ErrorCurve& curve, double delta) {
  if (curve.points.empty()) throw Error("convergence_epoch: empty curve");
  if (delta <= 0.0) throw Error("convergence_epoch: delta must be > 0");
  curve.validate();
  const double last = curve.points.back().second;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (std::fabs(curve.points[i].second - last) <= delta) {
      if (i + 1 == curve.points.size()) return std::nullopt;
      return curve.points[i].first;
    }
  }
  return std::nullopt;  // unreachable: the last point always qualifies
}

// Percentage convention used in the comparisons: how much larger `before` is
// relative to `after`.
inline double improvement_percent(double before, double after) {
  if (before <= 0.0 || after <= 0.0) throw Error("improvement_percent: inputs must be > 0");
  return (before - after) / after * 100.0;
}

// ---------------------------------------------------------------------------
// Report assembly for a two-model comparison run.
// ---------------------------------------------------------------------------

struct ModelReport {
  std::string model;  // "pooled" or "per-action"
  std::string mode;   // "common" or "action-oriented"
  long receptive_field = 0;
  long unit_epochs = 0;
  std::vector<std::optional<double>> mpjpe_mm;    // per action
  std::vector<std::optional<double>> vmpjpe_mm;   // per action
  double train_seconds = 0.0;
  double eps_half_mpjpe = 0.0, eps_final_mpjpe = 0.0;
  double eps_half_vmpjpe = 0.0, eps_final_vmpjpe = 0.0;
  double tpr_mpjpe = 0.0, tpr_vmpjpe = 0.0;

  static double mean_present(const std::vector<std::optional<double>>& cells) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells) {
      if (c) {
        total += *c;
        ++n;
      }
    }
    if (n == 0) throw Error("report: no per-action entries to average");
    return total / static_cast<double>(n);
  }

  double avg_mpjpe() const { return mean_present(mpjpe_mm); }
  double avg_vmpjpe() const { return mean_present(vmpjpe_mm); }
};

struct MetricReport {
  std::vector<std::string> actions;
  double k = 1.2;
  double eps0_mpjpe = 0.0;
  double eps0_vmpjpe = 0.0;
  std::vector<ModelReport> models;

  // Row-per-(model, action) CSV plus a summary block. The train_seconds
  // column and the tpr/seconds summary lines are the only wall-clock-derived
  // fields; everything else is deterministic under a fixed seed.
  void write_csv(std::ostream& os) const {
    os << "model,mode,F,UE,action,mpjpe_mm,vmpjpe_mm,train_seconds\n";
    char buf[64];
    const auto cell = [&](const std::optional<double>& v) {
      if (!v) return std::string();
      std::snprintf(buf, sizeof(buf), "%.6f", *v);
      return std::string(buf);
    };
    for (const ModelReport& m : models) {
      for (std::size_t a = 0; a < actions.size(); ++a) {
        os << m.model << ',' << m.mode << ',' << m.receptive_field << ',' << m.unit_epochs << ','
           << actions[a] << ',' << cell(m.mpjpe_mm[a]) << ',' << cell(m.vmpjpe_mm[a]) << ',';
        std::snprintf(buf, sizeof(buf), "%.3f", m.train_seconds);
        os << buf << "\n";
      }
    }
    os << "summary,k," << k << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", eps0_mpjpe);
    os << "summary,epsilon0_mpjpe," << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.6f", eps0_vmpjpe);
    os << "summary,epsilon0_vmpjpe," << buf << "\n";
    for (const ModelReport& m : models) {
      std::snprintf(buf, sizeof(buf), "%.6f", m.eps_half_mpjpe);
      os << "summary," << m.model << ",eps_half_mpjpe," << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.6f", m.eps_final_mpjpe);
      os << "summary," << m.model << ",eps_final_mpjpe," << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.6f", m.eps_half_vmpjpe);
      os << "summary," << m.model << ",eps_half_vmpjpe," << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.6f", m.eps_final_vmpjpe);
      os << "summary," << m.model << ",eps_final_vmpjpe," << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.3f", m.train_seconds);
      os << "summary," << m.model << ",train_seconds," << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.6e", m.tpr_mpjpe);
      os << "summary," << m.model << ",tpr_mpjpe," << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.6e", m.tpr_vmpjpe);
      os << "summary," << m.model << ",tpr_vmpjpe," << buf << "\n";
    }
  }
};

}  // namespace poselift
