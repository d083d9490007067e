#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "poselift/error.hpp"
#include "poselift/synthmotion.hpp"

namespace poselift {

// Training-budget accounting for the two problem modes and the two schedules:
//   common          -> every action gets the same frame allotment
//   action_oriented -> the whole budget goes to one target action
//   pooled          -> one round trains on all allotted actions mixed
//   per_action      -> one round (and one model) per action, fixed label order

enum class BudgetMode { Common, ActionOriented };
enum class Schedule { Pooled, PerAction };

struct TrainBudget {
  BudgetMode mode = BudgetMode::Common;
  Schedule schedule = Schedule::PerAction;
  long total_frames = 0;
  int n_actions = 0;
  int target = -1;                // action_oriented only
  std::vector<long> per_action;   // allotted frames per action
  long dropped_remainder = 0;     // common mode: total_frames % n_actions
};

// Epoch equivalence: one pooled epoch costs n_ac unit epochs.
inline long unit_epochs_for(long original_epochs, int n_actions) {
  if (original_epochs < 1 || n_actions < 1) {
    throw Error("unit_epochs_for: both arguments must be >= 1");
  }
  return original_epochs * static_cast<long>(n_actions);
}

// Unbalanced-frame variant: floor of total frames over the target's frames.
inline long epoch_ratio_unbalanced(const std::map<int, long>& frame_totals, int target) {
  const auto it = frame_totals.find(target);
  if (it == frame_totals.end()) {
    throw Error("epoch_ratio_unbalanced: target action " + std::to_string(target) +
                " not present in frame totals");
  }
  long total = 0;
  for (const auto& [action, frames] : frame_totals) {
    if (frames < 1) throw Error("epoch_ratio_unbalanced: frame totals must be >= 1");
    total += frames;
  }
  return total / it->second;
}

inline TrainBudget allocate(BudgetMode mode, long total_frames, int n_actions, Schedule schedule,
                            std::optional<int> target = std::nullopt) {
  if (n_actions < 1) throw Error("allocate: need at least one action");
  TrainBudget b;
  b.mode = mode;
  b.schedule = schedule;
  b.total_frames = total_frames;
  b.n_actions = n_actions;
  b.per_action.assign(static_cast<std::size_t>(n_actions), 0);
  if (mode == BudgetMode::Common) {
    if (total_frames < n_actions) {
      throw Error("allocate: budget " + std::to_string(total_frames) + " is below one frame per action (" +
                  std::to_string(n_actions) + " actions)");
    }
    const long share = total_frames / n_actions;
    for (long& f : b.per_action) f = share;
    b.dropped_remainder = total_frames - share * n_actions;
  } else {
    if (!target.has_value()) throw Error("allocate: action-oriented budget needs a target action");
    if (*target < 0 || *target >= n_actions) {
      throw Error("allocate: target action " + std::to_string(*target) + " out of range");
    }
    b.target = *target;
    // data-budget equality: the target alone receives everything the pooled
    // baseline would spread over all actions
    b.per_action[static_cast<std::size_t>(*target)] = total_frames;
  }
  return b;
}

struct PlanRound {
  std::vector<std::pair<int, long>> action_frames;  // (action, frames), label-ordered
  long unit_epochs = 0;
  std::string label;

  long total_frames() const {
    long n = 0;
    for (const auto& [a, f] : action_frames) n += f;
    return n;
  }
};

struct EpochEquivalence {
  long unit_epochs_per_round = 0;
  long total_unit_epochs = 0;  // unit_epochs_for(per round, n_actions)
  int n_actions = 0;
};

struct TrainPlan {
  Schedule schedule = Schedule::PerAction;
  std::vector<PlanRound> rounds;
  EpochEquivalence equivalence;

  // Human-readable manifest, one line per round; embedded in run reports.
  std::string manifest() const {
    std::ostringstream os;
    os << (schedule == Schedule::Pooled ? "schedule: pooled\n" : "schedule: per-action\n");
    os << "equivalence: 1 pooled epoch = " << equivalence.n_actions
       << " unit epochs; plan runs " << equivalence.unit_epochs_per_round
       << " epochs per round = " << equivalence.total_unit_epochs << " unit epochs total\n";
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      const PlanRound& r = rounds[i];
      os << "round " << i << ": " << r.label << " frames=" << r.total_frames()
         << " unit_epochs=" << r.unit_epochs;
      if (r.action_frames.size() > 1) {
        os << " (";
        for (std::size_t k = 0; k < r.action_frames.size(); ++k) {
          if (k) os << ", ";
          os << action_name(r.action_frames[k].first, equivalence.n_actions) << ":"
             << r.action_frames[k].second;
        }
        os << ")";
      }
      os << "\n";
    }
    return os.str();
  }
};

// Rounds come out in fixed action-label order, so the plan is independent of
// any map iteration order upstream.
inline TrainPlan build_plan(const TrainBudget& budget, long unit_epochs) {
  if (unit_epochs < 1) throw Error("build_plan: unit epochs must be >= 1");
  TrainPlan plan;
  plan.schedule = budget.schedule;
  plan.equivalence = {unit_epochs, unit_epochs_for(unit_epochs, budget.n_actions), budget.n_actions};
  if (budget.schedule == Schedule::Pooled) {
    PlanRound round;
    round.unit_epochs = unit_epochs;
    round.label = "pooled";
    for (int a = 0; a < budget.n_actions; ++a) {
      const long f = budget.per_action[static_cast<std::size_t>(a)];
      if (f > 0) round.action_frames.emplace_back(a, f);
    }
    if (round.action_frames.empty()) throw Error("build_plan: empty budget, nothing to train");
    plan.rounds.push_back(std::move(round));
  } else {
    for (int a = 0; a < budget.n_actions; ++a) {
      const long f = budget.per_action[static_cast<std::size_t>(a)];
      if (f == 0) continue;  // zero-budget actions get no round
      PlanRound round;
      round.unit_epochs = unit_epochs;
      round.label = action_name(a, budget.n_actions);
      round.action_frames.emplace_back(a, f);
      plan.rounds.push_back(std::move(round));
    }
    if (plan.rounds.empty()) throw Error("build_plan: empty budget, nothing to train");
  }
  return plan;
}

// A round may never ask for more frames than the dataset holds for an action;
// that is an error, not a silent truncation.
inline void check_plan_frames(const TrainPlan& plan, const std::vector<long>& frames_per_action) {
  for (const PlanRound& round : plan.rounds) {
    for (const auto& [action, frames] : round.action_frames) {
      const long have = frames_per_action.at(static_cast<std::size_t>(action));
      if (frames > have) {
        throw Error("plan round \"" + round.label + "\" wants " + std::to_string(frames) +
                    " frames of action " + std::to_string(action) + " but the dataset has " +
                    std::to_string(have));
      }
    }
  }
}

}  // namespace poselift
