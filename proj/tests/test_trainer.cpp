#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "poselift/trainer.hpp"

using namespace poselift;

namespace {

Dataset tiny_dataset(int actions, int clips_per_action, std::size_t frames, std::uint64_t seed,
                     double noise = 0.0) {
  GenConfig cfg;
  cfg.n_actions = actions;
  cfg.subjects = 1;
  cfg.clips_per_action = clips_per_action;
  cfg.frames_per_clip = frames;
  cfg.noise_px = noise;
  cfg.seed = seed;
  return gen_dataset(cfg);
}

LiftNetSpec tiny_liftnet(std::size_t blocks, std::size_t channels = 8) {
  LiftNetSpec spec;
  spec.joints = 16;
  spec.blocks = blocks;
  spec.channels = channels;
  return spec;
}

bool params_equal(LiftNetParams& a, LiftNetParams& b) {
  const auto ta = a.all(), tb = b.all();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (!tensors_equal(*ta[i], *tb[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("sample_windows") {
  const Dataset ds = tiny_dataset(2, 2, 10, 1);

  SECTION("F=1 with a matching budget returns every frame once") {
    const auto windows = sample_windows(ds, {0}, 1, 10, 7);
    REQUIRE(windows.size() == 10);
    std::set<std::size_t> starts;
    for (const auto& w : windows) starts.insert(w.start);
    REQUIRE(starts.size() == 10);  // all distinct: a shuffled enumeration, not a resample
  }
  SECTION("a clip exactly as long as the field gives one window") {
    const Dataset long_ds = tiny_dataset(1, 2, 27, 2);
    const auto windows = sample_windows(long_ds, {0}, 27, 100, 7);
    REQUIRE(windows.size() == 1);
    REQUIRE(windows[0].start == 0);
  }
  SECTION("budget truncation is deterministic under the seed") {
    const auto a = sample_windows(ds, {0, 1}, 3, 5, 99);
    const auto b = sample_windows(ds, {0, 1}, 3, 5, 99);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      REQUIRE(a[i].clip_index == b[i].clip_index);
      REQUIRE(a[i].start == b[i].start);
    }
  }
  SECTION("clips shorter than the field are rejected") {
    REQUIRE_THROWS_WITH(sample_windows(ds, {0}, 11, 5, 1),
                        Catch::Matchers::ContainsSubstring("shorter"));
  }
  SECTION("no clips means no windows") {
    REQUIRE_THROWS_AS(sample_windows(ds, {}, 1, 5, 1), Error);
  }
}

TEST_CASE("learning-rate schedule is exact") {
  TrainConfig cfg;
  cfg.lr = 0.8;
  cfg.lr_decay = 0.5;
  REQUIRE(cfg.lr_at(1) == 0.8);
  REQUIRE(cfg.lr_at(2) == 0.4);
  REQUIRE(cfg.lr_at(4) == 0.8 * std::pow(0.5, 3.0));
}

TEST_CASE("zero learning rate leaves the model untouched") {
  const Dataset ds = tiny_dataset(2, 3, 12, 5);
  const auto [train, test] = split_dataset(ds, 0.34, 1);
  const TrainBudget budget = allocate(BudgetMode::Common, 16, 2, Schedule::PerAction);
  const TrainPlan plan = build_plan(budget, 3);

  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.seed = 11;
  const LiftNetSpec spec = tiny_liftnet(0);
  RoundResult result = train_round(plan.rounds[0], train, test, spec, cfg, 42);

  LiftNetSpec init_spec = spec;
  init_spec.seed = derive_stream(42, {1});
  LiftNetParams init = build_liftnet(init_spec);
  REQUIRE(params_equal(result.params, init));

  REQUIRE(result.curve.points.size() == 3);
  for (const auto& [epoch, err] : result.curve.points) {
    REQUIRE(err == result.curve.points[0].second);  // flat curve
  }
}

TEST_CASE("training twice with the same inputs is bit-identical") {
  const Dataset ds = tiny_dataset(2, 3, 12, 6);
  const auto [train, test] = split_dataset(ds, 0.34, 1);
  const TrainPlan plan = build_plan(allocate(BudgetMode::Common, 16, 2, Schedule::PerAction), 2);

  TrainConfig cfg;
  cfg.lr = 0.5;
  cfg.seed = 3;
  const LiftNetSpec spec = tiny_liftnet(1);
  RoundResult a = train_round(plan.rounds[1], train, test, spec, cfg, 77);
  RoundResult b = train_round(plan.rounds[1], train, test, spec, cfg, 77);
  REQUIRE(params_equal(a.params, b.params));
  REQUIRE(a.curve.points == b.curve.points);
  REQUIRE(a.seconds > 0.0);
}

TEST_CASE("round budgets above the available frames are rejected") {
  const Dataset ds = tiny_dataset(2, 3, 12, 7);
  const auto [train, test] = split_dataset(ds, 0.34, 1);
  // each action holds 2 train clips x 12 frames = 24 frames
  PlanRound round;
  round.action_frames = {{0, 25}};
  round.unit_epochs = 1;
  round.label = "over";
  TrainConfig cfg;
  REQUIRE_THROWS_WITH(train_round(round, train, test, tiny_liftnet(0), cfg, 1),
                      Catch::Matchers::ContainsSubstring("exceeds"));
}

TEST_CASE("a non-finite loss aborts with the epoch and batch named") {
  Dataset ds = tiny_dataset(1, 2, 8, 8);
  // poison a training target; relu would mask a poisoned 2-D input to 0
  ds.clips[0].joints3d.at(3, 4, 0) = std::numeric_limits<double>::quiet_NaN();
  Dataset test = ds;  // contents irrelevant, the round aborts before validation
  PlanRound round;
  round.action_frames = {{0, 16}};  // every window, so the poisoned frame is always hit
  round.unit_epochs = 1;
  round.label = "nan";
  TrainConfig cfg;
  cfg.batch_size = 64;
  try {
    train_round(round, ds, test, tiny_liftnet(0), cfg, 5);
    FAIL("expected a non-finite loss error");
  } catch (const Error& e) {
    REQUIRE(std::string(e.what()).find("epoch 1") != std::string::npos);
    REQUIRE(std::string(e.what()).find("batch 0") != std::string::npos);
  }
}

TEST_CASE("noiseless per-frame training at least halves the epoch-1 error") {
  // regression bound observed from this build's own training run
  const Dataset ds = tiny_dataset(2, 4, 120, 7, /*noise=*/0.0);
  const auto [train, test] = split_dataset(ds, 0.25, 7);
  const TrainPlan plan = build_plan(allocate(BudgetMode::Common, 600, 2, Schedule::PerAction), 50);

  TrainConfig cfg;
  cfg.seed = 7;
  const LiftNetSpec spec = tiny_liftnet(0, 64);
  const RoundResult result = train_round(plan.rounds[0], train, test, spec, cfg, derive_stream(7, {0}));
  REQUIRE(result.curve.points.size() == 50);
  const double first = result.curve.points.front().second;
  const double final = result.curve.final_error();
  INFO("epoch-1 " << first << " mm, final " << final << " mm");
  REQUIRE(final < 0.5 * first);
}

TEST_CASE("run_plan executes one round per action and merges in order") {
  const Dataset ds = tiny_dataset(3, 3, 9, 9);
  const auto [train, test] = split_dataset(ds, 0.34, 2);
  const TrainPlan plan = build_plan(allocate(BudgetMode::Common, 30, 3, Schedule::PerAction), 2);

  TrainConfig cfg;
  cfg.lr = 0.3;
  cfg.seed = 21;
  const RunRecord record = run_plan(plan, train, test, tiny_liftnet(0), cfg);
  REQUIRE(record.rounds.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(record.rounds[i].label == action_name(static_cast<int>(i), 3));
    REQUIRE(record.rounds[i].curve.points.size() == 2);
  }
  REQUIRE(record.total_seconds > 0.0);
  REQUIRE(record.manifest.find("per-action") != std::string::npos);

  SECTION("pooled plans yield a single round") {
    const TrainPlan pooled = build_plan(allocate(BudgetMode::Common, 30, 3, Schedule::Pooled), 2);
    const RunRecord rec = run_plan(pooled, train, test, tiny_liftnet(0), cfg);
    REQUIRE(rec.rounds.size() == 1);
    REQUIRE(rec.rounds[0].actions.size() == 3);
  }
}

TEST_CASE("parallel rounds reproduce the sequential results exactly") {
  const Dataset ds = tiny_dataset(3, 3, 9, 10);
  const auto [train, test] = split_dataset(ds, 0.34, 2);
  const TrainPlan plan = build_plan(allocate(BudgetMode::Common, 30, 3, Schedule::PerAction), 2);

  TrainConfig cfg;
  cfg.lr = 0.3;
  cfg.seed = 33;
  RunRecord sequential = run_plan(plan, train, test, tiny_liftnet(1), cfg);
  cfg.parallel_rounds = true;
  RunRecord parallel = run_plan(plan, train, test, tiny_liftnet(1), cfg);

  REQUIRE(sequential.rounds.size() == parallel.rounds.size());
  for (std::size_t i = 0; i < sequential.rounds.size(); ++i) {
    REQUIRE(params_equal(sequential.rounds[i].params, parallel.rounds[i].params));
    REQUIRE(sequential.rounds[i].curve.points == parallel.rounds[i].curve.points);
  }
}

TEST_CASE("empty plans are rejected, never silently recorded") {
  const Dataset ds = tiny_dataset(2, 3, 9, 11);
  const auto [train, test] = split_dataset(ds, 0.34, 2);
  TrainPlan plan;
  REQUIRE_THROWS_AS(run_plan(plan, train, test, tiny_liftnet(0), TrainConfig{}), Error);
}
