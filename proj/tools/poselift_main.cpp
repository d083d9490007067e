// poselift command-line harness: synthetic data generation, pooled vs
// per-action training comparisons, and the efficiency/convergence reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poselift/poselift.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace poselift;

namespace {

struct GenFlags {
  int actions = 15;
  int subjects = 1;
  int clips_per_action = 4;
  std::size_t frames_per_clip = 500;
  double noise_px = 1.0;
  std::uint64_t seed = 1;

  GenConfig config() const {
    GenConfig cfg;
    cfg.n_actions = actions;
    cfg.subjects = subjects;
    cfg.clips_per_action = clips_per_action;
    cfg.frames_per_clip = frames_per_clip;
    cfg.noise_px = noise_px;
    cfg.seed = seed;
    return cfg;
  }

  void add_to(CLI::App& app) {
    app.add_option("--actions", actions, "Number of action classes");
    app.add_option("--subjects", subjects, "Subjects per action");
    app.add_option("--clips-per-action", clips_per_action, "Clips per (action, subject)");
    app.add_option("--frames-per-clip", frames_per_clip, "Frames per clip");
    app.add_option("--noise", noise_px, "2-D keypoint noise sigma, px");
  }
};

std::size_t blocks_for_field(long field) {
  long f = 1;
  std::size_t blocks = 0;
  while (f < field) {
    f *= 3;
    ++blocks;
  }
  if (f != field) {
    throw Error("receptive field " + std::to_string(field) +
                " is not a power of 3 (valid: 1, 3, 9, 27, 81, 243, ...)");
  }
  return blocks;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char ch : name)
    if (std::isalnum(static_cast<unsigned char>(ch))) out += ch;
  return out.empty() ? "x" : out;
}

void print_frame_totals(const Dataset& ds) {
  const std::vector<long> totals = ds.frames_per_action();
  for (int a = 0; a < ds.n_actions; ++a) {
    std::cout << "f(" << action_name(a, ds.n_actions) << ") = " << totals[static_cast<std::size_t>(a)]
              << "\n";
  }
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

int cmd_gen_data(const GenFlags& flags, const std::string& out_path, const std::string& csv_path) {
  const Dataset ds = gen_dataset(flags.config());
  write_dataset(out_path, ds);
  std::cout << "wrote " << out_path << " (" << ds.clips.size() << " clips, " << ds.n_actions
            << " actions, J=" << ds.joints << ")\n";
  print_frame_totals(ds);
  if (!csv_path.empty()) {
    write_dataset_csv(csv_path, ds);
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string mode = "common";
  long field = 27;
  long unit_epochs = 15;
  long budget = 6000;
  std::string target;
  std::uint64_t seed = 1;
  double test_fraction = 0.25;
  double k = 1.2;
  std::size_t channels = 64;
  std::size_t batch = 32;
  double lr = 3e-4;
  double decay = 0.95;
  bool parallel = false;
  std::string dataset_path;
  std::string out_dir = "compare_out";
  GenFlags gen;
};

struct ScheduleOutcome {
  RunRecord record;
  ModelReport report;
  ErrorCurve mean_curve;  // per-epoch mean of the round curves
};

ErrorCurve mean_curve_of(const RunRecord& record) {
  ErrorCurve out;
  const std::size_t epochs = record.rounds.front().curve.points.size();
  for (std::size_t e = 0; e < epochs; ++e) {
    double sum = 0.0;
    for (const RoundResult& r : record.rounds) sum += r.curve.points[e].second;
    out.points.emplace_back(record.rounds.front().curve.points[e].first,
                            sum / static_cast<double>(record.rounds.size()));
  }
  return out;
}

ScheduleOutcome run_schedule(const std::string& model_name, const TrainPlan& plan,
                             const Dataset& train, const Dataset& test, const LiftNetSpec& spec,
                             const TrainConfig& config, const CompareArgs& args) {
  ScheduleOutcome out;
  out.record = run_plan(plan, train, test, spec, config);

  ModelReport& report = out.report;
  report.model = model_name;
  report.mode = args.mode;
  report.receptive_field = args.field;
  report.unit_epochs = args.unit_epochs;
  report.train_seconds = out.record.total_seconds;
  report.mpjpe_mm.assign(static_cast<std::size_t>(test.n_actions), std::nullopt);
  report.vmpjpe_mm.assign(static_cast<std::size_t>(test.n_actions), std::nullopt);

  if (plan.schedule == Schedule::Pooled) {
    const RoundResult& round = out.record.rounds.front();
    for (int a = 0; a < test.n_actions; ++a) {
      report.mpjpe_mm[static_cast<std::size_t>(a)] = evaluate_mpjpe(round.params, test, {a});
      report.vmpjpe_mm[static_cast<std::size_t>(a)] = evaluate_vmpjpe(round.params, test, {a});
    }
  } else {
    for (const RoundResult& round : out.record.rounds) {
      const int a = round.actions.front();
      report.mpjpe_mm[static_cast<std::size_t>(a)] = evaluate_mpjpe(round.params, test, {a});
      report.vmpjpe_mm[static_cast<std::size_t>(a)] = evaluate_vmpjpe(round.params, test, {a});
    }
  }

  out.mean_curve = mean_curve_of(out.record);
  const double half_epoch = static_cast<double>(args.unit_epochs) / 2.0;
  report.eps_half_mpjpe = out.mean_curve.value_nearest(half_epoch);
  report.eps_final_mpjpe = out.mean_curve.final_error();
  double vh = 0.0, vf = 0.0;
  for (const RoundResult& r : out.record.rounds) {
    vh += r.vmpjpe_half;
    vf += r.vmpjpe_final;
  }
  report.eps_half_vmpjpe = vh / static_cast<double>(out.record.rounds.size());
  report.eps_final_vmpjpe = vf / static_cast<double>(out.record.rounds.size());
  return out;
}

int cmd_compare(const CompareArgs& args) {
  const std::size_t blocks = blocks_for_field(args.field);
  if (args.unit_epochs < 1) throw Error("--ue must be >= 1");

  // dataset: load when a path is given, else generate from the flags
  Dataset ds;
  json data_desc;
  if (!args.dataset_path.empty()) {
    ds = read_dataset(args.dataset_path);
    data_desc = {{"path", args.dataset_path}};
  } else {
    ds = gen_dataset(args.gen.config());
    data_desc = {{"generated",
                  {{"actions", args.gen.actions},
                   {"subjects", args.gen.subjects},
                   {"clips_per_action", args.gen.clips_per_action},
                   {"frames_per_clip", args.gen.frames_per_clip},
                   {"noise_px", args.gen.noise_px},
                   {"seed", args.gen.seed}}}};
  }

  const auto [train, test] = split_dataset(ds, args.test_fraction, args.seed);

  const bool action_oriented = args.mode == "action-oriented";
  if (!action_oriented && args.mode != "common") {
    throw Error("--mode must be \"common\" or \"action-oriented\"");
  }
  std::optional<int> target;
  if (action_oriented) {
    if (args.target.empty()) throw Error("action-oriented mode needs --target");
    target = resolve_action(args.target, ds.n_actions);
  }

  // pooled baseline always trains the balanced common allocation; the
  // per-action schedule takes the same budget, concentrated on the target in
  // action-oriented mode
  const TrainBudget pooled_budget = allocate(BudgetMode::Common, args.budget, ds.n_actions, Schedule::Pooled);
  const TrainBudget ours_budget =
      action_oriented
          ? allocate(BudgetMode::ActionOriented, args.budget, ds.n_actions, Schedule::PerAction, target)
          : allocate(BudgetMode::Common, args.budget, ds.n_actions, Schedule::PerAction);
  const TrainPlan pooled_plan = build_plan(pooled_budget, args.unit_epochs);
  const TrainPlan ours_plan = build_plan(ours_budget, args.unit_epochs);
  if (pooled_budget.dropped_remainder > 0) {
    std::cout << "note: " << pooled_budget.dropped_remainder
              << " budget frame(s) dropped to balance the pooled allocation\n";
  }

  LiftNetSpec spec;
  spec.joints = ds.joints;
  spec.blocks = blocks;
  spec.channels = args.channels;
  spec.seed = args.seed;

  TrainConfig config;
  config.batch_size = args.batch;
  config.lr = args.lr;
  config.lr_decay = args.decay;
  config.seed = args.seed;
  config.parallel_rounds = args.parallel;

  std::cout << "== pooled schedule ==\n" << pooled_plan.manifest();
  ScheduleOutcome pooled = run_schedule("pooled", pooled_plan, train, test, spec, config, args);
  std::cout << "== per-action schedule ==\n" << ours_plan.manifest();
  ScheduleOutcome ours = run_schedule("per-action", ours_plan, train, test, spec, config, args);

  MetricReport report;
  report.actions.reserve(static_cast<std::size_t>(ds.n_actions));
  for (int a = 0; a < ds.n_actions; ++a) report.actions.push_back(action_name(a, ds.n_actions));
  report.k = args.k;
  report.eps0_mpjpe = epsilon0(pooled.report.eps_half_mpjpe, ours.report.eps_half_mpjpe, args.k);
  report.eps0_vmpjpe = epsilon0(pooled.report.eps_half_vmpjpe, ours.report.eps_half_vmpjpe, args.k);
  pooled.report.tpr_mpjpe = tpr(report.eps0_mpjpe, pooled.report.eps_final_mpjpe, pooled.report.train_seconds);
  ours.report.tpr_mpjpe = tpr(report.eps0_mpjpe, ours.report.eps_final_mpjpe, ours.report.train_seconds);
  pooled.report.tpr_vmpjpe = tpr(report.eps0_vmpjpe, pooled.report.eps_final_vmpjpe, pooled.report.train_seconds);
  ours.report.tpr_vmpjpe = tpr(report.eps0_vmpjpe, ours.report.eps_final_vmpjpe, ours.report.train_seconds);
  report.models.push_back(pooled.report);
  report.models.push_back(ours.report);

  // ---- artifacts ----
  fs::create_directories(args.out_dir);
  const auto path = [&](const std::string& name) { return (fs::path(args.out_dir) / name).string(); };

  {
    std::ofstream os(path("results.csv"));
    report.write_csv(os);
    if (!os) throw IoError("failed writing results.csv");
  }

  const auto write_long_curves = [&](const std::string& name, const RunRecord& record) {
    std::ofstream os(path(name));
    os << "round,epoch,mpjpe_mm\n";
    char buf[64];
    for (std::size_t r = 0; r < record.rounds.size(); ++r) {
      for (const auto& [epoch, err] : record.rounds[r].curve.points) {
        std::snprintf(buf, sizeof(buf), "%.6f", err);
        os << r << ',' << epoch << ',' << buf << "\n";
      }
    }
    if (!os) throw IoError("failed writing " + name);
  };
  write_long_curves("curves_pooled.csv", pooled.record);
  write_long_curves("curves_peraction.csv", ours.record);

  {
    std::ofstream os(path("curves_wide.csv"));
    os << "epoch,pooled";
    for (const RoundResult& r : ours.record.rounds) os << ',' << sanitize(r.label);
    os << "\n";
    char buf[64];
    for (std::size_t e = 0; e < static_cast<std::size_t>(args.unit_epochs); ++e) {
      os << pooled.record.rounds[0].curve.points[e].first;
      std::snprintf(buf, sizeof(buf), "%.6f", pooled.record.rounds[0].curve.points[e].second);
      os << ',' << buf;
      for (const RoundResult& r : ours.record.rounds) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.curve.points[e].second);
        os << ',' << buf;
      }
      os << "\n";
    }
    if (!os) throw IoError("failed writing curves_wide.csv");
  }

  save_checkpoint(path("pooled.plm"), pooled.record.rounds.front().params);
  for (const RoundResult& r : ours.record.rounds) {
    save_checkpoint(path("peraction_" + sanitize(r.label) + ".plm"), r.params);
  }

  {
    std::ofstream os(path("report.md"));
    os << "# pooled vs per-action training, mode=" << args.mode << ", F=" << args.field
       << ", UE=" << args.unit_epochs << "\n\n";
    os << "- budget N = " << args.budget << " frames, seed = " << args.seed << "\n";
    if (target) os << "- target action: " << action_name(*target, ds.n_actions) << "\n";
    os << "\n```\n" << pooled_plan.manifest() << "```\n\n```\n" << ours_plan.manifest() << "```\n\n";
    os << markdown_error_table("MPJPE (mm)", report.actions, "pooled", pooled.report.mpjpe_mm,
                               "per-action", ours.report.mpjpe_mm, 1);
    os << markdown_error_table("V-MPJPE (mm per frame)", report.actions, "pooled",
                               pooled.report.vmpjpe_mm, "per-action", ours.report.vmpjpe_mm, 2);
    os << tpr_block("MPJPE", "pooled", "per-action", pooled.report.eps_half_mpjpe,
                    ours.report.eps_half_mpjpe, pooled.report.eps_final_mpjpe,
                    ours.report.eps_final_mpjpe, pooled.report.train_seconds,
                    ours.report.train_seconds, args.k);
    os << tpr_block("V-MPJPE", "pooled", "per-action", pooled.report.eps_half_vmpjpe,
                    ours.report.eps_half_vmpjpe, pooled.report.eps_final_vmpjpe,
                    ours.report.eps_final_vmpjpe, pooled.report.train_seconds,
                    ours.report.train_seconds, args.k);
    if (!os) throw IoError("failed writing report.md");
  }

  {
    json manifest;
    manifest["command"] = "compare";
    manifest["mode"] = args.mode;
    manifest["receptive_field"] = args.field;
    manifest["blocks"] = blocks;
    manifest["unit_epochs"] = args.unit_epochs;
    manifest["budget_frames"] = args.budget;
    manifest["target"] = target ? json(action_name(*target, ds.n_actions)) : json(nullptr);
    manifest["seed"] = args.seed;
    manifest["test_fraction"] = args.test_fraction;
    manifest["k"] = args.k;
    manifest["channels"] = args.channels;
    manifest["batch_size"] = args.batch;
    manifest["lr"] = args.lr;
    manifest["lr_decay"] = args.decay;
    manifest["parallel_rounds"] = args.parallel;
    manifest["dataset"] = data_desc;
    json actions = json::array();
    for (const std::string& a : report.actions) actions.push_back(a);
    manifest["actions"] = actions;
    manifest["plan_pooled"] = pooled_plan.manifest();
    manifest["plan_per_action"] = ours_plan.manifest();
    manifest["train_seconds"] = {{"pooled", pooled.report.train_seconds},
                                 {"per_action", ours.report.train_seconds}};
    std::ofstream os(path("manifest.json"));
    os << manifest.dump(2) << "\n";
    if (!os) throw IoError("failed writing manifest.json");
  }

  std::cout << "pooled:     avg MPJPE " << detail::fixed(pooled.report.avg_mpjpe(), 2)
            << " mm, avg V-MPJPE " << detail::fixed(pooled.report.avg_vmpjpe(), 2) << " mm, "
            << detail::fixed(pooled.report.train_seconds, 1) << " s\n";
  std::cout << "per-action: avg MPJPE " << detail::fixed(ours.report.avg_mpjpe(), 2)
            << " mm, avg V-MPJPE " << detail::fixed(ours.report.avg_vmpjpe(), 2) << " mm, "
            << detail::fixed(ours.report.train_seconds, 1) << " s\n";
  std::cout << "wrote " << args.out_dir << "/{report.md, results.csv, curves_*.csv, manifest.json, *.plm}\n";
  return 0;
}

// ---------------------------------------------------------------------------
// tpr-report
// ---------------------------------------------------------------------------

// long-format curves file (round,epoch,mpjpe_mm) -> per-epoch mean curve
ErrorCurve read_mean_curve(const std::string& path) {
  auto is = io::open_in(path, false);
  std::string line;
  std::size_t line_no = 0;
  std::map<long, std::pair<double, long>> acc;  // epoch -> (sum, count)
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() < 3 || fields[1] != "epoch") {
        throw CsvError(path + ": expected header round,epoch,mpjpe_mm", line_no);
      }
      continue;
    }
    if (fields.size() != 3) throw CsvError(path + ": expected 3 fields", line_no);
    try {
      const long epoch = std::stol(fields[1]);
      const double err = std::stod(fields[2]);
      acc[epoch].first += err;
      acc[epoch].second += 1;
    } catch (const std::exception&) {
      throw CsvError(path + ": unparseable number", line_no);
    }
  }
  ErrorCurve curve;
  for (const auto& [epoch, sum_count] : acc) {
    curve.points.emplace_back(epoch, sum_count.first / static_cast<double>(sum_count.second));
  }
  if (curve.points.empty()) throw CsvError(path + ": no data rows", line_no);
  return curve;
}

int cmd_tpr_report(const std::string& curves_a, const std::string& curves_b, double time_a,
                   double time_b, double k, std::vector<double> values, const std::string& out_path) {
  double eps_half_a, eps_half_b, eps_final_a, eps_final_b;
  if (!values.empty()) {
    // direct values mode: eps-half-a, eps-half-b, eps-final-a, eps-final-b
    eps_half_a = values[0];
    eps_half_b = values[1];
    eps_final_a = values[2];
    eps_final_b = values[3];
  } else {
    if (curves_a.empty() || curves_b.empty()) {
      throw Error("tpr-report needs either --values or both --curves-a and --curves-b");
    }
    const ErrorCurve a = read_mean_curve(curves_a);
    const ErrorCurve b = read_mean_curve(curves_b);
    if (a.points.size() != b.points.size()) {
      throw Error("curve epoch grids differ: " + std::to_string(a.points.size()) + " vs " +
                  std::to_string(b.points.size()) + " epochs");
    }
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      if (a.points[i].first != b.points[i].first) {
        throw Error("curve epoch grids differ at position " + std::to_string(i));
      }
    }
    const double half = static_cast<double>(a.points.back().first) / 2.0;
    eps_half_a = a.value_nearest(half);
    eps_half_b = b.value_nearest(half);
    eps_final_a = a.final_error();
    eps_final_b = b.final_error();
  }

  const std::string block = tpr_block("error", "run A", "run B", eps_half_a, eps_half_b,
                                      eps_final_a, eps_final_b, time_a, time_b, k);
  std::cout << block;
  const double eps0_v = epsilon0(eps_half_a, eps_half_b, k);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", eps0_v);
  std::cout << "eps0 = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6e", tpr(eps0_v, eps_final_a, time_a));
  std::cout << "tpr A = " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6e", tpr(eps0_v, eps_final_b, time_b));
  std::cout << "tpr B = " << buf << "\n";
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    os << block;
    if (!os) throw IoError("failed writing " + out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

int cmd_converge(const std::string& curves_path, double delta) {
  auto is = io::open_in(curves_path, false);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  std::vector<ErrorCurve> curves;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() < 2 || fields[0] != "epoch") {
        throw CsvError(curves_path + ": expected header epoch,<name>,...", line_no);
      }
      names.assign(fields.begin() + 1, fields.end());
      curves.resize(names.size());
      continue;
    }
    if (fields.size() != names.size() + 1) {
      throw CsvError(curves_path + ": expected " + std::to_string(names.size() + 1) + " fields",
                     line_no);
    }
    try {
      const long epoch = std::stol(fields[0]);
      for (std::size_t i = 0; i < names.size(); ++i) {
        curves[i].points.emplace_back(epoch, std::stod(fields[i + 1]));
      }
    } catch (const std::exception&) {
      throw CsvError(curves_path + ": unparseable number", line_no);
    }
  }
  if (names.empty()) throw CsvError(curves_path + ": no header", 1);

  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto epoch = convergence_epoch(curves[i], delta);
    if (epoch) {
      std::cout << names[i] << ": epoch " << *epoch << "\n";
    } else {
      std::cout << names[i] << ": no convergence\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poselift: per-action training benchmark for 2D->3D pose lifting"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic labeled motion dataset");
  GenFlags gen_flags;
  gen_flags.add_to(*gen);
  gen->add_option("--seed", gen_flags.seed, "Generator seed");
  std::string gen_out = "dataset.plb";
  std::string gen_csv;
  gen->add_option("-o,--out", gen_out, "Output dataset path (.plb)");
  gen->add_option("--csv", gen_csv, "Also export a per-frame CSV");

  // compare
  auto* cmp = app.add_subcommand("compare", "Train pooled and per-action schedules and report");
  CompareArgs cmp_args;
  cmp->add_option("--mode", cmp_args.mode, "common | action-oriented");
  cmp->add_option("-F,--frames", cmp_args.field, "Receptive field (power of 3)");
  cmp->add_option("--ue", cmp_args.unit_epochs, "Unit epochs per round");
  cmp->add_option("-N,--budget", cmp_args.budget, "Total training frame budget");
  cmp->add_option("--target", cmp_args.target, "Target action (action-oriented mode)");
  cmp->add_option("--seed", cmp_args.seed, "Experiment seed");
  cmp->add_option("--test-fraction", cmp_args.test_fraction, "Held-out clip fraction");
  cmp->add_option("--k", cmp_args.k, "Regulated-error constant");
  cmp->add_option("--channels", cmp_args.channels, "Hidden width C");
  cmp->add_option("--batch", cmp_args.batch, "Batch size, windows");
  cmp->add_option("--lr", cmp_args.lr, "Adam learning rate");
  cmp->add_option("--decay", cmp_args.decay, "LR decay per unit epoch");
  cmp->add_flag("--parallel", cmp_args.parallel, "Run per-action rounds concurrently");
  cmp->add_option("--dataset", cmp_args.dataset_path, "Existing .plb dataset (skips generation)");
  cmp->add_option("-o,--out", cmp_args.out_dir, "Output directory");
  cmp_args.gen.add_to(*cmp);

  // tpr-report
  auto* tprc = app.add_subcommand("tpr-report", "Regulated-error and time-precision-rate summary");
  std::string tpr_curves_a, tpr_curves_b, tpr_out;
  double tpr_time_a = 0.0, tpr_time_b = 0.0, tpr_k = 1.2;
  std::vector<double> tpr_values;
  tprc->add_option("--curves-a", tpr_curves_a, "curves CSV for run A (round,epoch,mpjpe_mm)");
  tprc->add_option("--curves-b", tpr_curves_b, "curves CSV for run B");
  tprc->add_option("--time-a", tpr_time_a, "training seconds of run A")->required();
  tprc->add_option("--time-b", tpr_time_b, "training seconds of run B")->required();
  tprc->add_option("--k", tpr_k, "Regulated-error constant");
  tprc->add_option("--values", tpr_values,
                   "eps-half-A eps-half-B eps-final-A eps-final-B (skips curve files)")
      ->expected(4);
  tprc->add_option("-o,--out", tpr_out, "Also write the block to a file");

  // converge
  auto* conv = app.add_subcommand("converge", "Convergence epoch per column of a wide curves CSV");
  std::string conv_curves;
  double conv_delta = 0.5;
  conv->add_option("--curves", conv_curves, "Wide CSV: epoch,<run>,...")->required();
  conv->add_option("--delta", conv_delta, "Convergence window, mm");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(gen_flags, gen_out, gen_csv);
    if (cmp->parsed()) return cmd_compare(cmp_args);
    if (tprc->parsed())
      return cmd_tpr_report(tpr_curves_a, tpr_curves_b, tpr_time_a, tpr_time_b, tpr_k, tpr_values,
                            tpr_out);
    if (conv->parsed()) return cmd_converge(conv_curves, conv_delta);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
