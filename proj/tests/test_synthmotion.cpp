#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "poselift/synthmotion.hpp"

using namespace poselift;

namespace {

GenConfig small_config(std::uint64_t seed = 1) {
  GenConfig cfg;
  cfg.n_actions = 3;
  cfg.subjects = 1;
  cfg.clips_per_action = 4;
  cfg.frames_per_clip = 60;
  cfg.noise_px = 0.0;
  cfg.seed = seed;
  return cfg;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.n_actions != b.n_actions || a.joints != b.joints || a.clips.size() != b.clips.size())
    return false;
  for (std::size_t i = 0; i < a.clips.size(); ++i) {
    const PoseClip& x = a.clips[i];
    const PoseClip& y = b.clips[i];
    if (x.action != y.action || x.subject != y.subject || x.frames != y.frames) return false;
    if (!tensors_equal(x.joints3d, y.joints3d) || !tensors_equal(x.joints2d, y.joints2d)) return false;
  }
  return true;
}

// Mean zero-crossing rate of the mean-centred root-relative coordinate
// signals; proportional to the dominant joint-angle frequency of the clip.
double clip_frequency_feature(const PoseClip& clip) {
  const std::size_t joints = clip.joints3d.dim(1);
  const std::size_t frames = clip.frames;
  double rate_sum = 0.0;
  std::size_t signals = 0;
  for (std::size_t j = 1; j < joints; ++j) {
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (std::size_t t = 0; t < frames; ++t)
        mean += clip.joints3d.at(t, j, c) - clip.joints3d.at(t, 0, c);
      mean /= static_cast<double>(frames);
      std::size_t crossings = 0;
      double prev = clip.joints3d.at(0, j, c) - clip.joints3d.at(0, 0, c) - mean;
      for (std::size_t t = 1; t < frames; ++t) {
        const double cur = clip.joints3d.at(t, j, c) - clip.joints3d.at(t, 0, c) - mean;
        if ((prev < 0.0 && cur >= 0.0) || (prev >= 0.0 && cur < 0.0)) ++crossings;
        prev = cur;
      }
      rate_sum += static_cast<double>(crossings) / static_cast<double>(frames - 1);
      ++signals;
    }
  }
  return rate_sum / static_cast<double>(signals);
}

}  // namespace

TEST_CASE("gen_dataset is a pure function of its config") {
  const Dataset a = gen_dataset(small_config(42));
  const Dataset b = gen_dataset(small_config(42));
  REQUIRE(datasets_equal(a, b));
  const Dataset c = gen_dataset(small_config(43));
  REQUIRE_FALSE(datasets_equal(a, c));
}

TEST_CASE("noiseless 2-D tracks equal the exact projection") {
  const GenConfig cfg = small_config(7);
  const Dataset ds = gen_dataset(cfg);
  for (const PoseClip& clip : ds.clips) {
    for (std::size_t t = 0; t < clip.frames; ++t) {
      Tensor pose({ds.joints, 3});
      for (std::size_t j = 0; j < ds.joints; ++j)
        for (std::size_t c = 0; c < 3; ++c) pose.at(j, c) = clip.joints3d.at(t, j, c);
      const Tensor proj = project_weak_perspective(pose, cfg.camera);
      for (std::size_t j = 0; j < ds.joints; ++j) {
        REQUIRE(clip.joints2d.at(t, j, 0) == proj.at(j, 0));
        REQUIRE(clip.joints2d.at(t, j, 1) == proj.at(j, 1));
      }
    }
  }
}

TEST_CASE("default config yields 2000 frames per action") {
  GenConfig cfg;  // defaults: 15 actions x 4 clips x 500 frames
  cfg.seed = 5;
  const Dataset ds = gen_dataset(cfg);
  const std::vector<long> f = ds.frames_per_action();
  REQUIRE(f.size() == 15);
  for (long total : f) REQUIRE(total == 2000);
}

TEST_CASE("weak perspective projection") {
  const Tensor pose = Tensor::from({2, 3}, {10, -4, 99, 1, 2, -50});
  SECTION("identity camera") {
    CameraModel cam{1.0, 0.0, 0.0};
    const Tensor p = project_weak_perspective(pose, cam);
    REQUIRE(p.at(0, 0) == 10.0);
    REQUIRE(p.at(0, 1) == -4.0);
    REQUIRE(p.at(1, 0) == 1.0);
    REQUIRE(p.at(1, 1) == 2.0);
  }
  SECTION("scale 2 with principal point") {
    CameraModel cam{2.0, 100.0, 200.0};
    const Tensor p = project_weak_perspective(pose, cam);
    REQUIRE(p.at(0, 0) == 120.0);
    REQUIRE(p.at(0, 1) == 192.0);
  }
  SECTION("depth translation does not move the projection") {
    CameraModel cam{0.5, 500.0, 500.0};
    Tensor shifted = pose;
    shifted.at(0, 2) += 1234.0;
    shifted.at(1, 2) += 1234.0;
    REQUIRE(tensors_equal(project_weak_perspective(pose, cam), project_weak_perspective(shifted, cam)));
  }
  SECTION("non-positive scale is rejected") {
    REQUIRE_THROWS_AS(project_weak_perspective(pose, CameraModel{0.0, 0, 0}), Error);
  }
}

TEST_CASE("bone length audit") {
  const GenConfig cfg = small_config(11);
  const Dataset ds = gen_dataset(cfg);

  SECTION("forward kinematics keeps bones exact") {
    for (const PoseClip& clip : ds.clips) REQUIRE(bone_length_audit(clip, cfg.skeleton) < 1e-9);
  }

  SECTION("a leaf joint displaced 1 mm along its bone reads as 1 mm") {
    PoseClip clip = ds.clips[0];
    const std::size_t leaf = 3, parent = cfg.skeleton.parent[leaf];
    for (std::size_t t = 0; t < clip.frames; ++t) {
      double dir[3];
      double len = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        dir[c] = clip.joints3d.at(t, leaf, c) - clip.joints3d.at(t, parent, c);
        len += dir[c] * dir[c];
      }
      len = std::sqrt(len);
      for (std::size_t c = 0; c < 3; ++c) clip.joints3d.at(t, leaf, c) += dir[c] / len;
    }
    REQUIRE(bone_length_audit(clip, cfg.skeleton) == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("single-joint skeleton has no bones to audit") {
    SkeletonSpec lone;
    lone.joints = 1;
    lone.parent = {0};
    lone.bone_lengths_mm = {0.0};
    GenConfig cfg1 = small_config(13);
    cfg1.skeleton = lone;
    const Dataset one = gen_dataset(cfg1);
    REQUIRE(bone_length_audit(one.clips[0], lone) == 0.0);
  }
}

TEST_CASE("skeleton validation rejects malformed trees") {
  SkeletonSpec bad;
  bad.joints = 3;
  bad.parent = {0, 2, 1};  // 1 <-> 2 cycle, unreachable from the root
  bad.bone_lengths_mm = {0.0, 100.0, 100.0};
  REQUIRE_THROWS_AS(bad.validate(), Error);

  GenConfig cfg = small_config(1);
  cfg.skeleton = bad;
  REQUIRE_THROWS_AS(gen_dataset(cfg), Error);

  SkeletonSpec neg = SkeletonSpec::humanoid16();
  neg.bone_lengths_mm[4] = -1.0;
  REQUIRE_THROWS_AS(neg.validate(), Error);
}

TEST_CASE("stratified split") {
  const Dataset ds = gen_dataset(small_config(21));

  SECTION("fraction 0.25 of 4 clips gives 3 train / 1 test per action") {
    const auto [train, test] = split_dataset(ds, 0.25, 9);
    for (int a = 0; a < ds.n_actions; ++a) {
      REQUIRE(train.clips_of_action(a).size() == 3);
      REQUIRE(test.clips_of_action(a).size() == 1);
    }
  }

  SECTION("same seed gives the same split, different seed may not") {
    const auto [train1, test1] = split_dataset(ds, 0.25, 9);
    const auto [train2, test2] = split_dataset(ds, 0.25, 9);
    REQUIRE(datasets_equal(train1, train2));
    REQUIRE(datasets_equal(test1, test2));
  }

  SECTION("train and test partition the clips") {
    const auto [train, test] = split_dataset(ds, 0.5, 3);
    REQUIRE(train.clips.size() + test.clips.size() == ds.clips.size());
    // clips keep their dataset order within each side; match them back up
    std::size_t ti = 0, si = 0;
    for (const PoseClip& clip : ds.clips) {
      if (ti < train.clips.size() && tensors_equal(train.clips[ti].joints3d, clip.joints3d)) {
        ++ti;
      } else {
        REQUIRE(si < test.clips.size());
        REQUIRE(tensors_equal(test.clips[si].joints3d, clip.joints3d));
        ++si;
      }
    }
    REQUIRE(ti == train.clips.size());
    REQUIRE(si == test.clips.size());
  }

  SECTION("an action with fewer than two clips cannot be stratified") {
    GenConfig cfg = small_config(2);
    cfg.clips_per_action = 1;
    const Dataset tiny = gen_dataset(cfg);
    REQUIRE_THROWS_AS(split_dataset(tiny, 0.5, 1), Error);
  }

  SECTION("fraction bounds") {
    REQUIRE_THROWS_AS(split_dataset(ds, 0.0, 1), Error);
    REQUIRE_THROWS_AS(split_dataset(ds, 1.0, 1), Error);
  }
}

TEST_CASE("actions are separable by a nearest-centroid frequency classifier") {
  GenConfig cfg;  // full default size, noiseless
  cfg.noise_px = 0.0;
  cfg.seed = 100;
  const Dataset ds = gen_dataset(cfg);

  std::vector<double> features;
  std::vector<int> labels;
  for (const PoseClip& clip : ds.clips) {
    features.push_back(clip_frequency_feature(clip));
    labels.push_back(clip.action);
  }

  std::vector<double> centroid(static_cast<std::size_t>(ds.n_actions), 0.0);
  std::vector<int> count(static_cast<std::size_t>(ds.n_actions), 0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    centroid[static_cast<std::size_t>(labels[i])] += features[i];
    count[static_cast<std::size_t>(labels[i])] += 1;
  }
  for (int a = 0; a < ds.n_actions; ++a) centroid[static_cast<std::size_t>(a)] /= count[static_cast<std::size_t>(a)];

  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    int best = 0;
    double best_dist = std::fabs(features[i] - centroid[0]);
    for (int a = 1; a < ds.n_actions; ++a) {
      const double d = std::fabs(features[i] - centroid[static_cast<std::size_t>(a)]);
      if (d < best_dist) {
        best = a;
        best_dist = d;
      }
    }
    if (best == labels[i]) ++correct;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(features.size());
  INFO("nearest-centroid accuracy " << accuracy);
  REQUIRE(accuracy >= 0.9);
}

TEST_CASE("dataset file round trip") {
  const Dataset ds = gen_dataset(small_config(31));
  const std::string path = "synthmotion_roundtrip.plb";
  write_dataset(path, ds);
  const Dataset loaded = read_dataset(path);
  REQUIRE(datasets_equal(ds, loaded));
  std::remove(path.c_str());

  SECTION("bad magic is rejected") {
    const std::string bad = "synthmotion_badmagic.plb";
    auto os = io::open_out(bad, true);
    os << "WHAT";
    os.close();
    REQUIRE_THROWS_AS(read_dataset(bad), IoError);
    std::remove(bad.c_str());
  }
}

TEST_CASE("csv export writes one row per frame") {
  GenConfig cfg = small_config(3);
  cfg.n_actions = 2;
  cfg.clips_per_action = 2;
  cfg.frames_per_clip = 5;
  const Dataset ds = gen_dataset(cfg);
  const std::string path = "synthmotion_export.csv";
  write_dataset_csv(path, ds);
  std::ifstream is(path);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  std::remove(path.c_str());
  REQUIRE(rows == 1 + 2 * 2 * 5);  // header + every frame
}

TEST_CASE("action names and lookup") {
  REQUIRE(action_name(2, 15) == "Eat");
  REQUIRE(action_name(14, 15) == "WkT.");
  REQUIRE(action_name(16, 20) == "A16");
  REQUIRE(resolve_action("Eat", 15) == 2);
  REQUIRE(resolve_action("7", 15) == 7);
  REQUIRE_THROWS_AS(resolve_action("Jog", 15), Error);
  REQUIRE_THROWS_AS(resolve_action("99", 15), Error);
}
