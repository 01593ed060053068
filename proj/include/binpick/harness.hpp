#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "binpick/binsim.hpp"
#include "binpick/codebook.hpp"

namespace binpick {

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int pick_trials = 25;   // per pose class
  int place_trials = 30;  // per pose class
  int objects_per_scene = 3;
  ViewSampling sampling;
  double view_distance = 0.5;  // meters, codebook render distance
  AugmentationConfig augment;
  SuctionModel suction;
  SceneConfig scene;
  CameraIntrinsics intrinsics;
  double placement_tolerance = 0.3490658503988659;  // 20 deg, radians
  bool idealized = false;  // flatness pi, no protrusions, rigid, singulated
  enum class Estimator { Codebook, Oracle };
  Estimator estimator = Estimator::Codebook;
  std::string out_dir = "out";
  std::string codebook_path;  // when set, loaded instead of built
  int report_queries = 500;
  int coverage_samples = 10000;
  int threads = 0;

  void validate() const;  // ConfigError
  // Copy with the idealized overrides applied.
  ExperimentConfig effective() const;
};

struct ClassStats {
  int attempted = 0;
  int succeeded = 0;
  double rate() const { return attempted ? double(succeeded) / attempted : 0.0; }
};

struct TrialRow {
  int trial = 0;
  PoseClass cls = PoseClass::BreastUp;
  std::string phase;  // "pick" or "place": where the trial ended
  bool success = false;
  PickFailure cause = PickFailure::None;
  double error_deg = 0.0;  // final placement error vs canonical
  bool has_error = false;
  double estimation_error_deg = 0.0;  // pose-estimation error, place bench
  bool has_estimation_error = false;
};

struct ExperimentReport {
  std::string bench;
  std::uint64_t seed = 0;
  std::array<ClassStats, 3> per_class;  // BreastUp, BreastDown, BreastSide
  std::vector<TrialRow> trials;
  double runtime_seconds = 0.0;  // stderr diagnostics only, never serialized

  ClassStats total() const;
};

// Bin-pick benchmark: per pose class, `pick_trials` fresh scenes, keypoint
// detection and one pick attempt each.
ExperimentReport run_pick_bench(const ExperimentConfig& cfg);

// Canonical-placement benchmark: per pose class, `place_trials` singulated
// scenes through pick, pose estimation, goal computation and placement
// scoring. estimator = Oracle injects the true pose and a synthetic grasp to
// isolate the placement chain.
ExperimentReport run_place_bench(const ExperimentConfig& cfg);

struct CodebookReport {
  std::uint64_t seed = 0;
  int entries = 0;
  int dim = 0;
  double coverage_bound_rad = 0.0;
  int n_queries = 0;
  double clean_mean_deg = 0.0, clean_median_deg = 0.0, clean_max_deg = 0.0;
  int clean_within_bound = 0;
  double aug_mean_deg = 0.0, aug_median_deg = 0.0, aug_max_deg = 0.0;
  int aug_within_2x_bound = 0;
  std::string codebook_header;  // provenance echo of the file header
  double runtime_seconds = 0.0;
};

// Retrieval-accuracy report for the codebook estimator: coverage bound of
// the sampled rotations plus clean and augmented query error statistics.
CodebookReport run_codebook_report(const ExperimentConfig& cfg);

// Shared fixtures so CLI runs, tests and the acceptance suite agree.
RigidTransform bench_camera_extrinsic();  // base->camera via the tag chain
RigidTransform bench_canonical_pose();    // target pose in the base frame
// Fresh tree with base->camera, base->wrist and wrist->cup edges.
TransformTree bench_transform_tree();

// Rendering of reports; all output is byte-stable for a fixed seed.
std::string report_table(const ExperimentReport& r);
std::string report_csv(const ExperimentReport& r);
std::string report_json(const ExperimentReport& r, const ExperimentConfig& cfg);
std::string codebook_report_text(const CodebookReport& r);
std::string codebook_report_json(const CodebookReport& r,
                                 const ExperimentConfig& cfg);

// Subcommands: build-codebook, estimate <scene-file>, pick-bench,
// place-bench, codebook-report, calib-demo. Exit 0 on success, 1 on
// usage/validation errors, 2 on runtime failures.
int cli_main(int argc, const char* const* argv);

}  // namespace binpick
