#include "binpick/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "binpick/errors.hpp"
#include "binpick/parallel.hpp"

namespace binpick {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PoseClass class_at(int i) {
  static constexpr PoseClass kClasses[3] = {
      PoseClass::BreastUp, PoseClass::BreastDown, PoseClass::BreastSide};
  return kClasses[i];
}

const char* estimator_name(ExperimentConfig::Estimator e) {
  return e == ExperimentConfig::Estimator::Oracle ? "oracle" : "codebook";
}

// Error capture for parallel trial loops: the lowest failing index wins so
// reruns fail identically regardless of scheduling.
struct ErrorSlot {
  std::mutex m;
  int index = -1;
  std::string what;

  void capture(int i, const std::string& w) {
    std::lock_guard<std::mutex> lock(m);
    if (index < 0 || i < index) {
      index = i;
      what = w;
    }
  }
  void rethrow_if_set() const {
    if (index >= 0)
      throw Error("trial " + std::to_string(index) + ": " + what);
  }
};

}  // namespace

void ExperimentConfig::validate() const {
  if (pick_trials < 1 || place_trials < 1)
    throw ConfigError("trial counts must be >= 1");
  if (objects_per_scene < 1)
    throw ConfigError("objects_per_scene must be >= 1");
  sampling.validate();
  if (!(view_distance > 0)) throw ConfigError("view_distance must be > 0");
  augment.validate();
  suction.validate();
  intrinsics.validate();
  if (!(placement_tolerance > 0))
    throw ConfigError("placement tolerance must be > 0");
  if (report_queries < 1) throw ConfigError("report_queries must be >= 1");
  if (coverage_samples < 1) throw ConfigError("coverage_samples must be >= 1");
  if (!(scene.max_perturbation >= 0 &&
        scene.max_perturbation <= std::numbers::pi))
    throw ConfigError("max_perturbation must lie in [0, pi]");
}

ExperimentConfig ExperimentConfig::effective() const {
  ExperimentConfig cfg = *this;
  if (cfg.idealized) {
    cfg.suction.flatness_threshold = std::numbers::pi;
    cfg.scene.protrusions = false;
    cfg.scene.deform_amplitude = 0.0;
    cfg.objects_per_scene = 1;
  }
  return cfg;
}

ClassStats ExperimentReport::total() const {
  ClassStats t;
  for (const auto& c : per_class) {
    t.attempted += c.attempted;
    t.succeeded += c.succeeded;
  }
  return t;
}

RigidTransform bench_camera_extrinsic() {
  // Mounted camera looking straight down at the bin; recovered through the
  // tag chain exactly as a live system would.
  const RigidTransform t_base_cam_target{
      UnitQuaternion::from_axis_angle({1, 0, 0}, std::numbers::pi),
      {0.45, 0.0, 1.25}};
  const RigidTransform t_base_wrist{
      UnitQuaternion::from_euler({0.4, 0.3, -0.2}), {0.3, -0.1, 0.5}};
  const RigidTransform t_wrist_aruco{
      UnitQuaternion::from_axis_angle({0, 1, 0}, 0.15), {0.0, 0.0, 0.1}};
  const RigidTransform t_aruco_cam =
      compose(invert(compose(t_base_wrist, t_wrist_aruco)), t_base_cam_target);
  return calibrate_camera(t_base_wrist, t_wrist_aruco, t_aruco_cam);
}

RigidTransform bench_canonical_pose() {
  // Breast toward -y (the handling area), neck up along +z.
  RotationMatrix m;
  m.m = {0, -1, 0, 0, 0, -1, 1, 0, 0};
  return {UnitQuaternion::from_matrix(m), {0.5, -0.3, 0.4}};
}

TransformTree bench_transform_tree() {
  TransformTree tree;
  tree.add_edge("base", "camera", bench_camera_extrinsic());
  tree.add_edge("base", "wrist",
                {UnitQuaternion::identity(), {0.1, 0.4, 0.8}});
  tree.add_edge("wrist", "cup", {UnitQuaternion::identity(), {0, 0, -0.15}});
  return tree;
}

ExperimentReport run_pick_bench(const ExperimentConfig& raw) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = raw.effective();
  cfg.validate();

  ExperimentReport rep;
  rep.bench = "pick-bench";
  rep.seed = cfg.seed;
  const int per = cfg.pick_trials;
  rep.trials.resize(size_t(per) * 3);

  const Rng base(cfg.seed);
  ErrorSlot errors;
  parallel_for(0, per * 3, cfg.threads, [&](int idx) {
    try {
      const int ci = idx / per;
      Rng rng = base.fork(0x100000ull + static_cast<std::uint64_t>(idx));
      std::array<double, 3> mix{0, 0, 0};
      mix[size_t(ci)] = 1.0;
      BinScene scene =
          generate_scene(cfg.objects_per_scene, mix, cfg.scene, rng);
      const SceneRender render = render_scene(scene, cfg.intrinsics);
      const auto keypoints =
          detect_keypoints(render.depth, cfg.intrinsics, cfg.suction);
      TransformTree tree = bench_transform_tree();
      const PickAttempt attempt =
          execute_pick(scene, tree, keypoints, cfg.suction);

      TrialRow row;
      row.trial = idx % per;
      row.cls = class_at(ci);
      row.phase = "pick";
      row.success = attempt.success;
      row.cause = attempt.cause;
      rep.trials[size_t(idx)] = row;
    } catch (const std::exception& e) {
      errors.capture(idx, e.what());
    }
  });
  errors.rethrow_if_set();

  for (int idx = 0; idx < per * 3; ++idx) {
    auto& stats = rep.per_class[size_t(idx / per)];
    stats.attempted += 1;
    stats.succeeded += rep.trials[size_t(idx)].success ? 1 : 0;
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport run_place_bench(const ExperimentConfig& raw) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = raw.effective();
  cfg.validate();

  PoseCodebook cb;
  const bool use_codebook =
      cfg.estimator == ExperimentConfig::Estimator::Codebook;
  if (use_codebook) {
    if (cfg.codebook_path.empty()) {
      cb = build_codebook(DeformableObject(cfg.scene.base_shape),
                          cfg.intrinsics, cfg.sampling, cfg.view_distance,
                          cfg.threads);
    } else {
      cb = load_codebook(cfg.codebook_path);
      if (!(cb.intrinsics == cfg.intrinsics))
        throw ConfigError(
            "codebook was built with different intrinsics than configured");
    }
  }
  const RigidTransform t_base_cam = bench_camera_extrinsic();
  const RigidTransform canonical = bench_canonical_pose();

  ExperimentReport rep;
  rep.bench = "place-bench";
  rep.seed = cfg.seed;
  const int per = cfg.place_trials;
  rep.trials.resize(size_t(per) * 3);

  const Rng base(cfg.seed);
  ErrorSlot errors;
  parallel_for(0, per * 3, cfg.threads, [&](int idx) {
    try {
      const int ci = idx / per;
      Rng rng = base.fork(0x200000ull + static_cast<std::uint64_t>(idx));
      std::array<double, 3> mix{0, 0, 0};
      mix[size_t(ci)] = 1.0;
      BinScene scene = generate_scene(1, mix, cfg.scene, rng);
      const RigidTransform true_cam_pose = scene.objects.front().pose;

      TrialRow row;
      row.trial = idx % per;
      row.cls = class_at(ci);

      RigidTransform est_cam;
      RigidTransform t_wrist_object_true;
      const RigidTransform t_base_object_true =
          compose(t_base_cam, true_cam_pose);
      if (use_codebook) {
        const SceneRender render = render_scene(scene, cfg.intrinsics);
        const Silhouette sil = find_silhouette(render.depth);
        const auto keypoints =
            detect_keypoints(render.depth, cfg.intrinsics, cfg.suction);
        TransformTree tree = bench_transform_tree();
        const PickAttempt attempt =
            execute_pick(scene, tree, keypoints, cfg.suction);
        if (!attempt.success) {
          row.phase = "pick";
          row.success = false;
          row.cause = attempt.cause;
          rep.trials[size_t(idx)] = row;
          return;
        }
        est_cam = estimate_pose(render.depth, sil.centroid_u, sil.centroid_v,
                                sil.depth_at_centroid, cb, cfg.intrinsics);
        t_wrist_object_true = tree.lookup("wrist", "object");
      } else {
        // Oracle mode: perfect perception and a synthetic grasp isolate the
        // placement chain itself.
        est_cam = true_cam_pose;
        const RigidTransform t_base_wrist{
            UnitQuaternion::identity(),
            t_base_object_true.translation + Vec3{0, 0, 0.2}};
        t_wrist_object_true =
            compose(invert(t_base_wrist), t_base_object_true);
      }

      const RigidTransform t_base_object_est = compose(t_base_cam, est_cam);
      const PlacementResult pr = evaluate_placement(
          t_base_object_est, t_base_object_true, t_wrist_object_true,
          canonical, cfg.placement_tolerance);

      row.phase = "place";
      row.success = pr.success;
      row.cause = PickFailure::None;
      row.error_deg = pr.geodesic_error * kRadToDeg;
      row.has_error = true;
      row.estimation_error_deg =
          geodesic_distance(t_base_object_est.rotation,
                            t_base_object_true.rotation) *
          kRadToDeg;
      row.has_estimation_error = true;
      rep.trials[size_t(idx)] = row;
    } catch (const std::exception& e) {
      errors.capture(idx, e.what());
    }
  });
  errors.rethrow_if_set();

  for (int idx = 0; idx < per * 3; ++idx) {
    auto& stats = rep.per_class[size_t(idx / per)];
    stats.attempted += 1;
    stats.succeeded += rep.trials[size_t(idx)].success ? 1 : 0;
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

CodebookReport run_codebook_report(const ExperimentConfig& raw) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = raw.effective();
  cfg.validate();

  PoseCodebook cb;
  if (cfg.codebook_path.empty()) {
    cb = build_codebook(DeformableObject(cfg.scene.base_shape),
                        cfg.intrinsics, cfg.sampling, cfg.view_distance,
                        cfg.threads);
  } else {
    cb = load_codebook(cfg.codebook_path);
  }

  CodebookReport rep;
  rep.seed = cfg.seed;
  rep.entries = static_cast<int>(cb.entries.size());
  rep.dim = cb.entries.empty() ? 0 : cb.entries.front().embedding.dim();
  {
    std::string header;
    for (const auto& line : codebook_header_lines(cb)) {
      if (!header.empty()) header += "; ";
      header += line;
    }
    rep.codebook_header = header;
  }

  std::vector<UnitQuaternion> rotations;
  rotations.reserve(cb.entries.size());
  for (const auto& e : cb.entries) rotations.push_back(e.rotation);

  const Rng base(cfg.seed);
  Rng cov_rng = base.fork(0x300000ull);
  rep.coverage_bound_rad =
      coverage_bound(rotations, cfg.coverage_samples, cov_rng);

  const DeformableObject object(cfg.scene.base_shape);
  const int n = cfg.report_queries;
  rep.n_queries = n;
  std::vector<double> clean_err(static_cast<size_t>(n), 0.0);
  std::vector<double> aug_err(static_cast<size_t>(n), 0.0);
  ErrorSlot errors;
  parallel_for(0, n, cfg.threads, [&](int i) {
    try {
      Rng rng = base.fork(0x310000ull + static_cast<std::uint64_t>(i));
      const UnitQuaternion truth = UnitQuaternion::sample_uniform(rng);
      const DepthImage img = render_depth(
          object, {truth, {0, 0, cfg.view_distance}}, cb.intrinsics);
      const Silhouette sil = find_silhouette(img);
      const DepthImage crop = crop_silhouette(img, sil, cb.crop);
      const LookupResult clean = lookup(embed(crop), cb);
      clean_err[size_t(i)] = geodesic_distance(clean.rotation, truth);
      const DepthImage noisy = augment(crop, cfg.augment, rng);
      const LookupResult aug = lookup(embed(noisy), cb);
      aug_err[size_t(i)] = geodesic_distance(aug.rotation, truth);
    } catch (const std::exception& e) {
      errors.capture(i, e.what());
    }
  });
  errors.rethrow_if_set();

  auto stats = [](std::vector<double> v, double& mean, double& median,
                  double& maxv) {
    double sum = 0;
    maxv = 0;
    for (double x : v) {
      sum += x;
      maxv = std::max(maxv, x);
    }
    mean = sum / v.size();
    std::sort(v.begin(), v.end());
    median = v[v.size() / 2];
  };
  double m, md, mx;
  stats(clean_err, m, md, mx);
  rep.clean_mean_deg = m * kRadToDeg;
  rep.clean_median_deg = md * kRadToDeg;
  rep.clean_max_deg = mx * kRadToDeg;
  stats(aug_err, m, md, mx);
  rep.aug_mean_deg = m * kRadToDeg;
  rep.aug_median_deg = md * kRadToDeg;
  rep.aug_max_deg = mx * kRadToDeg;
  for (double e : clean_err)
    if (e <= rep.coverage_bound_rad) ++rep.clean_within_bound;
  for (double e : aug_err)
    if (e <= 2 * rep.coverage_bound_rad) ++rep.aug_within_2x_bound;
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

namespace {

std::string percent(int succeeded, int attempted) {
  if (attempted == 0) return "0%";
  return std::to_string(succeeded * 100 / attempted) + "%";
}

void table_row(std::ostringstream& out, const std::string& label,
               const std::array<std::string, 4>& cells) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-14s%-13s%-13s%-13s%s\n", label.c_str(),
                cells[0].c_str(), cells[1].c_str(), cells[2].c_str(),
                cells[3].c_str());
  out << buf;
}

}  // namespace

std::string report_table(const ExperimentReport& r) {
  std::ostringstream out;
  const ClassStats total = r.total();
  out << (r.bench == "pick-bench" ? "Bin picking success rate"
                                  : "Canonical placement success rate")
      << " (seed " << r.seed << ")\n";
  table_row(out, "Pose", {"Breast Up", "Breast Down", "Breast Side", "Total"});
  table_row(out, "Attempted",
            {std::to_string(r.per_class[0].attempted),
             std::to_string(r.per_class[1].attempted),
             std::to_string(r.per_class[2].attempted),
             std::to_string(total.attempted)});
  table_row(out, "Succeeded",
            {std::to_string(r.per_class[0].succeeded),
             std::to_string(r.per_class[1].succeeded),
             std::to_string(r.per_class[2].succeeded),
             std::to_string(total.succeeded)});
  table_row(out, "Success Rate",
            {percent(r.per_class[0].succeeded, r.per_class[0].attempted),
             percent(r.per_class[1].succeeded, r.per_class[1].attempted),
             percent(r.per_class[2].succeeded, r.per_class[2].attempted),
             percent(total.succeeded, total.attempted)});
  if (r.bench == "pick-bench")
    out << "reference physical-system rates: 92% / 88% / 76% / 85%\n";
  else
    out << "reference physical-system rates: 83% / 93% / 66% / 81%\n";
  return out.str();
}

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "trial,class,phase,success,cause,geodesic_error_deg\n";
  char buf[32];
  for (const auto& t : r.trials) {
    out << t.trial << "," << to_string(t.cls) << "," << t.phase << ","
        << (t.success ? 1 : 0) << "," << to_string(t.cause) << ",";
    if (t.has_error) {
      std::snprintf(buf, sizeof(buf), "%.6f", t.error_deg);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["pick_trials"] = cfg.pick_trials;
  j["place_trials"] = cfg.place_trials;
  j["objects_per_scene"] = cfg.objects_per_scene;
  j["sampling"] = {{"views", cfg.sampling.n_views},
                   {"inplane", cfg.sampling.n_inplane},
                   {"view_distance", cfg.view_distance}};
  j["augment"] = {{"jitter", cfg.augment.translation_jitter},
                  {"scale_min", cfg.augment.scale_min},
                  {"scale_max", cfg.augment.scale_max},
                  {"patches", cfg.augment.occlusion_patches},
                  {"patch_max", cfg.augment.occlusion_max_side},
                  {"noise_sigma", cfg.augment.depth_noise_sigma},
                  {"background", to_string(cfg.augment.background)}};
  j["suction"] = {{"cup_radius", cfg.suction.cup_radius},
                  {"flatness", cfg.suction.flatness_threshold},
                  {"v0", cfg.suction.v0},
                  {"k", cfg.suction.k},
                  {"v_threshold", cfg.suction.v_threshold},
                  {"slip_margin", cfg.suction.slip_margin},
                  {"clearance", cfg.suction.clearance}};
  j["intrinsics"] = {{"fx", cfg.intrinsics.fx}, {"fy", cfg.intrinsics.fy},
                     {"cx", cfg.intrinsics.cx}, {"cy", cfg.intrinsics.cy},
                     {"width", cfg.intrinsics.width},
                     {"height", cfg.intrinsics.height}};
  j["placement_tolerance_deg"] = cfg.placement_tolerance * kRadToDeg;
  j["idealized"] = cfg.idealized;
  j["estimator"] = estimator_name(cfg.estimator);
  return j;
}

nlohmann::ordered_json class_json(const char* name, const ClassStats& s) {
  return {{"class", name},
          {"attempted", s.attempted},
          {"succeeded", s.succeeded},
          {"rate", s.rate()}};
}

}  // namespace

std::string report_json(const ExperimentReport& r,
                        const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["bench"] = r.bench;
  j["seed"] = r.seed;
  j["config"] = config_json(cfg);
  j["classes"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i)
    j["classes"].push_back(
        class_json(to_string(class_at(i)), r.per_class[size_t(i)]));
  j["total"] = class_json("Total", r.total());
  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : r.trials) {
    nlohmann::ordered_json row;
    row["trial"] = t.trial;
    row["class"] = to_string(t.cls);
    row["phase"] = t.phase;
    row["success"] = t.success;
    row["cause"] = to_string(t.cause);
    if (t.has_error)
      row["geodesic_error_deg"] = t.error_deg;
    else
      row["geodesic_error_deg"] = nullptr;
    if (t.has_estimation_error)
      row["estimation_error_deg"] = t.estimation_error_deg;
    else
      row["estimation_error_deg"] = nullptr;
    j["trials"].push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string codebook_report_text(const CodebookReport& r) {
  std::ostringstream out;
  char buf[256];
  out << "Codebook retrieval report (seed " << r.seed << ")\n";
  out << r.codebook_header << "\n";
  std::snprintf(buf, sizeof(buf), "coverage bound: %.4f deg\n",
                r.coverage_bound_rad * kRadToDeg);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "clean     mean %.4f  median %.4f  max %.4f deg  within-bound "
                "%d/%d\n",
                r.clean_mean_deg, r.clean_median_deg, r.clean_max_deg,
                r.clean_within_bound, r.n_queries);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "augmented mean %.4f  median %.4f  max %.4f deg  within-2x    "
                "%d/%d\n",
                r.aug_mean_deg, r.aug_median_deg, r.aug_max_deg,
                r.aug_within_2x_bound, r.n_queries);
  out << buf;
  return out.str();
}

std::string codebook_report_json(const CodebookReport& r,
                                 const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["bench"] = "codebook-report";
  j["seed"] = r.seed;
  j["config"] = config_json(cfg);
  j["codebook_header"] = r.codebook_header;
  j["entries"] = r.entries;
  j["dim"] = r.dim;
  j["coverage_bound_deg"] = r.coverage_bound_rad * kRadToDeg;
  j["n_queries"] = r.n_queries;
  j["clean"] = {{"mean_deg", r.clean_mean_deg},
                {"median_deg", r.clean_median_deg},
                {"max_deg", r.clean_max_deg},
                {"within_bound", r.clean_within_bound}};
  j["augmented"] = {{"mean_deg", r.aug_mean_deg},
                    {"median_deg", r.aug_median_deg},
                    {"max_deg", r.aug_max_deg},
                    {"within_2x_bound", r.aug_within_2x_bound}};
  return j.dump(2) + "\n";
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"binpick: suction bin-picking and 6D pose estimation simulator"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string scene_file;
  std::string transforms_file;
  std::string estimator = "codebook";
  std::string background = "zero";
  double tolerance_deg = 20.0;
  double max_perturbation_deg = 30.0;

  auto add_common = [&](CLI::App* sub, bool with_codebook) {
    sub->set_config("--config", "", "config file: [section] key=value lines");
    sub->add_option("--seed", cfg.seed, "master seed; all randomness derives from it")
        ->capture_default_str();
    sub->add_option("--out", cfg.out_dir, "output directory")
        ->capture_default_str();
    sub->add_option("--threads", cfg.threads,
                    "worker threads, 0 = hardware count")
        ->capture_default_str();
    sub->add_option("--sampling.views", cfg.sampling.n_views,
                    "codebook viewpoints on the sphere")
        ->capture_default_str();
    sub->add_option("--sampling.inplane", cfg.sampling.n_inplane,
                    "in-plane rolls per viewpoint")
        ->capture_default_str();
    sub->add_option("--sampling.view-distance", cfg.view_distance,
                    "codebook render distance, m")
        ->capture_default_str();
    sub->add_option("--augment.jitter", cfg.augment.translation_jitter,
                    "max translation jitter, px")
        ->capture_default_str();
    sub->add_option("--augment.scale-min", cfg.augment.scale_min,
                    "min scale factor")
        ->capture_default_str();
    sub->add_option("--augment.scale-max", cfg.augment.scale_max,
                    "max scale factor")
        ->capture_default_str();
    sub->add_option("--augment.patches", cfg.augment.occlusion_patches,
                    "occlusion patch count")
        ->capture_default_str();
    sub->add_option("--augment.patch-max", cfg.augment.occlusion_max_side,
                    "max occlusion patch side, px")
        ->capture_default_str();
    sub->add_option("--augment.noise-sigma", cfg.augment.depth_noise_sigma,
                    "depth noise sigma, m")
        ->capture_default_str();
    sub->add_option("--augment.background", background,
                    "background: zero|random-plane|random-clutter")
        ->capture_default_str();
    sub->add_option("--suction.cup-radius", cfg.suction.cup_radius,
                    "suction cup radius, m")
        ->capture_default_str();
    sub->add_option("--suction.flatness", cfg.suction.flatness_threshold,
                    "max contact normal-cone half-angle, rad")
        ->capture_default_str();
    sub->add_option("--suction.v0", cfg.suction.v0, "voltage curve v0")
        ->capture_default_str();
    sub->add_option("--suction.k", cfg.suction.k, "voltage curve gain, 1/m")
        ->capture_default_str();
    sub->add_option("--suction.v-threshold", cfg.suction.v_threshold,
                    "seal voltage threshold")
        ->capture_default_str();
    sub->add_option("--suction.slip-margin", cfg.suction.slip_margin,
                    "lift margin on the flatness threshold")
        ->capture_default_str();
    sub->add_option("--suction.clearance", cfg.suction.clearance,
                    "allowed intrusion above the contact plane, m")
        ->capture_default_str();
    sub->add_option("--bench.pick-trials", cfg.pick_trials,
                    "pick trials per pose class")
        ->capture_default_str();
    sub->add_option("--bench.place-trials", cfg.place_trials,
                    "placement trials per pose class")
        ->capture_default_str();
    sub->add_option("--bench.objects", cfg.objects_per_scene,
                    "objects per bin scene")
        ->capture_default_str();
    sub->add_option("--bench.tolerance-deg", tolerance_deg,
                    "placement success tolerance, deg")
        ->capture_default_str();
    sub->add_option("--bench.perturbation-deg", max_perturbation_deg,
                    "max tilt off the nominal class pose, deg")
        ->capture_default_str();
    sub->add_option("--bench.estimator", estimator,
                    "pose estimator: codebook|oracle")
        ->capture_default_str();
    sub->add_flag("--bench.idealized", cfg.idealized,
                  "idealized physics: flatness pi, rigid, singulated");
    sub->add_option("--report.queries", cfg.report_queries,
                    "codebook report query count")
        ->capture_default_str();
    sub->add_option("--report.coverage-samples", cfg.coverage_samples,
                    "rotations scanned for the coverage bound")
        ->capture_default_str();
    if (with_codebook)
      sub->add_option("--codebook", cfg.codebook_path,
                      "codebook file (otherwise built on the fly)");
  };

  CLI::App* cmd_build = app.add_subcommand(
      "build-codebook", "render the view-sphere codebook and save it");
  add_common(cmd_build, false);

  CLI::App* cmd_estimate = app.add_subcommand(
      "estimate", "estimate object poses in a scene file");
  cmd_estimate->add_option("scene", scene_file, "scene file")->required();
  add_common(cmd_estimate, true);

  CLI::App* cmd_pick =
      app.add_subcommand("pick-bench", "bin-picking benchmark");
  add_common(cmd_pick, false);

  CLI::App* cmd_place =
      app.add_subcommand("place-bench", "canonical-placement benchmark");
  add_common(cmd_place, true);

  CLI::App* cmd_report = app.add_subcommand(
      "codebook-report", "retrieval accuracy and coverage bound");
  add_common(cmd_report, true);

  CLI::App* cmd_calib = app.add_subcommand(
      "calib-demo", "compose the camera extrinsic from a transform file");
  cmd_calib
      ->add_option("--transforms", transforms_file,
                   "file with base->wrist, wrist->aruco, aruco->camera lines")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the error plus usage
    return code == 0 ? 0 : 1;
  }

  cfg.placement_tolerance = tolerance_deg * kDegToRad;
  cfg.scene.max_perturbation = max_perturbation_deg * kDegToRad;
  cfg.augment.background = background_from_string(background);
  if (estimator == "codebook")
    cfg.estimator = ExperimentConfig::Estimator::Codebook;
  else if (estimator == "oracle")
    cfg.estimator = ExperimentConfig::Estimator::Oracle;
  else
    throw ConfigError("unknown estimator: " + estimator);

  if (cmd_calib->parsed()) {
    const auto edges = load_transform_file(transforms_file);
    std::map<std::pair<std::string, std::string>, RigidTransform> by_name;
    for (const auto& e : edges) by_name[{e.parent, e.child}] = e.t;
    auto need = [&](const char* p, const char* c) {
      const auto it = by_name.find({p, c});
      if (it == by_name.end())
        throw ConfigError(std::string("transform file is missing ") + p +
                          " -> " + c);
      return it->second;
    };
    const RigidTransform t_base_camera =
        calibrate_camera(need("base", "wrist"), need("wrist", "aruco"),
                         need("aruco", "camera"));
    std::cout << format_transform_line({"base", "camera", t_base_camera})
              << "\n";
    const auto wo = by_name.find({"wrist", "object"});
    if (wo != by_name.end()) {
      const RigidTransform t_cam_obj = label_object_pose(
          t_base_camera, need("base", "wrist"), wo->second);
      std::cout << format_transform_line({"camera", "object", t_cam_obj})
                << "\n";
    }
    return 0;
  }

  std::filesystem::create_directories(cfg.out_dir);

  if (cmd_build->parsed()) {
    const auto t0 = Clock::now();
    cfg.validate();
    const PoseCodebook cb =
        build_codebook(DeformableObject(cfg.scene.base_shape), cfg.intrinsics,
                       cfg.sampling, cfg.view_distance, cfg.threads);
    const std::string path = cfg.out_dir + "/codebook.txt";
    save_codebook(path, cb);
    std::cout << "codebook " << path << " entries " << cb.entries.size()
              << " dim " << cb.entries.front().embedding.dim() << "\n";
    std::cerr << "runtime: " << seconds_since(t0) << " s\n";
    return 0;
  }

  if (cmd_estimate->parsed()) {
    if (cfg.codebook_path.empty())
      throw ConfigError("estimate requires --codebook");
    const PoseCodebook cb = load_codebook(cfg.codebook_path);
    const BinScene scene = load_scene(scene_file);
    const SceneRender render = render_scene(scene, cb.intrinsics);
    for (size_t i = 0; i < scene.objects.size(); ++i) {
      double sum_u = 0, sum_v = 0;
      int count = 0;
      for (int v = 0; v < render.depth.height; ++v)
        for (int u = 0; u < render.depth.width; ++u)
          if (render.id_at(u, v) == static_cast<int>(i)) {
            sum_u += u;
            sum_v += v;
            ++count;
          }
      if (count == 0) {
        std::cerr << "object_" << i << ": not visible, skipped\n";
        continue;
      }
      const Silhouette sil =
          find_silhouette(render.depth, sum_u / count, sum_v / count);
      const RigidTransform est =
          estimate_pose(render.depth, sil.centroid_u, sil.centroid_v,
                        sil.depth_at_centroid, cb, cb.intrinsics);
      std::cout << format_transform_line(
                       {"camera", "object_" + std::to_string(i), est})
                << "\n";
    }
    return 0;
  }

  if (cmd_pick->parsed()) {
    const ExperimentReport rep = run_pick_bench(cfg);
    write_file(cfg.out_dir + "/pick_bench.csv", report_csv(rep));
    write_file(cfg.out_dir + "/pick_bench.json", report_json(rep, cfg));
    std::cout << report_table(rep);
    std::cerr << "runtime: " << rep.runtime_seconds << " s\n";
    return 0;
  }

  if (cmd_place->parsed()) {
    const ExperimentReport rep = run_place_bench(cfg);
    write_file(cfg.out_dir + "/place_bench.csv", report_csv(rep));
    write_file(cfg.out_dir + "/place_bench.json", report_json(rep, cfg));
    std::cout << report_table(rep);
    std::cerr << "runtime: " << rep.runtime_seconds << " s\n";
    return 0;
  }

  if (cmd_report->parsed()) {
    const CodebookReport rep = run_codebook_report(cfg);
    write_file(cfg.out_dir + "/codebook_report.json",
               codebook_report_json(rep, cfg));
    std::cout << codebook_report_text(rep);
    std::cerr << "runtime: " << rep.runtime_seconds << " s\n";
    return 0;
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace binpick
