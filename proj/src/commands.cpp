#include "dqcalib/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

template <class F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.detail());
  }
}

nlohmann::json stats_json(const SummaryStats& s) {
  return {{"rmse", round_sig12(s.rmse)},     {"mean", round_sig12(s.mean)}, {"median", round_sig12(s.median)},
          {"std", round_sig12(s.stddev)}, {"max", round_sig12(s.max)}};
}

nlohmann::json series_json(const ErrorSeries& s) {
  return {{"samples", s.timestamps.size()},
          {"translation", stats_json(s.translation)},
          {"rotation", stats_json(s.rotation)}};
}

nlohmann::json extrinsic_json(const Pose& p) {
  return {{"pose", pose_to_json(p)}, {"dual_quaternion", dq_to_json(from_pose(p))}};
}

nlohmann::json association_json(const AssociationResult& a) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : a.segments) {
    segs.push_back({{"anchor", round_sig12(s.anchor)},
                    {"offset", round_sig12(s.offset)},
                    {"reference_points", s.reference_points},
                    {"matched", s.matched},
                    {"rmse", round_sig12(s.rmse)}});
  }
  return {{"rmse", round_sig12(a.rmse)},
          {"matched_count", a.matched_count},
          {"unmatched_count", a.unmatched_count},
          {"available", a.available},
          {"segments", segs}};
}

nlohmann::json offset_json(const OffsetEstimate& o) {
  double lo = 0.0;
  double hi = 0.0;
  if (!o.offsets.empty()) {
    lo = *std::min_element(o.offsets.begin(), o.offsets.end());
    hi = *std::max_element(o.offsets.begin(), o.offsets.end());
  }
  return {{"method", o.method},
          {"anchors", o.anchors.size()},
          {"failed_anchors", o.failed_anchors},
          {"offset_min", round_sig12(lo)},
          {"offset_max", round_sig12(hi)},
          {"confidence", round_sig12(o.confidence)}};
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

CalibrationRun run_calibration(const Trajectory& front, const Trajectory& rear, const PipelineConfig& cfg) {
  CalibrationRun run;
  run.aligned = staged("align", [&] { return align(front, rear, cfg.grid); });
  try {
    run.init = initial_extrinsic(run.aligned, cfg.init_low_confidence_rms);
  } catch (const Error& e) {
    run.init_note = e.what();  // keeps the code name
  }
  run.motions = staged("extract", [&] { return extract_motions(run.aligned, cfg.extract_options(), run.init); });
  run.result = staged("solve", [&] { return solve(run.motions.pairs, cfg.solve_options(), run.init); });
  return run;
}

int exit_code_for(Degeneracy d) { return d == Degeneracy::WellConditioned ? 0 : 2; }

nlohmann::json calibration_report(const CalibrationRun& run, const PipelineConfig& cfg) {
  const CalibrationResult& r = run.result;
  nlohmann::json sv = nlohmann::json::array();
  for (double s : r.singular_values) sv.push_back(round_sig12(s));

  double real_max = 0.0;
  double real_sum = 0.0;
  double dual_max = 0.0;
  double dual_sum = 0.0;
  for (const auto& m : run.motions.mismatch) {
    real_max = std::max(real_max, m.real);
    dual_max = std::max(dual_max, m.dual);
    real_sum += m.real;
    dual_sum += m.dual;
  }
  const double n = std::max<double>(1.0, static_cast<double>(run.motions.mismatch.size()));

  nlohmann::json init;
  if (run.init) {
    init = {{"available", true},
            {"pose", pose_to_json(run.init->pose())},
            {"rms_residual", round_sig12(run.init->rms_residual)},
            {"low_confidence", run.init->low_confidence}};
  } else {
    init = {{"available", false}, {"reason", run.init_note}};
  }

  nlohmann::json extrinsic = extrinsic_json(r.pose);
  extrinsic["dual_quaternion"] = dq_to_json(r.extrinsic);

  return {{"schema_version", kSchemaVersion},
          {"status", "ok"},
          {"extrinsic", extrinsic},
          {"extrinsic_in_base", pose_to_json(express_in_base(r.pose, cfg.base_to_front))},
          {"degeneracy", std::string(to_string(r.degeneracy))},
          {"diagnostics",
           {{"singular_values", sv},
            {"pairs_used", r.pairs_used},
            {"batches_used", r.batches_used},
            {"mean_residual", round_sig12(r.mean_residual)},
            {"grid_samples", run.aligned.size()},
            {"intervals", run.motions.intervals},
            {"rejected_small_angle", run.motions.rejected_small_angle},
            {"rejected_congruence", run.motions.rejected_congruence},
            {"rejected_gate", run.motions.rejected_gate},
            {"scalar_mismatch",
             {{"real_max", round_sig12(real_max)},
              {"real_mean", round_sig12(real_sum / n)},
              {"dual_max", round_sig12(dual_max)},
              {"dual_mean", round_sig12(dual_sum / n)}}}}},
          {"initialization", init}};
}

EvaluationRun run_evaluation(const Trajectory& front, const Trajectory& rear, const Pose& extrinsic,
                             const PipelineConfig& cfg, bool align_inputs) {
  AlignedPair pair;
  if (align_inputs) {
    pair = staged("align", [&] { return align(front, rear, cfg.grid); });
  } else {
    if (front.size() != rear.size()) {
      throw Error(ErrorCode::GridMismatch, "evaluate: trajectories have " + std::to_string(front.size()) + " and " +
                                               std::to_string(rear.size()) + " samples");
    }
    for (std::size_t i = 0; i < front.size(); ++i) {
      if (std::abs(front[i].timestamp - rear[i].timestamp) > 1e-9) {
        throw Error(ErrorCode::GridMismatch, "evaluate: timestamps differ at index " + std::to_string(i));
      }
    }
    pair.timestamps = front.timestamps();
    pair.poses_a = front.poses();
    pair.poses_b = rear.poses();
  }
  if (pair.size() < 2) throw Error(ErrorCode::GridMismatch, "evaluate: fewer than two common samples");
  const auto [a, b] = map_through_extrinsic(pair, extrinsic);
  return {staged("ape", [&] { return ape(a, b); }), staged("rpe", [&] { return rpe(a, b); })};
}

nlohmann::json evaluation_report(const EvaluationRun& run, const Pose& extrinsic) {
  return {{"schema_version", kSchemaVersion},
          {"status", "ok"},
          {"extrinsic", extrinsic_json(extrinsic)},
          {"ape", series_json(run.ape)},
          {"rpe", series_json(run.rpe)}};
}

std::string series_csv(const ErrorSeries& s) {
  std::string out = "timestamp,trans_err,rot_err\n";
  for (std::size_t i = 0; i < s.timestamps.size(); ++i) {
    out += fmt12(s.timestamps[i]) + "," + fmt12(s.translation_err[i]) + "," + fmt12(s.rotation_err[i]) + "\n";
  }
  return out;
}

nlohmann::json verification_report(const FeatureMatchReport& r) {
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"status", "ok"},
                      {"rmse_before", round_sig12(r.rmse_before)},
                      {"rmse_after", round_sig12(r.rmse_after)},
                      {"matched_count", r.matched_count},
                      {"segments_compared", r.segments_compared},
                      {"segments_improved", r.segments_improved},
                      {"low_power", r.low_power},
                      {"p_value", nullptr},
                      {"before", association_json(r.before)},
                      {"after", association_json(r.after)},
                      {"offset_before", offset_json(r.offset_before)},
                      {"offset_after", offset_json(r.offset_after)}};
  if (r.p_value) j["p_value"] = round_sig12(*r.p_value);
  return j;
}

nlohmann::json error_report(const std::string& code, const std::string& message) {
  return {{"schema_version", kSchemaVersion}, {"status", "error"}, {"error", code}, {"message", message}};
}

int cmd_simulate(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::IoError, "cannot create output directory '" + out_dir.string() + "'");
  }
  const RigSpec rig = cfg.rig();
  const TrajectorySpec spec = cfg.trajectory();
  const SynthOutput sim = generate(rig, spec);

  save_trajectory(out_dir / "front.txt", sim.front);
  save_trajectory(out_dir / "rear.txt", sim.rear);
  save_trajectory(out_dir / "base.txt", sim.base);
  save_features(out_dir / "features.txt", sim.features.observations);

  const nlohmann::json gt = {
      {"schema_version", kSchemaVersion},
      {"seed", rig.seed},
      {"trajectory", {{"kind", std::string(to_string(spec.kind))}, {"duration", spec.duration}, {"scale", spec.scale}}},
      {"extrinsic", extrinsic_json(rig.extrinsic_fr)},
      {"base_to_front", pose_to_json(rig.base_to_front)},
      {"base_to_rear", pose_to_json(rig.base_to_rear())},
      {"noise",
       {{"trans_sigma", rig.noise.trans_sigma},
        {"rot_sigma", round_sig12(rig.noise.rot_sigma)},
        {"mode", rig.noise.mode == NoiseSpec::Mode::Relative ? "relative" : "absolute"},
        {"feature_sigma", rig.features.sigma}}}};
  write_text(out_dir / "ground_truth.json", gt.dump(2) + "\n");
  return 0;
}

int cmd_calibrate(const std::filesystem::path& front_file, const std::filesystem::path& rear_file,
                  const PipelineConfig& cfg, std::ostream& json_out) {
  const Trajectory front = staged("load", [&] { return load_trajectory(front_file, "front"); });
  const Trajectory rear = staged("load", [&] { return load_trajectory(rear_file, "rear"); });
  const CalibrationRun run = run_calibration(front, rear, cfg);
  json_out << calibration_report(run, cfg).dump(2) << '\n';
  return exit_code_for(run.result.degeneracy);
}

int cmd_evaluate(const std::filesystem::path& front_file, const std::filesystem::path& rear_file,
                 const std::filesystem::path& extrinsic_json_file, const PipelineConfig& cfg, std::ostream& json_out,
                 const std::optional<std::filesystem::path>& csv_dir, bool align_inputs) {
  const Trajectory front = staged("load", [&] { return load_trajectory(front_file, "front"); });
  const Trajectory rear = staged("load", [&] { return load_trajectory(rear_file, "rear"); });
  const Pose extrinsic = staged("load", [&] { return load_extrinsic_json(extrinsic_json_file); });
  const EvaluationRun run = run_evaluation(front, rear, extrinsic, cfg, align_inputs);
  if (csv_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*csv_dir, ec);
    if (ec || !std::filesystem::is_directory(*csv_dir)) {
      throw Error(ErrorCode::IoError, "cannot create output directory '" + csv_dir->string() + "'");
    }
    write_text(*csv_dir / "ape.csv", series_csv(run.ape));
    write_text(*csv_dir / "rpe.csv", series_csv(run.rpe));
  }
  json_out << evaluation_report(run, extrinsic).dump(2) << '\n';
  return 0;
}

int cmd_verify(const std::filesystem::path& features_file, const std::filesystem::path& base_traj_file,
               const std::filesystem::path& extrinsic_before, const std::filesystem::path& extrinsic_after,
               const PipelineConfig& cfg, std::ostream& json_out) {
  VerifyScene scene;
  scene.observations = staged("load", [&] { return load_features(features_file); });
  scene.base = staged("load", [&] { return load_trajectory(base_traj_file, "base"); });
  scene.base_to_front = cfg.base_to_front;
  const Pose before = staged("load", [&] { return load_extrinsic_json(extrinsic_before); });
  const Pose after = staged("load", [&] { return load_extrinsic_json(extrinsic_after); });

  const VerifyOptions opts = cfg.verify_options();
  const FeatureMatchReport report = staged("verify", [&] { return compare(before, after, scene, opts); });
  json_out << verification_report(report).dump(2) << '\n';
  return 0;
}

}  // namespace dqcalib
