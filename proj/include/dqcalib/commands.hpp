#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "dqcalib/align_init.hpp"
#include "dqcalib/handeye.hpp"
#include "dqcalib/interp.hpp"
#include "dqcalib/io.hpp"
#include "dqcalib/metrics.hpp"
#include "dqcalib/verify.hpp"

namespace dqcalib {

// Pipeline drivers behind the CLI. They throw Error (with the failing stage
// prefixed to the message) and return the process exit code otherwise.

struct CalibrationRun {
  AlignedPair aligned;
  std::optional<RigidFit> init;
  std::string init_note;  // why init is missing, if it is
  MotionSet motions;
  CalibrationResult result;
};

/// align -> initial_extrinsic -> extract_motions -> solve. A failed
/// initialization is recorded, not fatal.
CalibrationRun run_calibration(const Trajectory& front, const Trajectory& rear, const PipelineConfig& cfg);
nlohmann::json calibration_report(const CalibrationRun& run, const PipelineConfig& cfg);
/// 0 WellConditioned, 2 NearPlanar.
int exit_code_for(Degeneracy d);

struct EvaluationRun {
  ErrorSeries ape;
  ErrorSeries rpe;
};

/// With `align` false the inputs must already share a grid (GridMismatch otherwise).
EvaluationRun run_evaluation(const Trajectory& front, const Trajectory& rear, const Pose& extrinsic,
                             const PipelineConfig& cfg, bool align = true);
nlohmann::json evaluation_report(const EvaluationRun& run, const Pose& extrinsic);
/// "timestamp,trans_err,rot_err" rows.
std::string series_csv(const ErrorSeries& s);

nlohmann::json verification_report(const FeatureMatchReport& r);

/// Writes front.txt, rear.txt, features.txt, base.txt and ground_truth.json.
int cmd_simulate(const PipelineConfig& cfg, const std::filesystem::path& out_dir);
int cmd_calibrate(const std::filesystem::path& front_file, const std::filesystem::path& rear_file,
                  const PipelineConfig& cfg, std::ostream& json_out);
/// Writes ape.csv and rpe.csv into `csv_dir` when given.
int cmd_evaluate(const std::filesystem::path& front_file, const std::filesystem::path& rear_file,
                 const std::filesystem::path& extrinsic_json, const PipelineConfig& cfg, std::ostream& json_out,
                 const std::optional<std::filesystem::path>& csv_dir = std::nullopt, bool align = true);
/// `base_traj_file` is the world-frame base trajectory.
int cmd_verify(const std::filesystem::path& features_file, const std::filesystem::path& base_traj_file,
               const std::filesystem::path& extrinsic_before, const std::filesystem::path& extrinsic_after,
               const PipelineConfig& cfg, std::ostream& json_out);

/// Report written on failure: schema_version, status "error", error code and message.
nlohmann::json error_report(const std::string& code, const std::string& message);

}  // namespace dqcalib
