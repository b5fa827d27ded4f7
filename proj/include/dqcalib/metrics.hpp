#pragma once

#include <cstddef>
#include <vector>

#include "dqcalib/dq.hpp"
#include "dqcalib/interp.hpp"

namespace dqcalib {

struct SummaryStats {
  double rmse = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population
  double max = 0.0;
};

SummaryStats summarize(const std::vector<double>& values);

struct ErrorSeries {
  std::vector<double> timestamps;
  std::vector<double> translation_err;  // meters
  std::vector<double> rotation_err;     // radians
  SummaryStats translation;
  SummaryStats rotation;
};

/// Geodesic angle arccos((trace R - 1) / 2) with the argument clamped.
double geodesic_angle(const Quaternion& q);

/// RPE step, either a fixed number of samples or a time span.
struct Delta {
  enum class Unit { Samples, Seconds };
  Unit unit = Unit::Samples;
  double value = 1.0;

  static Delta samples(std::size_t n) { return {Unit::Samples, static_cast<double>(n)}; }
  static Delta seconds(double s) { return {Unit::Seconds, s}; }
};

/// E_ij = (A_i^-1 A_j)^-1 (B_i^-1 B_j) for j = i + delta. Stamped at t_j.
/// Throws GridMismatch unless both trajectories share timestamps.
ErrorSeries rpe(const Trajectory& a, const Trajectory& b, Delta delta = Delta::samples(1));

/// E_i = A_i^-1 B_i, without any prior alignment of the trajectories.
ErrorSeries ape(const Trajectory& a, const Trajectory& b);

/// Maps sensor b's motion into sensor a's odometry frame through the
/// extrinsic X (b -> a): both sequences are re-anchored at the first grid
/// sample and b becomes X B X^-1. With the true extrinsic and exact data the
/// two returned trajectories coincide.
std::pair<Trajectory, Trajectory> map_through_extrinsic(const AlignedPair& pair, const Pose& extrinsic);

}  // namespace dqcalib
