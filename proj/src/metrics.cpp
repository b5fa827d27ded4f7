#include "dqcalib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

constexpr double kGridTol = 1e-9;

void require_same_grid(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::GridMismatch, "trajectories have " + std::to_string(a.size()) + " and " +
                                             std::to_string(b.size()) + " samples");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].timestamp - b[i].timestamp) > kGridTol) {
      throw Error(ErrorCode::GridMismatch, "timestamps differ at index " + std::to_string(i));
    }
  }
}

void push_error(ErrorSeries& s, const Pose& e, double t) {
  s.timestamps.push_back(t);
  s.translation_err.push_back(e.translation.norm());
  s.rotation_err.push_back(geodesic_angle(e.rotation));
}

void finish(ErrorSeries& s) {
  s.translation = summarize(s.translation_err);
  s.rotation = summarize(s.rotation_err);
}

}  // namespace

SummaryStats summarize(const std::vector<double>& values) {
  SummaryStats out;
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  double sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
  }
  out.mean = sum / n;
  out.rmse = std::sqrt(sq / n);
  double dev = 0.0;
  for (double v : values) dev += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(dev / n);
  out.max = *std::max_element(values.begin(), values.end());

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  out.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return out;
}

double geodesic_angle(const Quaternion& q) {
  const double c = (q.to_matrix().trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

ErrorSeries rpe(const Trajectory& a, const Trajectory& b, Delta delta) {
  require_same_grid(a, b);
  ErrorSeries s;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = n;
    if (delta.unit == Delta::Unit::Samples) {
      j = i + static_cast<std::size_t>(delta.value);
    } else {
      for (std::size_t k = i + 1; k < n; ++k) {
        if (a[k].timestamp >= a[i].timestamp + delta.value - kGridTol) {
          j = k;
          break;
        }
      }
    }
    if (j >= n || j == i) continue;
    const Pose ra = a[i].inverse() * a[j];
    const Pose rb = b[i].inverse() * b[j];
    push_error(s, ra.inverse() * rb, a[j].timestamp);
  }
  finish(s);
  return s;
}

ErrorSeries ape(const Trajectory& a, const Trajectory& b) {
  require_same_grid(a, b);
  ErrorSeries s;
  for (std::size_t i = 0; i < a.size(); ++i) push_error(s, a[i].inverse() * b[i], a[i].timestamp);
  finish(s);
  return s;
}

std::pair<Trajectory, Trajectory> map_through_extrinsic(const AlignedPair& pair, const Pose& extrinsic) {
  if (pair.size() == 0) throw Error(ErrorCode::GridMismatch, "empty aligned pair");
  const Pose a0 = pair.poses_a.front().inverse();
  const Pose b0 = pair.poses_b.front().inverse();
  const Pose x_inv = extrinsic.inverse();
  std::vector<Pose> pa;
  std::vector<Pose> pb;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    Pose a = a0 * pair.poses_a[i];
    Pose b = extrinsic * (b0 * pair.poses_b[i]) * x_inv;
    a.timestamp = pair.timestamps[i];
    b.timestamp = pair.timestamps[i];
    pa.push_back(a);
    pb.push_back(b);
  }
  return {Trajectory("a", std::move(pa)), Trajectory("b", std::move(pb))};
}

}  // namespace dqcalib
