#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dqcalib/errors.hpp"
#include "dqcalib/metrics.hpp"
#include "dqcalib/synth.hpp"
#include "test_support.hpp"

using namespace dqcalib;
using namespace dqcalib::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;

Trajectory wander(std::uint64_t seed, int n = 50, double dt = 0.1) {
  std::mt19937_64 rng(seed);
  std::vector<Pose> poses;
  Pose p = Pose::identity();
  for (int i = 0; i < n; ++i) {
    p = p * random_pose(rng, 0.5);
    p.timestamp = dt * i;
    poses.push_back(p);
  }
  return Trajectory("w", poses);
}

std::size_t nonzero(const std::vector<double>& v, double tol = 1e-9) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](double x) { return x > tol; }));
}

}  // namespace

TEST(Summarize, Examples) {
  const SummaryStats s = summarize({3.0, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(s.median, 2.0);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.max, 3.0);
  EXPECT_DOUBLE_EQ(s.rmse, std::sqrt(14.0 / 3.0));
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(2.0 / 3.0));
  EXPECT_DOUBLE_EQ(summarize({4.0, 1.0, 3.0, 2.0}).median, 2.5);
  EXPECT_EQ(summarize({}).rmse, 0.0);
}

TEST(Summarize, StatisticsAreConsistent) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(2.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v(1 + k * 3);
    for (double& x : v) x = e(rng);
    const SummaryStats s = summarize(v);
    const double mean_sq = std::inner_product(v.begin(), v.end(), v.begin(), 0.0) / static_cast<double>(v.size());
    EXPECT_NEAR(s.rmse * s.rmse, mean_sq, 1e-12);
    EXPECT_NEAR(s.rmse * s.rmse, s.mean * s.mean + s.stddev * s.stddev, 1e-12);
    EXPECT_LE(s.mean, s.rmse + 1e-15);
    EXPECT_LE(s.rmse, s.max + 1e-15);
  }
}

TEST(GeodesicAngle, ValuesAndClamp) {
  EXPECT_EQ(geodesic_angle(Quaternion::identity()), 0.0);
  EXPECT_NEAR(geodesic_angle(Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), 0.7)), 0.7, 1e-12);
  EXPECT_NEAR(geodesic_angle(Quaternion::from_axis_angle(Eigen::Vector3d::UnitY(), kPi)), kPi, 1e-7);
  // slightly non-unit input must not produce NaN
  const double a = geodesic_angle(Quaternion{1.0 + 1e-9, 0.0, 0.0, 0.0});
  EXPECT_FALSE(std::isnan(a));
  EXPECT_EQ(a, 0.0);
  EXPECT_FALSE(std::isnan(geodesic_angle(Quaternion{0.0, 1.0 + 1e-9, 0.0, 0.0})));
}

TEST(Ape, IdenticalIsZero) {
  const Trajectory a = wander(2);
  const ErrorSeries s = ape(a, a);
  ASSERT_EQ(s.timestamps.size(), a.size());
  EXPECT_EQ(s.translation.max, 0.0);
  EXPECT_LE(s.rotation.max, 1e-7);
  const ErrorSeries r = rpe(a, a);
  EXPECT_EQ(r.timestamps.size(), a.size() - 1);
  EXPECT_LE(r.translation.max, 1e-12);
}

TEST(Ape, ConstantOffset) {
  const Trajectory a = wander(3);
  const Pose d{0.0, Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), 0.2), Eigen::Vector3d(0.3, 0.4, 0.0)};
  std::vector<Pose> bp;
  for (const Pose& p : a.poses()) {
    Pose q = p * d;
    q.timestamp = p.timestamp;
    bp.push_back(q);
  }
  const ErrorSeries s = ape(a, Trajectory("b", bp));
  for (std::size_t i = 0; i < s.timestamps.size(); ++i) {
    EXPECT_NEAR(s.translation_err[i], 0.5, 1e-9);
    EXPECT_NEAR(s.rotation_err[i], 0.2, 1e-9);
  }
  EXPECT_NEAR(s.translation.rmse, 0.5, 1e-9);
  EXPECT_NEAR(s.translation.stddev, 0.0, 1e-9);
}

TEST(Ape, Symmetric) {
  const Trajectory a = wander(4);
  const Trajectory b = wander(5);
  const ErrorSeries ab = ape(a, b);
  const ErrorSeries ba = ape(b, a);
  for (std::size_t i = 0; i < ab.timestamps.size(); ++i) {
    EXPECT_NEAR(ab.translation_err[i], ba.translation_err[i], 1e-9);
    EXPECT_NEAR(ab.rotation_err[i], ba.rotation_err[i], 1e-9);
  }
  const ErrorSeries rab = rpe(a, b);
  const ErrorSeries rba = rpe(b, a);
  for (std::size_t i = 0; i < rab.timestamps.size(); ++i) EXPECT_NEAR(rab.rotation_err[i], rba.rotation_err[i], 1e-9);
}

TEST(Rpe, LocalizesASingleCorruptedPose) {
  const Trajectory a = wander(6);
  std::vector<Pose> bp = a.poses();
  bp[20].translation += Eigen::Vector3d(0.0, 0.1, 0.0);
  const Trajectory b("b", bp);
  const ErrorSeries r = rpe(a, b);
  EXPECT_EQ(nonzero(r.translation_err), 2u);
  EXPECT_GT(r.translation_err[19], 0.0);  // interval 19 -> 20
  EXPECT_GT(r.translation_err[20], 0.0);  // interval 20 -> 21
  EXPECT_EQ(nonzero(ape(a, b).translation_err), 1u);
}

TEST(Rpe, InvariantToGlobalFrame) {
  const Trajectory a = wander(7);
  const Pose g{0.0, Quaternion::from_axis_angle(Eigen::Vector3d(1, 1, 0).normalized(), 1.0), Eigen::Vector3d(5, -2, 1)};
  std::vector<Pose> bp;
  for (const Pose& p : a.poses()) {
    Pose q = g * p;
    q.timestamp = p.timestamp;
    bp.push_back(q);
  }
  const ErrorSeries r = rpe(a, Trajectory("b", bp), Delta::samples(3));
  EXPECT_EQ(r.timestamps.size(), a.size() - 3);
  EXPECT_LE(r.translation.max, 1e-9);
  EXPECT_LE(r.rotation.max, 1e-7);
  EXPECT_DOUBLE_EQ(r.timestamps.front(), a[3].timestamp);
}

TEST(Rpe, SecondsMatchSamplesOnUniformGrid) {
  const Trajectory a = wander(8);
  const Trajectory b = wander(9);
  const ErrorSeries s = rpe(a, b, Delta::samples(5));
  const ErrorSeries t = rpe(a, b, Delta::seconds(0.5));
  ASSERT_EQ(s.timestamps.size(), t.timestamps.size());
  for (std::size_t i = 0; i < s.timestamps.size(); ++i) EXPECT_EQ(s.translation_err[i], t.translation_err[i]);
}

TEST(Metrics, GridMismatch) {
  const Trajectory a = wander(10, 50);
  const Trajectory shorter = wander(10, 49);
  const Trajectory shifted = wander(10, 50, 0.11);
  for (const Trajectory* b : {&shorter, &shifted}) {
    try {
      ape(a, *b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
    }
    EXPECT_THROW(rpe(a, *b), Error);
  }
}

TEST(MapThroughExtrinsic, TruthGivesZeroError) {
  const RigSpec rig = default_rig();
  const SynthOutput data = generate(rig, {TrajectoryKind::Figure8_3D, 30.0, 20.0});
  const AlignedPair pair = align(data.front, data.rear);
  const auto [a, b] = map_through_extrinsic(pair, rig.extrinsic_fr);
  EXPECT_LE(ape(a, b).translation.max, 1e-9);
  EXPECT_LE(rpe(a, b).translation.max, 1e-9);
  EXPECT_EQ(a[0].translation, Eigen::Vector3d::Zero());

  // a wrong extrinsic shows up in both metrics
  Pose off = rig.extrinsic_fr;
  off.translation += Eigen::Vector3d(0.2, 0.0, 0.0);
  const auto [a2, b2] = map_through_extrinsic(pair, off);
  EXPECT_GT(ape(a2, b2).translation.rmse, 0.01);
  EXPECT_GT(rpe(a2, b2).translation.rmse, 1e-3);
}
