#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "dqcalib/errors.hpp"
#include "dqcalib/io.hpp"
#include "dqcalib/metrics.hpp"
#include "test_support.hpp"

using namespace dqcalib;
using namespace dqcalib::testing;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidSpec;
}

Trajectory random_trajectory(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<Pose> poses;
  for (int i = 0; i < n; ++i) poses.push_back(random_pose(rng, 500.0, 1700000000.0 + 0.1 * i));
  return Trajectory("front", poses);
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dqcalib_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST(PoseFile, LineFormat) {
  const Pose p{1.5, Quaternion::identity(), Eigen::Vector3d(1.0, -2.0, 0.25)};
  EXPECT_EQ(format_pose_line(p), "1.500000000 1.000000000 -2.000000000 0.250000000 0.000000000 0.000000000 0.000000000 1.000000000");
}

TEST(PoseFile, RoundTripIsStable) {
  const Trajectory t = random_trajectory(1, 200);
  std::ostringstream first;
  write_trajectory(first, t);
  std::istringstream in(first.str());
  std::vector<ParseWarning> warnings;
  const Trajectory back = read_trajectory(in, "front", "mem", &warnings);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    // nine decimals exceed double resolution at epoch scale, so stamps come back exact
    EXPECT_EQ(back[i].timestamp, t[i].timestamp);
    EXPECT_LE((back[i].translation - t[i].translation).cwiseAbs().maxCoeff(), 5.1e-10);
    EXPECT_LE(geodesic_angle(back[i].rotation.conjugate() * t[i].rotation), 1e-8);
  }
  // rounded values survive a second pass unchanged
  std::ostringstream second;
  write_trajectory(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_TRUE(warnings.empty());
}

TEST(PoseFile, ParseErrorNamesLine) {
  std::ostringstream text;
  text << "# header\n\n";
  for (int i = 0; i < 14; ++i) text << i << " 0 0 0 0 0 0 1\n";
  text << "14 0 0 zero 0 0 0 1\n";  // line 17
  std::istringstream in(text.str());
  std::string msg;
  EXPECT_EQ(code_of([&] { read_trajectory(in, "front", "front.txt", nullptr); }, &msg), ErrorCode::ParseError);
  EXPECT_NE(msg.find("front.txt:17"), std::string::npos) << msg;

  std::istringstream short_line("0 0 0 0 0 0 1\n");
  EXPECT_EQ(code_of([&] { read_trajectory(short_line, "front", "f", nullptr); }), ErrorCode::ParseError);
  std::istringstream backwards("1 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1\n");
  EXPECT_EQ(code_of([&] { read_trajectory(backwards, "front", "f", nullptr); }), ErrorCode::ParseError);
  std::istringstream zero("1 0 0 0 0 0 0 0\n");
  EXPECT_EQ(code_of([&] { read_trajectory(zero, "front", "f", nullptr); }), ErrorCode::ParseError);
}

TEST(PoseFile, NormalizesQuaternions) {
  std::istringstream in(
      "0 0 0 0 0 0 0 1.00001\n"
      "1 0 0 0 0 0 0 1.01\n"
      "2 0 0 0 0 0 0 1\n");
  std::vector<ParseWarning> warnings;
  const Trajectory t = read_trajectory(in, "front", "mem", &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].line, 2u);
  for (const Pose& p : t.poses()) EXPECT_NEAR(p.rotation.squared_norm(), 1.0, 1e-15);
}

TEST_F(TempDir, FilesRoundTrip) {
  const Trajectory t = random_trajectory(2, 20);
  save_trajectory(dir_ / "t.txt", t);
  const Trajectory back = load_trajectory(dir_ / "t.txt", "front");
  EXPECT_EQ(back.size(), t.size());

  std::vector<FeatureObservation> obs = {{"front", 0.1, "curb", {1.0, 2.0, -1.0}},
                                         {"rear", 0.25, "curb", {-3.123456789, 0.5, 7.0}}};
  save_features(dir_ / "f.txt", obs);
  const auto fb = load_features(dir_ / "f.txt");
  ASSERT_EQ(fb.size(), 2u);
  EXPECT_EQ(fb[1].sensor_id, "rear");
  EXPECT_EQ(fb[1].label, "curb");
  EXPECT_DOUBLE_EQ(fb[1].timestamp, 0.25);
  EXPECT_LE((fb[1].point - obs[1].point).norm(), 1e-9);

  EXPECT_EQ(code_of([&] { load_trajectory(dir_ / "missing.txt", "front"); }), ErrorCode::IoError);
  EXPECT_EQ(code_of([&] { write_text(dir_ / "no" / "such" / "dir.txt", "x"); }), ErrorCode::IoError);
}

TEST(FeatureFile, RejectsMalformed) {
  std::istringstream in("# c\nfront 0.1 curb 1 2\n");
  std::string msg;
  EXPECT_EQ(code_of([&] { read_features(in, "feat.txt"); }, &msg), ErrorCode::ParseError);
  EXPECT_NE(msg.find("feat.txt:2"), std::string::npos);
}

TEST(Json, TwelveSignificantDigits) {
  EXPECT_EQ(round_sig12(1.23456789012345), 1.23456789012);
  EXPECT_EQ(round_sig12(-9876.54321098765), -9876.54321099);
  EXPECT_EQ(round_sig12(0.0), 0.0);
  const nlohmann::json j = pose_to_json({0.0, Quaternion::identity(), Eigen::Vector3d(1.0 / 3.0, 0.0, 0.0)});
  EXPECT_EQ(j["translation"][0].dump(), "0.333333333333");
}

TEST(Json, PoseRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Pose p = random_pose(rng);
    const Pose back = pose_from_json(nlohmann::json::parse(pose_to_json(p).dump()));
    EXPECT_LE(max_abs_diff(back.matrix(), p.matrix()), 1e-10);
  }
  const nlohmann::json dq = dq_to_json(from_pose(Pose::identity()));
  ASSERT_EQ(dq.size(), 8u);
  EXPECT_EQ(dq[0].get<double>(), 1.0);
}

TEST_F(TempDir, ExtrinsicJson) {
  const Pose p{0.0, Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), 2.0), Eigen::Vector3d(-9.0, 1.0, 0.2)};
  nlohmann::json j;
  j["extrinsic"]["pose"] = pose_to_json(p);
  write_text(dir_ / "x.json", j.dump(2));
  EXPECT_LE(max_abs_diff(load_extrinsic_json(dir_ / "x.json").matrix(), p.matrix()), 1e-11);

  write_text(dir_ / "bad.json", "{\"pose\": {}}");
  EXPECT_EQ(code_of([&] { load_extrinsic_json(dir_ / "bad.json"); }), ErrorCode::ParseError);
  write_text(dir_ / "broken.json", "{not json");
  EXPECT_EQ(code_of([&] { load_extrinsic_json(dir_ / "broken.json"); }), ErrorCode::ParseError);
}

TEST(Config, ParsesKnownKeys) {
  std::istringstream in(
      "# comment\n"
      "seed = 42\n"
      "batch_size = 0   # whole stack\n"
      "grid_policy = uniform:0.05\n"
      "noise_mode = absolute\n"
      "sim_trajectory = planar_loop\n"
      "base_to_front = 1 2 3 0 0 0 2\n");
  const PipelineConfig c = parse_config(in, "cfg");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.batch_size, 0u);
  EXPECT_EQ(c.grid.kind, GridPolicy::Kind::Uniform);
  EXPECT_DOUBLE_EQ(c.grid.step, 0.05);
  EXPECT_EQ(c.noise_mode, NoiseSpec::Mode::Absolute);
  EXPECT_EQ(c.sim_trajectory, TrajectoryKind::PlanarLoop);
  EXPECT_EQ(c.base_to_front.rotation.w, 1.0);  // normalized
  EXPECT_EQ(c.base_to_front.translation, Eigen::Vector3d(1, 2, 3));
  // untouched keys keep their defaults
  EXPECT_EQ(c.motion_stride, 1u);
  EXPECT_DOUBLE_EQ(c.gating_distance, 1.0);
}

TEST(Config, RejectsBadInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "cfg");
  };
  std::string msg;
  EXPECT_EQ(code_of([&] { parse("seed = 1\ncolour = blue\n"); }, &msg), ErrorCode::ConfigError);
  EXPECT_NE(msg.find("cfg:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("colour"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { parse("seed 1\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse("gating_distance = far\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse("motion_stride = 0\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse("batch_size = 2.5\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse("grid_policy = uniform:-1\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse("sim_trajectory = spiral\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse("base_to_front = 1 2 3\n"); }), ErrorCode::ConfigError);
}

TEST(Config, TextRoundTrip) {
  PipelineConfig c;
  c.seed = 7;
  c.trans_sigma = 0.0123456789;
  c.grid = GridPolicy::sensor_b();
  c.motion_stride = 3;
  const std::string text = config_to_text(c);
  std::istringstream in(text);
  const PipelineConfig back = parse_config(in, "roundtrip");
  EXPECT_EQ(config_to_text(back), text);
  EXPECT_EQ(back.motion_stride, 3u);
  EXPECT_EQ(back.grid.kind, GridPolicy::Kind::SensorB);
  for (const char* key : {"seed", "batch_size", "link_distance", "degeneracy_threshold", "sim_extrinsic"}) {
    EXPECT_NE(text.find(std::string(key) + " = "), std::string::npos) << key;
  }
}

TEST(Config, DerivedOptions) {
  PipelineConfig c;
  c.min_angle_deg = 2.0;
  c.rot_sigma_deg = 0.1;
  c.link_distance = 3.0;
  EXPECT_NEAR(c.extract_options().min_angle, 2.0 * kDegree, 1e-15);
  EXPECT_NEAR(c.rig().noise.rot_sigma, 0.1 * kDegree, 1e-15);
  EXPECT_EQ(c.verify_options().link_distance, 3.0);
  EXPECT_EQ(c.solve_options().batch_size, 50u);
}
