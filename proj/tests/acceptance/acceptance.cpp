// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <Eigen/Geometry>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dqcalib/align_init.hpp"
#include "dqcalib/commands.hpp"
#include "dqcalib/dq.hpp"
#include "dqcalib/errors.hpp"
#include "dqcalib/handeye.hpp"
#include "dqcalib/interp.hpp"
#include "dqcalib/metrics.hpp"
#include "dqcalib/synth.hpp"
#include "dqcalib/verify.hpp"

using namespace dqcalib;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Quaternion random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Quaternion{n(rng), n(rng), n(rng), n(rng)}.normalized();
}

Pose random_pose(std::mt19937_64& rng, double spread = 5.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  return {0.0, random_rotation(rng), Eigen::Vector3d(u(rng), u(rng), u(rng))};
}

// Perturbs `truth` by exactly `dt` meters and `dr` radians in random directions.
Pose cad_prior(const Pose& truth, double dt, double dr, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d tdir(n(rng), n(rng), n(rng));
  Eigen::Vector3d rdir(n(rng), n(rng), n(rng));
  Pose p = truth;
  p.translation += dt * tdir.normalized();
  p.rotation = (truth.rotation * Quaternion::from_axis_angle(rdir.normalized(), dr)).normalized();
  return p;
}

PipelineConfig config_for(const RigSpec& rig, const TrajectorySpec& traj) {
  PipelineConfig cfg;
  cfg.base_to_front = rig.base_to_front;
  cfg.sim_extrinsic = rig.extrinsic_fr;
  cfg.sim_trajectory = traj.kind;
  cfg.sim_duration = traj.duration;
  cfg.sim_scale = traj.scale;
  cfg.seed = rig.seed;
  return cfg;
}

CalibrationResult calibrate(const SynthOutput& sim, const PipelineConfig& cfg) {
  return run_calibration(sim.front, sim.rear, cfg).result;
}

// 1. Exact recovery on noiseless Figure8_3D data.
Outcome exact_recovery() {
  RigSpec rig = default_rig();
  const TrajectorySpec traj{TrajectoryKind::Figure8_3D, 60.0, 20.0};
  const double rot = geodesic_angle(rig.extrinsic_fr.rotation);
  const double off = rig.extrinsic_fr.translation.norm();
  const SynthOutput sim = generate(rig, traj);
  const auto t0 = std::chrono::steady_clock::now();
  const CalibrationResult res = calibrate(sim, config_for(rig, traj));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const ExtrinsicError e = extrinsic_error(res.pose, rig.extrinsic_fr);
  const bool ok = rot >= 30.0 * kDegree && off >= 3.0 && e.translation <= 1e-6 && e.rotation <= 1e-6 && secs < 5.0;
  return {ok, fmt("extrinsic %.1f deg / %.2f m; error %.2e m, %.2e rad", rot / kDegree, off, e.translation,
                  e.rotation) +
                  fmt("; solved in %.3f s", secs)};
}

// 2. Monte-Carlo noise robustness and comparison against a perturbed CAD prior.
Outcome noise_robustness() {
  const TrajectorySpec traj{TrajectoryKind::Figure8_3D, 60.0, 20.0};
  std::vector<double> et;
  std::vector<double> er;
  int failures = 0;
  int beats = 0;
  const int seeds = 50;
  std::mt19937_64 cad_rng(2024);
  for (int s = 1; s <= seeds; ++s) {
    RigSpec rig = default_rig();
    rig.seed = static_cast<std::uint64_t>(s);
    rig.noise = {0.01, 0.1 * kDegree, NoiseSpec::Mode::Relative};
    const Pose cad = cad_prior(rig.extrinsic_fr, 0.20, 2.0 * kDegree, cad_rng);
    try {
      const SynthOutput sim = generate(rig, traj);
      const CalibrationResult res = calibrate(sim, config_for(rig, traj));
      const ExtrinsicError e = extrinsic_error(res.pose, rig.extrinsic_fr);
      const ExtrinsicError c = extrinsic_error(cad, rig.extrinsic_fr);
      et.push_back(e.translation);
      er.push_back(e.rotation);
      if (e.translation < c.translation && e.rotation < c.rotation) ++beats;
    } catch (const Error&) {
      ++failures;
    }
  }
  const double mt = et.empty() ? INFINITY : median(et);
  const double mr = er.empty() ? INFINITY : median(er);
  const bool ok = failures == 0 && mt <= 0.05 && mr <= 0.5 * kDegree && beats >= static_cast<int>(0.9 * seeds);
  return {ok, fmt("median error %.4f m, %.4f deg; failures %.0f; beats CAD prior in %.0f", mt, mr / kDegree, failures,
                  beats) +
                  fmt("/%.0f seeds", seeds)};
}

// 3. APE and RPE under a perturbed CAD extrinsic vs the solved one.
Outcome ape_rpe_improvement() {
  const TrajectorySpec traj{TrajectoryKind::Figure8_3D, 60.0, 20.0};
  std::mt19937_64 cad_rng(77);
  bool ok = true;
  double worst_ape = 0.0;
  double worst_rpe = 0.0;
  const int seeds = 10;
  for (int s = 1; s <= seeds; ++s) {
    RigSpec rig = default_rig();
    rig.seed = static_cast<std::uint64_t>(100 + s);
    // absolute noise: drift would otherwise dominate APE
    rig.noise = {0.01, 0.1 * kDegree, NoiseSpec::Mode::Absolute};
    const SynthOutput sim = generate(rig, traj);
    const PipelineConfig cfg = config_for(rig, traj);
    const Pose solved = calibrate(sim, cfg).pose;
    const Pose cad = cad_prior(rig.extrinsic_fr, 0.20, 2.0 * kDegree, cad_rng);
    const EvaluationRun before = run_evaluation(sim.front, sim.rear, cad, cfg);
    const EvaluationRun after = run_evaluation(sim.front, sim.rear, solved, cfg);
    const bool ape_down = after.ape.translation.rmse < before.ape.translation.rmse &&
                          after.ape.rotation.rmse < before.ape.rotation.rmse;
    const bool rpe_down = after.rpe.translation.rmse < before.rpe.translation.rmse &&
                          after.rpe.rotation.rmse < before.rpe.rotation.rmse;
    ok = ok && ape_down && rpe_down;
    worst_ape = std::max(worst_ape, after.ape.translation.rmse / before.ape.translation.rmse);
    worst_rpe = std::max(worst_rpe, after.rpe.translation.rmse / before.rpe.translation.rmse);
  }
  return {ok, fmt("%.0f seeds; worst after/before translation rmse: APE %.3f, RPE %.3f", seeds, worst_ape, worst_rpe)};
}

// 4. ScLERP on an analytic constant-screw trajectory.
Outcome sclerp_correctness() {
  std::mt19937_64 rng(4);
  Screw s;
  s.direction = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  s.moment = Eigen::Vector3d(1.0, 2.0, -0.5).cross(s.direction);
  const double omega = 0.35;  // rad/s
  const double speed = 1.2;   // m/s along the axis
  const Pose start = random_pose(rng);
  auto truth = [&](double t) {
    Screw st = s;
    st.angle = omega * t;
    st.displacement = speed * t;
    return to_pose(from_pose(start) * from_screw(st), t);
  };
  std::vector<Pose> samples;
  for (int k = 0; k <= 20; ++k) samples.push_back(truth(0.5 * k));
  const Trajectory traj("screw", samples);

  std::uniform_real_distribution<double> u(0.0, 10.0);
  double max_t = 0.0;
  double max_r = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    const Pose got = interpolate_at(traj, t);
    const Pose want = truth(t);
    max_t = std::max(max_t, (got.translation - want.translation).norm());
    max_r = std::max(max_r, geodesic_angle(want.rotation.conjugate() * got.rotation));
  }
  bool endpoints = true;
  for (int i = 0; i < 100; ++i) {
    const DualQuaternion q1 = from_pose(random_pose(rng));
    const DualQuaternion q2 = from_pose(random_pose(rng));
    const Vector8d d0 = sclerp(q1, q2, 0.0).to_vector() - q1.canonical().to_vector();
    const Vector8d d1 = sclerp(q1, q2, 1.0).to_vector() - q2.canonical().to_vector();
    endpoints = endpoints && d0.norm() <= 1e-12 && d1.norm() <= 1e-12;
  }
  const bool ok = max_t <= 1e-6 && max_r <= 1e-6 && endpoints;
  return {ok, fmt("1000 queries: max error %.2e m, %.2e rad; endpoints exact: ", max_t, max_r) +
                  (endpoints ? "yes" : "no")};
}

// 5. Randomized dual-quaternion identities against homogeneous matrices.
Outcome dq_algebra() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Pose p1 = random_pose(rng);
    const Pose p2 = random_pose(rng);
    const DualQuaternion a = from_pose(p1);
    const DualQuaternion b = from_pose(p2);
    // conjugate involution
    worst = std::max(worst, (a.conjugate().conjugate().to_vector() - a.to_vector()).norm());
    // q q* = |q|^2 as a dual scalar
    const DualQuaternion qq = a * a.conjugate();
    const DualScalar ns = a.norm_sq();
    Vector8d expect = Vector8d::Zero();
    expect[0] = ns.real;
    expect[4] = ns.dual;
    worst = std::max(worst, (qq.to_vector() - expect).norm());
    worst = std::max(worst, std::abs(ns.real - 1.0) + std::abs(ns.dual));
    // pose round trip
    const Pose r = to_pose(a);
    worst = std::max(worst, (r.matrix() - p1.matrix()).cwiseAbs().maxCoeff());
    // homomorphism vs matrix product
    const Pose prod = to_pose(a * b);
    worst = std::max(worst, (prod.matrix() - p1.matrix() * p2.matrix()).cwiseAbs().maxCoeff());
    // (ab)* = b* a*
    worst = std::max(worst, ((a * b).conjugate().to_vector() - (b.conjugate() * a.conjugate()).to_vector()).norm());
  }
  return {worst <= 1e-9, fmt("%.0f random cases, worst deviation %.2e", n, worst)};
}

// 6. Degeneracy flag on planar vs rich motion.
Outcome degeneracy_detection() {
  int planar_flagged = 0;
  int rich_ok = 0;
  double worst_planar = 0.0;
  double best_rich = INFINITY;
  for (int s = 1; s <= 10; ++s) {
    for (const TrajectoryKind kind : {TrajectoryKind::PlanarLoop, TrajectoryKind::Figure8_3D}) {
      RigSpec rig = default_rig();
      rig.seed = static_cast<std::uint64_t>(s);
      const TrajectorySpec traj{kind, 60.0, 20.0};
      const SynthOutput sim = generate(rig, traj);
      const CalibrationResult res = calibrate(sim, config_for(rig, traj));
      const double ratio = res.singular_values[5] / res.singular_values[4];
      if (kind == TrajectoryKind::PlanarLoop) {
        if (res.degeneracy == Degeneracy::NearPlanar) ++planar_flagged;
        worst_planar = std::max(worst_planar, ratio);
      } else {
        if (res.degeneracy == Degeneracy::WellConditioned) ++rich_ok;
        best_rich = std::min(best_rich, ratio);
      }
    }
  }
  return {planar_flagged == 10 && rich_ok == 10,
          fmt("PlanarLoop flagged %.0f/10 (max s6/s5 %.1e); Figure8_3D well conditioned %.0f/10 (min s6/s5 %.1e)",
              planar_flagged, worst_planar, rich_ok, best_rich)};
}

// 7. Curb verification: ground truth vs a 10 cm lateral perturbation.
Outcome verification_pipeline() {
  RigSpec rig = default_rig();
  const TrajectorySpec traj{TrajectoryKind::Figure8_3D, 120.0, 20.0};
  const SynthOutput sim = generate(rig, traj);
  VerifyScene scene{sim.features.observations, sim.base, rig.base_to_front};
  // 10 cm along the base y axis, expressed in the front frame
  const Eigen::Vector3d lateral_base(0.0, 0.10, 0.0);
  Pose perturbed = rig.extrinsic_fr;
  perturbed.translation += rig.base_to_front.rotation.conjugate().rotate(lateral_base);
  const FeatureMatchReport r = compare(perturbed, rig.extrinsic_fr, scene);
  const double p = r.p_value.value_or(1.0);
  const bool ok = r.rmse_after < r.rmse_before && r.p_value && p < 0.05 && r.segments_compared >= 20;
  return {ok, fmt("rmse before %.4f m, after %.2e m; improved %.0f", r.rmse_before, r.rmse_after,
                  r.segments_improved) +
                  fmt("/%.0f segments, p = %.2e", r.segments_compared, p)};
}

// 8. Umeyama closed form.
Outcome umeyama() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> count(3, 40);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Pose x = random_pose(rng);
    std::vector<Eigen::Vector3d> a;
    std::vector<Eigen::Vector3d> b;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      a.emplace_back(u(rng), u(rng), u(rng));
      b.push_back(x.transform_point(a.back()));
    }
    const RigidFit f = umeyama_fit(a, b);
    worst = std::max(worst, (f.pose().matrix() - x.matrix()).cwiseAbs().maxCoeff());
  }
  bool collinear_rejected = false;
  try {
    std::vector<Eigen::Vector3d> line;
    for (int i = 0; i < 10; ++i) line.emplace_back(1.0 + i, 2.0 + 2.0 * i, -0.5 * i);
    umeyama_fit(line, line);
  } catch (const Error& e) {
    collinear_rejected = e.code() == ErrorCode::DegenerateGeometry;
  }
  return {worst <= 1e-9 && collinear_rejected,
          fmt("1000 random rigid fits, worst deviation %.2e; collinear input rejected: ", worst) +
              (collinear_rejected ? "yes" : "no")};
}

// 9. Batch size does not change the noiseless solution.
Outcome batch_consistency() {
  RigSpec rig = default_rig();
  const TrajectorySpec traj{TrajectoryKind::Figure8_3D, 60.0, 20.0};
  const SynthOutput sim = generate(rig, traj);
  const AlignedPair pair = align(sim.front, sim.rear);
  const MotionSet motions = extract_motions(pair);
  std::vector<Vector8d> sols;
  for (const std::size_t b : {std::size_t{10}, std::size_t{50}, std::size_t{0}}) {
    SolveOptions o;
    o.batch_size = b;
    sols.push_back(solve(motions.pairs, o).extrinsic.to_vector());
  }
  const double d = std::max((sols[0] - sols[2]).norm(), (sols[1] - sols[2]).norm());
  return {d <= 1e-9, fmt("batch 10 / 50 / all on %.0f pairs: max difference %.2e", motions.pairs.size(), d)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exact recovery", exact_recovery},
      {"noise robustness", noise_robustness},
      {"APE/RPE improvement", ape_rpe_improvement},
      {"ScLERP correctness", sclerp_correctness},
      {"DQ algebra", dq_algebra},
      {"degeneracy detection", degeneracy_detection},
      {"verification pipeline", verification_pipeline},
      {"Umeyama", umeyama},
      {"batch consistency", batch_consistency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
