#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dqcalib/align_init.hpp"
#include "dqcalib/dq.hpp"
#include "dqcalib/interp.hpp"

namespace dqcalib {

constexpr double kDegree = 3.14159265358979323846 / 180.0;

/// Relative motions of the reference sensor (a) and the other sensor (b)
/// over the same interval. Both are canonical unit dual quaternions.
struct MotionPair {
  DualQuaternion a;
  DualQuaternion b;
  double t_start = 0.0;
  double t_end = 0.0;
  double rotation_angle = 0.0;  // radians, smaller of the two screw angles
};

struct ExtractOptions {
  double min_angle = 0.5 * kDegree;
  // Maximum |scalar(a) - scalar(b)| for the real and the dual part.
  double congruence_tol = 0.02;
  // Axis gate against a confident initial estimate; pairs rotating less
  // than gate_min_rotation are not gated because their axes are noisy.
  double gate_angle = 30.0 * kDegree;
  double gate_min_rotation = 2.0 * kDegree;
  std::size_t stride = 1;  // grid samples spanned by one motion pair
};

struct MotionSet {
  std::vector<MotionPair> pairs;
  std::size_t intervals = 0;
  std::size_t rejected_small_angle = 0;
  std::size_t rejected_congruence = 0;
  std::size_t rejected_gate = 0;
  std::vector<ScalarMismatch> mismatch;  // one per interval
};

/// Consecutive-interval motions a = P_a(i-1)^-1 P_a(i), b likewise. Drops
/// small rotations and pairs whose scalar parts disagree (they cannot be
/// the same screw). `init`, when confident, gates pairs whose rotation axes
/// disagree with it.
MotionSet extract_motions(const AlignedPair& pair, const ExtractOptions& options = {},
                          const std::optional<RigidFit>& init = std::nullopt);

using SMatrix = Eigen::Matrix<double, 6, 8>;

/// Constraint rows of a x - x b = 0 for x = (q_r, q_d):
///   [ va_r - vb_r | [va_r + vb_r]x |      0       |       0        ]
///   [ va_d - vb_d | [va_d + vb_d]x | va_r - vb_r  | [va_r + vb_r]x ]
/// where v(.) is the vector part.
SMatrix build_s_matrix(const MotionPair& m);

enum class Degeneracy { WellConditioned, NearPlanar, Insufficient };
std::string_view to_string(Degeneracy d);

struct SolveOptions {
  // Pairs per SVD batch; 0 solves the whole stack at once.
  std::size_t batch_size = 50;
  // NearPlanar when sigma_6 / sigma_5 of the stacked matrix falls below this.
  double degeneracy_threshold = 1e-3;
};

struct CalibrationResult {
  DualQuaternion extrinsic;  // maps sensor-b coordinates into sensor-a coordinates
  Pose pose;
  std::array<double, 8> singular_values{};  // of the whole stack, descending
  std::size_t pairs_used = 0;
  std::size_t batches_used = 0;
  double mean_residual = 0.0;  // mean |S_i x| over pairs
  Degeneracy degeneracy = Degeneracy::WellConditioned;
};

/// Stacks the S matrices, takes the two right singular vectors of the
/// smallest singular values and picks the unit, dual-orthogonal combination.
/// Batches are solved separately and averaged with weight 1/sigma_7^2. When
/// all screw axes are parallel the translation along them is unobservable;
/// the result is then flagged NearPlanar and carries the minimum-norm
/// translation along that axis.
///
/// Throws InsufficientMotion with fewer than two pairs or when every pair
/// shares one screw, NumericalFailure when the nullspace holds no unit dual
/// quaternion.
CalibrationResult solve(const std::vector<MotionPair>& pairs, const SolveOptions& options = {},
                        const std::optional<RigidFit>& init = std::nullopt);

/// T_B_R = T_B_F * T_F_R.
Pose express_in_base(const Pose& extrinsic_fr, const Pose& base_to_front);

}  // namespace dqcalib
