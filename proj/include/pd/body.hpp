#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "pd/geometry.hpp"

namespace pd {

inline constexpr int kNumParts = 24;
inline constexpr int kNumJoints = 24;
inline constexpr int kPelvisJoint = 0;

struct Joint {
  int parent = -1;          // -1 for the root
  Vec3 offset = Vec3::Zero();  // rest offset from the parent, meters
  std::string name;
};

struct Skeleton {
  std::vector<Joint> joints;

  /// Rest-pose global joint positions (forward kinematics with identity
  /// rotations). Uses the same accumulation as pose_body so the identity
  /// pose reproduces rest vertices bitwise.
  std::vector<Vec3> rest_positions() const;

  void validate() const;
};

struct SkinWeight {
  int joint = 0;
  double weight = 0.0;
};

/// Self-contained articulated test body: mesh, part labels, UV atlas,
/// skeleton and skinning weights. Immutable after construction.
struct ArticulatedBody {
  std::vector<Vec3> vertices;  // rest pose, meters
  std::vector<std::array<int, 3>> faces;
  std::vector<int> part_id;  // per vertex, in [0, kNumParts)
  std::vector<Vec2> uv;      // per vertex, in [0,1]^2
  Skeleton skeleton;
  std::vector<std::vector<SkinWeight>> skin_weights;  // per vertex, sums to 1

  int part_count() const;
  void validate() const;
};

/// Sparse joints-from-vertices map; each row is non-negative and sums to 1.
struct JointRegressor {
  int num_joints = 0;
  int num_vertices = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;  // (vertex, weight)

  void validate() const;
};

struct Pose {
  std::vector<Eigen::Quaterniond> rotations;  // unit, one per joint
  Vec3 root_translation = Vec3::Zero();

  static Pose identity(int num_joints);
  void validate() const;
};

struct BodyConfig {
  int radial_segments = 8;  // vertices per capsule ring
  int axial_segments = 3;   // rings per capsule minus one
  double scale = 1.0;       // uniform size multiplier
};

struct DefaultBody {
  ArticulatedBody body;
  JointRegressor regressor;
};

/// Procedural capsule-limb humanoid, ~1.7 m tall, pelvis at the origin,
/// one capsule per part, vertices rigidly bound to their bone's joint.
DefaultBody build_default_body(const BodyConfig& config = {});

/// Linear blend skinning. Identity pose returns rest vertices bitwise.
std::vector<Vec3> pose_body(const ArticulatedBody& body, const Pose& pose);

/// Global joint positions under a pose.
std::vector<Vec3> joint_positions(const ArticulatedBody& body,
                                  const Pose& pose);

/// joints = regressor * vertices.
std::vector<Vec3> regress_joints(const JointRegressor& regressor,
                                 std::span<const Vec3> vertices);

/// OBJ subset (v/f lines) plus a sidecar JSON with part ids, UVs, skin
/// weights, the regressor and the skeleton.
void save_body(const ArticulatedBody& body, const JointRegressor& regressor,
               const std::string& obj_path, const std::string& sidecar_path);
DefaultBody load_body(const std::string& obj_path,
                      const std::string& sidecar_path);

}  // namespace pd
