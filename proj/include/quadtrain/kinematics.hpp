#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace quadtrain {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rotation + translation mapping coordinates expressed in a child frame into
// its parent frame: p_parent = rotation * p_child + translation.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform Identity() { return {}; }
  static RigidTransform Translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static RigidTransform Rotation(const Mat3& r) { return {r, Vec3::Zero()}; }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  // (this * other) maps other's child frame into this transform's parent.
  RigidTransform operator*(const RigidTransform& other) const {
    return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
  }

  RigidTransform inverse() const {
    const Mat3 rt = rotation_.transpose();
    return {rt, -rt * translation_};
  }

  Vec3 apply_point(const Vec3& p) const { return rotation_ * p + translation_; }
  // Free vectors (forces, velocities) only see the rotation.
  Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }

  Eigen::Matrix4d homogeneous() const;

  // Rotation in SO(3) within `tol` (orthonormal, det = +1).
  bool is_proper(double tol = 1e-9) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);
Mat3 rotation_z(double angle);

enum class LegId { FL = 0, FR = 1, BL = 2, BR = 3 };

inline constexpr std::array<LegId, 4> kAllLegs = {LegId::FL, LegId::FR, LegId::BL,
                                                 LegId::BR};

constexpr int leg_index(LegId leg) { return static_cast<int>(leg); }
constexpr bool is_left(LegId leg) { return leg == LegId::FL || leg == LegId::BL; }
constexpr bool is_front(LegId leg) { return leg == LegId::FL || leg == LegId::FR; }
std::string_view leg_name(LegId leg);

struct LegJointAngles {
  double hip = 0.0;       // abduction, about the base x axis
  double shoulder = 0.0;  // about the hip-frame y axis
  double knee = 0.0;      // about the upper-leg y axis
};

// Body and link dimensions. Hip mounts sit at the corners of a
// body_length x body_width rectangle in the base frame. The abduction link
// points outward (+y on left legs, -y on right legs); upper and lower leg
// hang along -z at zero angles.
struct LegGeometry {
  double body_length = 0.25;
  double body_width = 0.14;
  double abduction_link = 0.035;
  double upper_leg = 0.10;
  double lower_leg = 0.10;
  double joint_limit = 2.0;  // symmetric, rad

  Vec3 hip_offset(LegId leg) const;
  double side_sign(LegId leg) const { return is_left(leg) ? 1.0 : -1.0; }
  // Largest distance from the hip mount to the foot joint.
  double reach() const;
  void validate() const;
};

// Individual links of the chain. Each maps the named child frame into its
// parent; their product is the joint-to-base transform.
RigidTransform base_from_hip(LegId leg, double hip_angle, const LegGeometry& geom);
RigidTransform hip_from_upper_leg(LegId leg, double shoulder_angle,
                                  const LegGeometry& geom);
RigidTransform upper_from_lower_leg(double knee_angle, const LegGeometry& geom);
RigidTransform lower_leg_from_foot_joint(const LegGeometry& geom);

// Base <- foot-joint transform. Throws DomainError naming the joint when an
// angle is outside [-joint_limit, joint_limit].
RigidTransform leg_chain_transform(LegId leg, const LegJointAngles& angles,
                                   const LegGeometry& geom);

// Same chain without the limit check.
RigidTransform leg_chain_transform_unchecked(LegId leg, const LegJointAngles& angles,
                                             const LegGeometry& geom);

// Foot-joint position relative to the hip mount, in base-aligned axes
// ("hip frame" for IK targets).
Vec3 foot_position_hip_frame(LegId leg, const LegJointAngles& angles,
                             const LegGeometry& geom);

// Force reported by the fixed foot joint: the lower leg's action on the
// joint, in the joint frame. `ground_force_base` is the ground reaction on the
// foot expressed in the base frame.
Vec3 reported_joint_reaction(const RigidTransform& chain, const Vec3& ground_force_base);

// Flip of the reported reaction into the ground reaction force, joint frame.
inline Vec3 ground_reaction_joint_frame(const Vec3& reported) { return -reported; }

// F_l = R_j * f_joint. Rotation only; forces are free vectors.
Vec3 grf_to_base_frame(const Vec3& f_joint, const RigidTransform& chain);

// 1 when |F| > threshold, else 0. Throws ConfigError for threshold <= 0.
int contact_from_force(const Vec3& force, double threshold);

struct IkResult {
  LegJointAngles angles;
  bool clamped = false;
};

// Closed-form 3-DOF IK for a target relative to the hip mount. Single branch:
// foot below the shoulder in the abduction plane, knee angle >= 0.
// Unreachable targets are pulled radially onto the workspace boundary and
// flagged. Angles are not limited here; callers saturate commands.
IkResult leg_inverse_kinematics(LegId leg, const Vec3& foot_target_hip,
                                const LegGeometry& geom);

// Neutral stance foot target in the hip frame for a given standing height.
Vec3 neutral_foot_hip_frame(LegId leg, const LegGeometry& geom, double stand_height);

}  // namespace quadtrain
