#include "quadtrain/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quadtrain/errors.hpp"

namespace quadtrain {

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

bool RigidTransform::is_proper(double tol) const {
  const Mat3 gram = rotation_.transpose() * rotation_;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation_.determinant() - 1.0) <= tol;
}

Mat3 rotation_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rotation_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rotation_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

std::string_view leg_name(LegId leg) {
  switch (leg) {
    case LegId::FL: return "FL";
    case LegId::FR: return "FR";
    case LegId::BL: return "BL";
    case LegId::BR: return "BR";
  }
  return "?";
}

Vec3 LegGeometry::hip_offset(LegId leg) const {
  const double x = is_front(leg) ? 0.5 * body_length : -0.5 * body_length;
  return {x, side_sign(leg) * 0.5 * body_width, 0.0};
}

double LegGeometry::reach() const {
  const double planar = upper_leg + lower_leg;
  return std::sqrt(abduction_link * abduction_link + planar * planar);
}

void LegGeometry::validate() const {
  if (!(body_length > 0 && body_width > 0 && abduction_link > 0 && upper_leg > 0 &&
        lower_leg > 0)) {
    throw ConfigError("leg geometry: all lengths must be > 0");
  }
  if (!(joint_limit > 0)) throw ConfigError("leg geometry: joint_limit must be > 0");
}

RigidTransform base_from_hip(LegId leg, double hip_angle, const LegGeometry& geom) {
  return {rotation_x(hip_angle), geom.hip_offset(leg)};
}

RigidTransform hip_from_upper_leg(LegId leg, double shoulder_angle,
                                  const LegGeometry& geom) {
  return {rotation_y(shoulder_angle), Vec3(0.0, geom.side_sign(leg) * geom.abduction_link, 0.0)};
}

RigidTransform upper_from_lower_leg(double knee_angle, const LegGeometry& geom) {
  return {rotation_y(knee_angle), Vec3(0.0, 0.0, -geom.upper_leg)};
}

RigidTransform lower_leg_from_foot_joint(const LegGeometry& geom) {
  return RigidTransform::Translation(Vec3(0.0, 0.0, -geom.lower_leg));
}

RigidTransform leg_chain_transform_unchecked(LegId leg, const LegJointAngles& angles,
                                             const LegGeometry& geom) {
  return base_from_hip(leg, angles.hip, geom) *
         hip_from_upper_leg(leg, angles.shoulder, geom) *
         upper_from_lower_leg(angles.knee, geom) * lower_leg_from_foot_joint(geom);
}

namespace {

void check_limit(LegId leg, const char* joint, double value, double limit) {
  if (!std::isfinite(value) || std::abs(value) > limit) {
    std::ostringstream msg;
    msg << leg_name(leg) << " " << joint << " angle " << value
        << " rad outside joint limit +/-" << limit;
    throw DomainError(msg.str());
  }
}

}  // namespace

RigidTransform leg_chain_transform(LegId leg, const LegJointAngles& angles,
                                   const LegGeometry& geom) {
  check_limit(leg, "hip", angles.hip, geom.joint_limit);
  check_limit(leg, "shoulder", angles.shoulder, geom.joint_limit);
  check_limit(leg, "knee", angles.knee, geom.joint_limit);
  return leg_chain_transform_unchecked(leg, angles, geom);
}

Vec3 foot_position_hip_frame(LegId leg, const LegJointAngles& angles,
                             const LegGeometry& geom) {
  return leg_chain_transform_unchecked(leg, angles, geom).translation() -
         geom.hip_offset(leg);
}

Vec3 reported_joint_reaction(const RigidTransform& chain, const Vec3& ground_force_base) {
  return -(chain.rotation().transpose() * ground_force_base);
}

Vec3 grf_to_base_frame(const Vec3& f_joint, const RigidTransform& chain) {
  return chain.apply_vector(f_joint);
}

int contact_from_force(const Vec3& force, double threshold) {
  if (!(threshold > 0.0)) {
    throw ConfigError("contact threshold must be > 0, got " + std::to_string(threshold));
  }
  return force.norm() > threshold ? 1 : 0;
}

IkResult leg_inverse_kinematics(LegId leg, const Vec3& foot_target_hip,
                                const LegGeometry& geom) {
  IkResult result;
  const double a = geom.abduction_link;
  const double l1 = geom.upper_leg;
  const double l2 = geom.lower_leg;
  const double planar_max = l1 + l2;
  const double planar_min = std::abs(l1 - l2);

  Vec3 p = foot_target_hip;
  const double max_radius = std::sqrt(a * a + planar_max * planar_max);
  if (p.norm() > max_radius) {
    p *= max_radius / p.norm();
    result.clamped = true;
  }

  // Abduction plane: (y, z) = Rx(hip) * (side * a, z_plane), z_plane <= 0.
  double yz = std::hypot(p.y(), p.z());
  if (yz < a) {
    // Inside the cylinder swept by the abduction link; push outward.
    const double scale = yz > 0.0 ? a / yz : 0.0;
    if (scale > 0.0) {
      p.y() *= scale;
      p.z() *= scale;
    } else {
      p.y() = geom.side_sign(leg) * a;
    }
    yz = a;
    result.clamped = true;
  }
  const double side_a = geom.side_sign(leg) * a;
  double z_plane = -std::sqrt(std::max(0.0, yz * yz - a * a));
  double x = p.x();

  // Planar two-link reach; after the radial clamp only rounding can exceed it.
  double r = std::hypot(x, z_plane);
  if (r > planar_max || r < planar_min) {
    const double target_r = std::clamp(r, planar_min, planar_max);
    if (r > 0.0) {
      x *= target_r / r;
      z_plane *= target_r / r;
    }
    if (std::abs(target_r - r) > 1e-12) result.clamped = true;
    r = target_r;
  }

  const double hip = std::atan2(p.z(), p.y()) - std::atan2(z_plane, side_a);
  const double cos_knee =
      std::clamp((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double knee = std::acos(cos_knee);
  const double alpha = std::atan2(-x, -z_plane);
  const double beta = std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));

  result.angles.hip = std::remainder(hip, 2.0 * M_PI);
  result.angles.shoulder = std::remainder(alpha - beta, 2.0 * M_PI);
  result.angles.knee = knee;
  return result;
}

Vec3 neutral_foot_hip_frame(LegId leg, const LegGeometry& geom, double stand_height) {
  return {0.0, geom.side_sign(leg) * geom.abduction_link, -stand_height};
}

}  // namespace quadtrain
