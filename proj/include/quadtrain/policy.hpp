#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include <Eigen/Core>

#include "quadtrain/gait.hpp"
#include "quadtrain/sim.hpp"

namespace quadtrain {

enum class ObservationVariant { Imu, ImuContacts, ImuForce };

inline constexpr std::array<ObservationVariant, 3> kAllVariants = {
    ObservationVariant::Imu, ObservationVariant::ImuContacts, ObservationVariant::ImuForce};

// Stable tags: "imu", "imu_contacts", "imu_force".
std::string_view variant_tag(ObservationVariant v);
// Throws ConfigError listing the valid tags.
ObservationVariant variant_from_tag(std::string_view tag);
int observation_dim(ObservationVariant v);

// Observation layout. IMU block is shared by all variants; contacts (4) or
// base-frame forces (12, legs FL FR BL BR, xyz each) follow at kExtra.
namespace obs_index {
inline constexpr int kRoll = 0;
inline constexpr int kPitch = 1;
inline constexpr int kOmega = 2;   // 3 entries
inline constexpr int kNu = 5;      // 3 entries
inline constexpr int kPhase = 8;   // 4 entries
inline constexpr int kExtra = 12;
}  // namespace obs_index

inline constexpr int kActionDim = 14;

// Action layout: [clearance, penetration, FL dx dy dz, FR ..., BL ..., BR ...].
namespace action_index {
inline constexpr int kClearance = 0;
inline constexpr int kPenetration = 1;
inline constexpr int kDeltas = 2;
}  // namespace action_index

struct ActionBounds {
  double clearance_max = 0.06;
  double penetration_max = 0.02;
  double delta_max = 0.03;
};

struct ActionVector {
  double clearance = 0.0;
  double penetration = 0.0;
  std::array<Vec3, 4> deltas{};

  bool operator==(const ActionVector&) const = default;
};

ActionVector clip_action(const ActionVector& a, const ActionBounds& bounds = {});

class PolicyMatrix {
 public:
  explicit PolicyMatrix(ObservationVariant variant);
  // Throws ContractViolation when the shape does not match the variant or an
  // entry is not finite.
  PolicyMatrix(ObservationVariant variant, Eigen::MatrixXd weights);

  ObservationVariant variant() const { return variant_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  int obs_dim() const { return static_cast<int>(weights_.rows()); }

  bool operator==(const PolicyMatrix& o) const {
    return variant_ == o.variant_ && weights_ == o.weights_;
  }

 private:
  ObservationVariant variant_;
  Eigen::MatrixXd weights_;
};

// Any sensor record exposing the SensorReadings members by name.
template <typename T>
concept SensorRecord = requires(const T& s) {
  s.imu.roll;
  s.imu.pitch;
  s.imu.omega;
  s.imu.nu;
  s.contact[0];
  s.f_base[0];
};

// Forces are divided by `weight` before insertion; phases go in raw.
template <SensorRecord T>
Eigen::VectorXd build_observation(ObservationVariant variant, const T& sensors,
                                  const GaitPhase& phase, double weight) {
  using namespace obs_index;
  Eigen::VectorXd o = Eigen::VectorXd::Zero(observation_dim(variant));
  o[kRoll] = sensors.imu.roll;
  o[kPitch] = sensors.imu.pitch;
  o.segment<3>(kOmega) = sensors.imu.omega;
  o.segment<3>(kNu) = sensors.imu.nu;
  for (int i = 0; i < 4; ++i) o[kPhase + i] = phase.phase[i];
  if (variant == ObservationVariant::ImuContacts) {
    for (int i = 0; i < 4; ++i) o[kExtra + i] = sensors.contact[i];
  } else if (variant == ObservationVariant::ImuForce) {
    for (int i = 0; i < 4; ++i) o.segment<3>(kExtra + 3 * i) = sensors.f_base[i] / weight;
  }
  return o;
}

// obs^T * W. Throws ContractViolation on a dimension mismatch.
Eigen::VectorXd raw_action(const PolicyMatrix& policy, const Eigen::VectorXd& obs);

// tanh squashing of raw outputs into the action ranges: zero raw maps to
// mid-range clearance/penetration and zero deltas.
ActionVector squash_action(const Eigen::VectorXd& raw, const ActionBounds& bounds = {});

ActionVector act(const PolicyMatrix& policy, const Eigen::VectorXd& obs,
                 const ActionBounds& bounds = {});

// Text format: "obs_dim act_dim tag" then obs_dim rows of 14 shortest
// round-trip decimals.
void write_policy(std::ostream& out, const PolicyMatrix& policy);
PolicyMatrix read_policy(std::istream& in);
void save_policy(const PolicyMatrix& policy, const std::filesystem::path& path);
PolicyMatrix load_policy(const std::filesystem::path& path);

}  // namespace quadtrain
