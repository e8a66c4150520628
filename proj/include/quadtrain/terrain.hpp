#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "quadtrain/kinematics.hpp"

namespace quadtrain {

enum class SlopeDirection { Up, Down };

std::string_view to_string(SlopeDirection d);
SlopeDirection slope_direction_from_string(std::string_view s);

// Ground surface z = h(x, y) with outward unit normal n(x, y).
class Terrain {
 public:
  enum class Kind { Flat, Rough, Incline, SlopeCourse };

  static Terrain flat();
  // Uniform incline rising along +x: h = x * tan(angle).
  static Terrain incline(double angle);

  Kind kind() const { return kind_; }
  double height(double x, double y) const;
  Vec3 normal(double x, double y) const;

  // Heightfield access (Rough only).
  double max_height() const { return max_height_; }
  double cell() const { return cell_; }
  const std::vector<double>& nodes() const { return nodes_; }

  // Slope parameters (Incline / SlopeCourse only).
  double slope_angle() const { return angle_; }
  SlopeDirection slope_direction() const { return direction_; }

  friend Terrain generate_rough_terrain(double max_height, double cell, std::uint64_t seed);
  friend Terrain make_slope_course(double angle, SlopeDirection direction);

  // Grid extent used for rough terrain, base-start at the origin.
  static constexpr double kGridMinX = -5.0;
  static constexpr double kGridMaxX = 125.0;
  static constexpr double kGridHalfWidthY = 20.0;

 private:
  // dh/dx and dh/dy.
  std::array<double, 2> gradient(double x, double y) const;
  double course_slope(double x) const;

  Kind kind_ = Kind::Flat;
  double max_height_ = 0.0;
  double cell_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> nodes_;  // row-major, ny_ rows of nx_
  double angle_ = 0.0;
  SlopeDirection direction_ = SlopeDirection::Up;
};

// Heightfield with nodes i.i.d. uniform in [0, max_height], bilinear between
// nodes. Deterministic per seed. max_height == 0 gives flat ground.
Terrain generate_rough_terrain(double max_height, double cell, std::uint64_t seed);

// Up: flat for x < 1, rising at `angle` after. Down: flat to x = 1.5, falling
// at `angle` to x = 2, flat after. Requires |angle| < pi/4.
Terrain make_slope_course(double angle, SlopeDirection direction);

}  // namespace quadtrain
