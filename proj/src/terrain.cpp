#include "quadtrain/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "quadtrain/errors.hpp"

namespace quadtrain {

namespace {
constexpr double kUpStart = 1.0;
constexpr double kDownStart = 1.5;
constexpr double kDownEnd = 2.0;
}  // namespace

std::string_view to_string(SlopeDirection d) {
  return d == SlopeDirection::Up ? "up" : "down";
}

SlopeDirection slope_direction_from_string(std::string_view s) {
  if (s == "up") return SlopeDirection::Up;
  if (s == "down") return SlopeDirection::Down;
  throw ConfigError("slope direction must be 'up' or 'down', got '" + std::string(s) + "'");
}

Terrain Terrain::flat() { return Terrain{}; }

Terrain Terrain::incline(double angle) {
  if (!(std::abs(angle) < M_PI / 4)) throw DomainError("incline angle must satisfy |angle| < 45 deg");
  Terrain t;
  t.kind_ = Kind::Incline;
  t.angle_ = angle;
  return t;
}

Terrain generate_rough_terrain(double max_height, double cell, std::uint64_t seed) {
  if (!(max_height >= 0.0)) throw DomainError("rough terrain max_height must be >= 0");
  if (!(cell > 0.0)) throw DomainError("rough terrain cell must be > 0");
  Terrain t;
  if (max_height == 0.0) return t;
  t.kind_ = Terrain::Kind::Rough;
  t.max_height_ = max_height;
  t.cell_ = cell;
  t.nx_ = static_cast<int>(std::ceil((Terrain::kGridMaxX - Terrain::kGridMinX) / cell)) + 1;
  t.ny_ = static_cast<int>(std::ceil(2.0 * Terrain::kGridHalfWidthY / cell)) + 1;
  t.nodes_.resize(static_cast<std::size_t>(t.nx_) * t.ny_);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, max_height);
  for (double& h : t.nodes_) h = dist(rng);
  return t;
}

Terrain make_slope_course(double angle, SlopeDirection direction) {
  if (!(std::abs(angle) < M_PI / 4)) throw DomainError("slope angle must satisfy |angle| < 45 deg");
  Terrain t;
  t.kind_ = Terrain::Kind::SlopeCourse;
  t.angle_ = angle;
  t.direction_ = direction;
  return t;
}

double Terrain::course_slope(double x) const {
  const double g = std::tan(angle_);
  if (direction_ == SlopeDirection::Up) return x >= kUpStart ? g : 0.0;
  return (x >= kDownStart && x < kDownEnd) ? -g : 0.0;
}

double Terrain::height(double x, double y) const {
  switch (kind_) {
    case Kind::Flat:
      return 0.0;
    case Kind::Incline:
      return x * std::tan(angle_);
    case Kind::SlopeCourse: {
      const double g = std::tan(angle_);
      if (direction_ == SlopeDirection::Up) return x > kUpStart ? (x - kUpStart) * g : 0.0;
      if (x <= kDownStart) return 0.0;
      return -(std::min(x, kDownEnd) - kDownStart) * g;
    }
    case Kind::Rough: {
      const double gx = std::clamp((x - kGridMinX) / cell_, 0.0, nx_ - 1.0);
      const double gy = std::clamp((y + kGridHalfWidthY) / cell_, 0.0, ny_ - 1.0);
      const int i = std::min(static_cast<int>(gx), nx_ - 2);
      const int j = std::min(static_cast<int>(gy), ny_ - 2);
      const double u = gx - i, v = gy - j;
      const auto at = [&](int ii, int jj) { return nodes_[static_cast<std::size_t>(jj) * nx_ + ii]; };
      return (1 - u) * (1 - v) * at(i, j) + u * (1 - v) * at(i + 1, j) +
             (1 - u) * v * at(i, j + 1) + u * v * at(i + 1, j + 1);
    }
  }
  return 0.0;
}

std::array<double, 2> Terrain::gradient(double x, double y) const {
  switch (kind_) {
    case Kind::Flat:
      return {0.0, 0.0};
    case Kind::Incline:
      return {std::tan(angle_), 0.0};
    case Kind::SlopeCourse:
      return {course_slope(x), 0.0};
    case Kind::Rough: {
      const double rx = (x - kGridMinX) / cell_;
      const double ry = (y + kGridHalfWidthY) / cell_;
      // Outside the grid the surface is extended flat.
      const bool in_x = rx >= 0.0 && rx <= nx_ - 1.0;
      const bool in_y = ry >= 0.0 && ry <= ny_ - 1.0;
      const double gx = std::clamp(rx, 0.0, nx_ - 1.0);
      const double gy = std::clamp(ry, 0.0, ny_ - 1.0);
      const int i = std::min(static_cast<int>(gx), nx_ - 2);
      const int j = std::min(static_cast<int>(gy), ny_ - 2);
      const double u = gx - i, v = gy - j;
      const auto at = [&](int ii, int jj) { return nodes_[static_cast<std::size_t>(jj) * nx_ + ii]; };
      const double dhdu = (1 - v) * (at(i + 1, j) - at(i, j)) + v * (at(i + 1, j + 1) - at(i, j + 1));
      const double dhdv = (1 - u) * (at(i, j + 1) - at(i, j)) + u * (at(i + 1, j + 1) - at(i + 1, j));
      return {in_x ? dhdu / cell_ : 0.0, in_y ? dhdv / cell_ : 0.0};
    }
  }
  return {0.0, 0.0};
}

Vec3 Terrain::normal(double x, double y) const {
  const auto g = gradient(x, y);
  return Vec3(-g[0], -g[1], 1.0).normalized();
}

}  // namespace quadtrain
