#pragma once

#include <cmath>
#include <vector>

namespace seglabel {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double squared_norm(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(squared_norm(a)); }

inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  return n > 0.0 ? a / n : Vec3{0.0, 0.0, 0.0};
}

inline double squared_distance(const Vec3& a, const Vec3& b) { return squared_norm(a - b); }
inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(squared_distance(a, b)); }

inline Vec3 rotate_z(const Vec3& v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline Vec2 horizontal(const Vec3& v) { return {v.x, v.y}; }

// Convex hull of 2D points (monotone chain), counter-clockwise, no duplicate
// endpoint. Degenerate inputs yield hulls of size 0, 1 or 2.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts);

// Largest pairwise distance among the given points (0 for < 2 points).
double max_pairwise_distance(const std::vector<Vec2>& pts);

// Distance from p to the boundary of the hull polygon (min over edges). For a
// hull of one point this is the distance to that point; empty hull -> 0.
double distance_to_hull_boundary(const Vec2& p, const std::vector<Vec2>& hull);

}  // namespace seglabel
