#pragma once

#include <cmath>

namespace dgssa {

/// Continuous 2-D position in pixel units. Pixel (i, j) covers [i, i+1) x [j, j+1).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm_sq(Point2 p) { return dot(p, p); }
inline double norm(Point2 p) { return std::sqrt(norm_sq(p)); }
inline double distance_sq(Point2 a, Point2 b) { return norm_sq(a - b); }
inline double distance(Point2 a, Point2 b) { return std::sqrt(distance_sq(a, b)); }

inline Point2 pixel_center(int px, int py) { return {px + 0.5, py + 0.5}; }

}  // namespace dgssa
