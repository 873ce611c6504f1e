#pragma once

#include <cmath>

namespace karman {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Vec2 operator-(Vec2 a) { return {-a.x1, -a.x2}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x1, c * a.x2}; }
inline Vec2 &operator+=(Vec2 &a, Vec2 b) {
  a.x1 += b.x1;
  a.x2 += b.x2;
  return a;
}
inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x1, a.x2); }

/// (a,b)^perp = (b,-a), so that v = perp(grad psi).
inline Vec2 perp(Vec2 a) { return {a.x2, -a.x1}; }

} // namespace karman
