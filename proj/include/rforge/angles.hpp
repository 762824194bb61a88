#pragma once

#include <cmath>

namespace rforge {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Canonicalize an angle in degrees into [-180, 180).
inline double wrap_deg(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0)
    w += 360.0;
  return w - 180.0;
}

// Signed shortest-arc difference a - b, in [-180, 180).
inline double angle_diff_deg(double a, double b) { return wrap_deg(a - b); }

} // namespace rforge
