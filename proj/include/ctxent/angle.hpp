// Copyright 2026 The ctxent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <numbers>

namespace ctxent {

/// Plane angle. Degrees are the stored representation so that values read
/// from experiment files survive a render/parse cycle bit for bit.
class Angle {
 public:
  constexpr Angle() = default;

  static constexpr Angle degrees(double d) { return Angle(d); }
  static constexpr Angle radians(double r) { return Angle(r * 180.0 / std::numbers::pi); }

  constexpr double deg() const noexcept { return degrees_; }
  constexpr double rad() const noexcept { return degrees_ * std::numbers::pi / 180.0; }

  friend constexpr Angle operator+(Angle a, Angle b) { return Angle(a.degrees_ + b.degrees_); }
  friend constexpr Angle operator-(Angle a, Angle b) { return Angle(a.degrees_ - b.degrees_); }
  friend constexpr bool operator==(Angle, Angle) = default;

 private:
  constexpr explicit Angle(double d) : degrees_(d) {}
  double degrees_ = 0.0;
};

/// cos of an angle given in degrees; exact at multiples of 90°.
inline double cos_deg(double d) {
  double r = std::fmod(d, 360.0);
  if (r < 0.0) r += 360.0;
  if (r == 0.0) return 1.0;
  if (r == 90.0 || r == 270.0) return 0.0;
  if (r == 180.0) return -1.0;
  return std::cos(r * std::numbers::pi / 180.0);
}

/// Spin-1/2 Born rule for coplanar axes: probability of "up" along an axis
/// at angle `delta` from the current spin axis, cos²(Δ/2) = (1 + cos Δ)/2.
inline double spin_up_probability(Angle delta) { return 0.5 * (1.0 + cos_deg(delta.deg())); }

/// Malus law for a single photon: pass probability cos²(Δ) = (1 + cos 2Δ)/2.
inline double polarizer_pass_probability(Angle delta) {
  return 0.5 * (1.0 + cos_deg(2.0 * delta.deg()));
}

}  // namespace ctxent
