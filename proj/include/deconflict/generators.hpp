#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "deconflict/aircraft.hpp"
#include "deconflict/errors.hpp"
#include "deconflict/rng.hpp"

namespace deconflict {

/// Circle benchmark: n aircraft evenly spaced on a circle, all flying toward
/// its center at the same speed, so every pair is in initial conflict.
inline ProblemInstance generate_cp(int n, double d_nm = 5.0,
                                   double radius_nm = 200.0,
                                   double speed_kn = 500.0) {
  if (n < 2) throw InputError("circle instances need at least 2 aircraft");
  ProblemInstance inst;
  inst.kind = "CP";
  inst.d_nm = d_nm;
  inst.params.n = n;
  inst.params.radius_nm = radius_nm;
  inst.params.speed_kn = speed_kn;
  inst.aircraft.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double alpha = 2.0 * std::numbers::pi * k / n;
    AircraftState a;
    a.id = k;
    a.position = {radius_nm * std::cos(alpha), radius_nm * std::sin(alpha)};
    a.speed_kn = speed_kn;
    a.heading_rad = wrap_angle(alpha + std::numbers::pi);
    inst.aircraft.push_back(a);
  }
  inst.validate();
  return inst;
}

/// Random circle benchmark: positions uniform on the circumference (rejected
/// until at least d from everyone already placed), headings toward the center
/// plus a uniform jitter, speeds uniform in [speed_min, speed_max].
///
/// Aircraft k draws only from substream k of `seed`, in the fixed order
/// position angle (one draw per rejection retry), then heading jitter, then
/// speed. Each aircraft gets a 10000-retry placement budget; exhausting it
/// raises GenerationFailureError.
inline ProblemInstance generate_rcp(int n, std::uint64_t seed,
                                    double d_nm = 5.0,
                                    const GeneratorParams& params = {}) {
  if (n < 2) throw InputError("circle instances need at least 2 aircraft");
  ProblemInstance inst;
  inst.kind = "RCP";
  inst.d_nm = d_nm;
  inst.seed = seed;
  inst.params = params;
  inst.params.n = n;
  inst.aircraft.reserve(n);
  constexpr int kPlacementBudget = 10000;
  for (int k = 0; k < n; ++k) {
    PortableRng rng(substream_seed(seed, static_cast<std::uint64_t>(k)));
    Vec2 pos;
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementBudget && !placed; ++attempt) {
      const double alpha = rng.uniform(0.0, 2.0 * std::numbers::pi);
      pos = {inst.params.radius_nm * std::cos(alpha),
             inst.params.radius_nm * std::sin(alpha)};
      placed = true;
      for (const AircraftState& other : inst.aircraft)
        if (norm(pos - other.position) < d_nm) {
          placed = false;
          break;
        }
    }
    if (!placed)
      throw GenerationFailureError(
          "could not place aircraft " + std::to_string(k) + " within " +
          std::to_string(kPlacementBudget) + " attempts");
    const double jitter = rng.uniform(-inst.params.heading_jitter_rad,
                                      inst.params.heading_jitter_rad);
    AircraftState a;
    a.id = k;
    a.position = pos;
    a.heading_rad =
        wrap_angle(std::atan2(-pos.y, -pos.x) + jitter);  // center-bound
    a.speed_kn = rng.uniform(inst.params.speed_min_kn, inst.params.speed_max_kn);
    inst.aircraft.push_back(a);
  }
  inst.validate();
  return inst;
}

}  // namespace deconflict
