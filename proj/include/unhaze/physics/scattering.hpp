#pragma once

#include <array>
#include <cstdint>

#include "unhaze/core/rng.hpp"
#include "unhaze/core/types.hpp"

namespace unhaze {

// Global atmospheric light. Channels must sit in [0.6, 1.0] with a spread of
// at most 0.1 so synthetic haze stays plausibly neutral.
struct Airlight {
  std::array<double, 3> value{1.0, 1.0, 1.0};
};

void require_valid(const Airlight& a);

struct HazeSynthesisConfig {
  double beta_min = 0.3;        // scattering coefficient per unit depth
  double beta_max = 1.5;
  double airlight_min = 0.8;    // base airlight range
  double airlight_max = 1.0;
  double airlight_jitter = 0.025;  // per-channel chroma jitter, at most 0.05
  std::uint64_t seed = 0;
};

void require_valid(const HazeSynthesisConfig& cfg);

// Forward haze composition p = j*t + a*(1-t), clamped to [0,1].
Image compose(const Image& scene, const Transmission& t, const Airlight& a);

// Simplified model with unit airlight: p = j*t + (1-t).
Image compose_simplified(const Image& scene, const Transmission& t);

// Analytic inversion of the simplified model: j = (p - 1 + t)/t, clamped to
// [0,1]. Requires t >= t_floor everywhere.
Image invert_exact(const Image& hazy, const Transmission& t,
                   double t_floor = kTransmissionFloor);

// Beer-Lambert: t = max(exp(-beta*d), t_floor). Depth must be non-negative.
Transmission transmission_from_depth(const Plane& depth, double beta,
                                     double t_floor = kTransmissionFloor);

// Rescales an arbitrary non-negative depth map to [0,1] (max maps to 1;
// all-zero maps stay zero).
Plane normalized_depth(const Plane& depth);

struct SyntheticSample {
  Image hazy;       // composed, clamped, not quantized
  Transmission t;
  Airlight airlight;
  double beta = 0.0;
};

// Draws beta and a jittered airlight from (cfg.seed, image_index), normalizes
// the depth map, and composes the hazy observation. Deterministic per call.
SyntheticSample synthesize_pair(const Image& scene, const Plane& depth,
                                const HazeSynthesisConfig& cfg, std::uint64_t image_index);

}  // namespace unhaze
