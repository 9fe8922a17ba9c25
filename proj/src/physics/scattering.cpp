#include "unhaze/physics/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "unhaze/core/error.hpp"

namespace unhaze {

void require_valid(const Airlight& a) {
  const auto [lo, hi] = std::minmax_element(a.value.begin(), a.value.end());
  if (*lo < 0.6 || *hi > 1.0) throw ConfigError("airlight channels must lie in [0.6, 1.0]");
  if (*hi - *lo > 0.1 + 1e-12) throw ConfigError("airlight channel spread must be <= 0.1");
}

void require_valid(const HazeSynthesisConfig& cfg) {
  if (!(cfg.beta_min > 0.0) || cfg.beta_min > cfg.beta_max) {
    throw ConfigError("need 0 < beta_min <= beta_max");
  }
  if (cfg.airlight_min < 0.6 || cfg.airlight_max > 1.0 ||
      cfg.airlight_min > cfg.airlight_max) {
    throw ConfigError("airlight range must sit inside [0.6, 1.0]");
  }
  if (cfg.airlight_jitter < 0.0 || 2.0 * cfg.airlight_jitter > 0.1) {
    throw ConfigError("airlight jitter must sit in [0, 0.05]");
  }
}

Image compose(const Image& scene, const Transmission& t, const Airlight& a) {
  require_same_shape(scene, t);
  require_valid(a);
  Image out;
  out.planes.reserve(scene.planes.size());
  for (int c = 0; c < scene.channels(); ++c) {
    out.planes.push_back(
        clamped01(Plane(scene[c] * t.map + a.value[static_cast<size_t>(c)] * (1.0 - t.map))));
  }
  return out;
}

Image compose_simplified(const Image& scene, const Transmission& t) {
  require_same_shape(scene, t);
  Image out;
  out.planes.reserve(scene.planes.size());
  for (int c = 0; c < scene.channels(); ++c) {
    out.planes.push_back(clamped01(Plane(scene[c] * t.map + (1.0 - t.map))));
  }
  return out;
}

Image invert_exact(const Image& hazy, const Transmission& t, double t_floor) {
  require_same_shape(hazy, t);
  if ((t.map < t_floor - 1e-12).any()) {
    throw ShapeError("transmission below floor; inversion would be unstable");
  }
  Image out;
  out.planes.reserve(hazy.planes.size());
  for (int c = 0; c < hazy.channels(); ++c) {
    out.planes.push_back(clamped01(Plane((hazy[c] - 1.0 + t.map) / t.map)));
  }
  return out;
}

Transmission transmission_from_depth(const Plane& depth, double beta, double t_floor) {
  if ((depth < 0.0).any()) throw ShapeError("depth map must be non-negative");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  return Transmission{(-beta * depth).exp().max(t_floor)};
}

Plane normalized_depth(const Plane& depth) {
  if ((depth < 0.0).any()) throw ShapeError("depth map must be non-negative");
  const double peak = depth.maxCoeff();
  if (peak <= 0.0) return Plane::Zero(depth.rows(), depth.cols());
  return depth / peak;
}

SyntheticSample synthesize_pair(const Image& scene, const Plane& depth,
                                const HazeSynthesisConfig& cfg, std::uint64_t image_index) {
  require_valid(scene);
  require_valid(cfg);
  if (scene.height() != depth.rows() || scene.width() != depth.cols()) {
    throw ShapeError("scene and depth map disagree on shape");
  }
  Rng rng(RngKey::root(cfg.seed).derive("synthesis").derive(image_index));
  SyntheticSample s;
  s.beta = rng.uniform(cfg.beta_min, cfg.beta_max);
  const double base = rng.uniform(cfg.airlight_min, cfg.airlight_max);
  for (int c = 0; c < 3; ++c) {
    const double jitter = rng.uniform(-cfg.airlight_jitter, cfg.airlight_jitter);
    s.airlight.value[static_cast<size_t>(c)] = std::clamp(base + jitter, 0.6, 1.0);
  }
  s.t = transmission_from_depth(normalized_depth(depth), s.beta);
  s.hazy = compose(scene, s.t, s.airlight);
  return s;
}

}  // namespace unhaze
