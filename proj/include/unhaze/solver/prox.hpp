#pragma once

#include <string>

#include "unhaze/core/types.hpp"

namespace unhaze {

// Pluggable proximal operators: classical edge-preserving smoothers standing
// in the refinement slots of the unfolding solver.
enum class ProxKind { kIdentity, kGuided, kBilateral };

std::string prox_kind_name(ProxKind kind);
ProxKind prox_kind_from_name(const std::string& name);

struct ProxSpec {
  ProxKind kind = ProxKind::kIdentity;
  // Blend factor: output = strength * filtered + (1 - strength) * input.
  double strength = 1.0;
  // Window half-width in pixels; kept continuous so the tuner can move it,
  // rounded into [1, 32] at application time.
  double radius = 4.0;
  double eps = 1e-2;     // guided-filter regularization, [1e-6, 1]
  double sigma_s = 2.0;  // bilateral spatial stddev, pixels
  double sigma_r = 0.1;  // bilateral range stddev, intensity

  int effective_radius() const;
};

void require_valid(const ProxSpec& spec);

// Transmission refinement: guided-filters t_hat using the luminance of the
// current scene estimate, blends by strength, clamps to [t_floor, 1].
// Identity kind returns t_hat untouched.
Transmission apply_t_prox(const ProxSpec& spec, const Image& j_guide,
                          const Transmission& t_hat, double t_floor = kTransmissionFloor);

// Scene refinement: joint-bilateral smoothing of j_hat with the range kernel
// on its own luminance, blended by strength, clamped to [0, 1].
Image apply_s_prox(const ProxSpec& spec, const Image& j_hat, const Transmission& t);

}  // namespace unhaze
