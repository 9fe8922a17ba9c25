#include "unhaze/solver/prox.hpp"

#include <algorithm>
#include <cmath>

#include "unhaze/core/error.hpp"
#include "unhaze/core/filters.hpp"

namespace unhaze {

std::string prox_kind_name(ProxKind kind) {
  switch (kind) {
    case ProxKind::kIdentity: return "identity";
    case ProxKind::kGuided: return "guided";
    case ProxKind::kBilateral: return "bilateral";
  }
  throw ConfigError("unknown prox kind");
}

ProxKind prox_kind_from_name(const std::string& name) {
  if (name == "identity") return ProxKind::kIdentity;
  if (name == "guided") return ProxKind::kGuided;
  if (name == "bilateral") return ProxKind::kBilateral;
  throw ConfigError("unknown prox kind '" + name + "'");
}

int ProxSpec::effective_radius() const {
  return std::clamp(static_cast<int>(std::lround(radius)), 1, 32);
}

void require_valid(const ProxSpec& spec) {
  if (spec.kind == ProxKind::kIdentity) return;  // identity ignores parameters
  if (!(spec.strength >= 0.0 && spec.strength <= 1.0)) {
    throw ConfigError("prox strength must lie in [0, 1]");
  }
  if (!(spec.radius >= 1.0 && spec.radius <= 32.0)) {
    throw ConfigError("prox radius must lie in [1, 32]");
  }
  if (spec.kind == ProxKind::kGuided && !(spec.eps >= 1e-6 && spec.eps <= 1.0)) {
    throw ConfigError("guided prox eps must lie in [1e-6, 1]");
  }
  if (spec.kind == ProxKind::kBilateral &&
      (!(spec.sigma_s > 0.0) || !(spec.sigma_r > 0.0))) {
    throw ConfigError("bilateral prox sigmas must be positive");
  }
}

namespace {

Plane blend(const Plane& filtered, const Plane& raw, double strength) {
  return strength * filtered + (1.0 - strength) * raw;
}

}  // namespace

Transmission apply_t_prox(const ProxSpec& spec, const Image& j_guide,
                          const Transmission& t_hat, double t_floor) {
  require_valid(spec);
  if (spec.kind == ProxKind::kIdentity) return t_hat;
  require_same_shape(j_guide, t_hat);
  const Plane guide = luminance(j_guide);
  Plane filtered;
  switch (spec.kind) {
    case ProxKind::kGuided:
      filtered = guided_filter(guide, t_hat.map, spec.effective_radius(), spec.eps);
      break;
    case ProxKind::kBilateral: {
      Image wrap;
      wrap.planes.push_back(t_hat.map);
      filtered =
          joint_bilateral(wrap, guide, spec.effective_radius(), spec.sigma_s, spec.sigma_r)[0];
      break;
    }
    default:
      filtered = t_hat.map;
  }
  return Transmission{blend(filtered, t_hat.map, spec.strength).max(t_floor).min(1.0)};
}

Image apply_s_prox(const ProxSpec& spec, const Image& j_hat, const Transmission& t) {
  require_valid(spec);
  if (spec.kind == ProxKind::kIdentity) return j_hat;
  require_same_shape(j_hat, t);
  Image filtered;
  switch (spec.kind) {
    case ProxKind::kBilateral:
      filtered = joint_bilateral(j_hat, luminance(j_hat), spec.effective_radius(),
                                 spec.sigma_s, spec.sigma_r);
      break;
    case ProxKind::kGuided: {
      const Plane guide = luminance(j_hat);
      filtered.planes.reserve(j_hat.planes.size());
      for (const Plane& p : j_hat.planes) {
        filtered.planes.push_back(
            guided_filter(guide, p, spec.effective_radius(), spec.eps));
      }
      break;
    }
    default:
      filtered = j_hat;
  }
  Image out;
  out.planes.reserve(j_hat.planes.size());
  for (int c = 0; c < j_hat.channels(); ++c) {
    out.planes.push_back(clamped01(blend(filtered[c], j_hat[c], spec.strength)));
  }
  return out;
}

}  // namespace unhaze
