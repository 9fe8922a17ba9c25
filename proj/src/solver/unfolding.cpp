#include "unhaze/solver/unfolding.hpp"

#include <cmath>
#include <string>

#include "unhaze/core/error.hpp"
#include "unhaze/core/filters.hpp"

namespace unhaze {

SolverParams default_solver_params(int stages) {
  SolverParams p;
  p.stages.assign(static_cast<size_t>(stages), StageParams{});
  return p;
}

void require_valid(const SolverParams& params) {
  if (params.stages.empty() || params.stages.size() > 16) {
    throw ConfigError("solver needs between 1 and 16 stages");
  }
  if (!(params.t_floor > 0.0 && params.t_floor < 0.5)) {
    throw ConfigError("t_floor must lie in (0, 0.5)");
  }
  if (params.init.mode == TransmissionInit::kConstant &&
      !(params.init.constant >= params.t_floor && params.init.constant <= 1.0)) {
    throw ConfigError("constant transmission init must lie in [t_floor, 1]");
  }
  for (const StageParams& s : params.stages) {
    if (!std::isfinite(s.lambda) || s.lambda < 0.0 || !std::isfinite(s.mu) || s.mu < 0.0) {
      throw ConfigError("stage weights lambda, mu must be finite and >= 0");
    }
    require_valid(s.t_prox);
    require_valid(s.s_prox);
  }
}

Transmission init_transmission(const Image& hazy, const InitSpec& init, double t_floor) {
  if (init.mode == TransmissionInit::kConstant) {
    return Transmission{Plane::Constant(hazy.height(), hazy.width(), init.constant)};
  }
  const Plane dc = dark_channel(hazy, 15);
  return Transmission{(1.0 - 0.95 * dc).max(t_floor).min(1.0)};
}

Transmission tgdm_step(const Image& hazy, const Image& j_prev, const Transmission& t_prev,
                       double lambda, double t_floor) {
  require_same_shape(hazy, j_prev);
  require_same_shape(hazy, t_prev);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  Plane num = Plane::Constant(hazy.height(), hazy.width(), 0.0);
  Plane den = num;
  for (int c = 0; c < hazy.channels(); ++c) {
    const Plane one_minus_j = 1.0 - j_prev[c];
    num += one_minus_j * (1.0 - hazy[c]);
    den += one_minus_j.square();
  }
  num += lambda * t_prev.map;
  den += lambda;
  // den == 0 only when lambda == 0 and every channel has j == 1; such a pixel
  // is pure airlight and keeps its previous transmission.
  Plane t = (den > 0.0).select(num / den.max(1e-300), t_prev.map);
  return Transmission{t.max(t_floor).min(1.0)};
}

Image sgdm_step(const Image& hazy, const Image& j_prev, const Transmission& t_hat,
                double mu) {
  require_same_shape(hazy, j_prev);
  require_same_shape(hazy, t_hat);
  if (!(mu >= 0.0)) throw ConfigError("mu must be >= 0");
  const Plane den = t_hat.map.square() + mu;  // positive: t >= t_floor > 0
  Image out;
  out.planes.reserve(hazy.planes.size());
  for (int c = 0; c < hazy.channels(); ++c) {
    out.planes.push_back(
        clamped01(Plane((t_hat.map * (hazy[c] + t_hat.map - 1.0) + mu * j_prev[c]) / den)));
  }
  return out;
}

SolverState run_stage(const Image& hazy, const SolverState& state, const StageParams& stage,
                      double t_floor, bool raw_t_to_sgdm, StageTrace* trace) {
  const Transmission t_hat = tgdm_step(hazy, state.j, state.t, stage.lambda, t_floor);
  const Transmission t_out = apply_t_prox(stage.t_prox, state.j, t_hat, t_floor);
  const Transmission& t_for_scene = raw_t_to_sgdm ? t_hat : t_out;
  const Image j_hat = sgdm_step(hazy, state.j, t_for_scene, stage.mu);
  const Image j_out = apply_s_prox(stage.s_prox, j_hat, t_out);
  if (trace) *trace = StageTrace{t_hat, t_out, j_hat, j_out};
  return SolverState{j_out, t_out, state.stage_index + 1};
}

// Deliberately does not validate params: configured parameter sets are
// checked where they enter (config load, checkpoint load, tuner), while the
// solver itself executes any stage list mechanically — zero stages returns
// the initialization, and diagnostic runs may exceed the configured cap.
DehazeResult dehaze(const Image& hazy, const SolverParams& params,
                    const StageObserver& observer) {
  require_valid(hazy);
  SolverState state{hazy, init_transmission(hazy, params.init, params.t_floor), 0};
  for (const StageParams& stage : params.stages) {
    if (observer) {
      StageTrace trace;
      const SolverState before = state;
      state = run_stage(hazy, state, stage, params.t_floor, params.raw_t_to_sgdm, &trace);
      observer(before.stage_index, before, trace);
    } else {
      state = run_stage(hazy, state, stage, params.t_floor, params.raw_t_to_sgdm);
    }
  }
  return DehazeResult{state.j, state.t};
}

namespace {

// Tunable scalars per prox kind, with their feasible intervals.
void prox_boxes(const ProxSpec& spec, std::vector<ParamBox>& out) {
  switch (spec.kind) {
    case ProxKind::kIdentity:
      break;
    case ProxKind::kGuided:
      out.push_back({0.0, 1.0});    // strength
      out.push_back({1.0, 32.0});   // radius
      out.push_back({1e-6, 1.0});   // eps
      break;
    case ProxKind::kBilateral:
      out.push_back({0.0, 1.0});    // strength
      out.push_back({1.0, 32.0});   // radius
      out.push_back({0.5, 8.0});    // sigma_s
      out.push_back({0.01, 1.0});   // sigma_r
      break;
  }
}

void prox_flatten(const ProxSpec& spec, std::vector<double>& out) {
  switch (spec.kind) {
    case ProxKind::kIdentity:
      break;
    case ProxKind::kGuided:
      out.insert(out.end(), {spec.strength, spec.radius, spec.eps});
      break;
    case ProxKind::kBilateral:
      out.insert(out.end(), {spec.strength, spec.radius, spec.sigma_s, spec.sigma_r});
      break;
  }
}

size_t prox_assign(ProxSpec& spec, const std::vector<double>& flat, size_t i) {
  switch (spec.kind) {
    case ProxKind::kIdentity:
      return i;
    case ProxKind::kGuided:
      spec.strength = flat.at(i);
      spec.radius = flat.at(i + 1);
      spec.eps = flat.at(i + 2);
      return i + 3;
    case ProxKind::kBilateral:
      spec.strength = flat.at(i);
      spec.radius = flat.at(i + 1);
      spec.sigma_s = flat.at(i + 2);
      spec.sigma_r = flat.at(i + 3);
      return i + 4;
  }
  throw ConfigError("unknown prox kind");
}

}  // namespace

std::vector<double> flatten_params(const SolverParams& params) {
  std::vector<double> flat;
  for (const StageParams& s : params.stages) {
    flat.push_back(s.lambda);
    flat.push_back(s.mu);
    prox_flatten(s.t_prox, flat);
    prox_flatten(s.s_prox, flat);
  }
  return flat;
}

void assign_flat_params(SolverParams& params, const std::vector<double>& flat) {
  size_t i = 0;
  for (StageParams& s : params.stages) {
    s.lambda = flat.at(i++);
    s.mu = flat.at(i++);
    i = prox_assign(s.t_prox, flat, i);
    i = prox_assign(s.s_prox, flat, i);
  }
  if (i != flat.size()) {
    throw ConfigError("flat parameter vector does not match solver layout");
  }
}

std::vector<ParamBox> param_boxes(const SolverParams& params) {
  std::vector<ParamBox> boxes;
  for (const StageParams& s : params.stages) {
    boxes.push_back({0.0, 10.0});  // lambda
    boxes.push_back({0.0, 10.0});  // mu
    prox_boxes(s.t_prox, boxes);
    prox_boxes(s.s_prox, boxes);
  }
  return boxes;
}

bool same_layout(const SolverParams& a, const SolverParams& b) {
  if (a.stages.size() != b.stages.size()) return false;
  if (a.init.mode != b.init.mode) return false;
  for (size_t k = 0; k < a.stages.size(); ++k) {
    if (a.stages[k].t_prox.kind != b.stages[k].t_prox.kind) return false;
    if (a.stages[k].s_prox.kind != b.stages[k].s_prox.kind) return false;
  }
  return true;
}

}  // namespace unhaze
