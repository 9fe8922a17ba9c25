#pragma once

#include <functional>
#include <vector>

#include "unhaze/core/types.hpp"
#include "unhaze/solver/prox.hpp"

namespace unhaze {

// One unfolding stage: proximal-gradient weights plus the two refinement
// operators (transmission slot, scene slot).
struct StageParams {
  double lambda = 0.1;  // transmission-step proximal weight, >= 0
  double mu = 0.05;     // scene-step proximal weight, >= 0
  ProxSpec t_prox;
  ProxSpec s_prox;
};

enum class TransmissionInit { kDarkChannel, kConstant };

struct InitSpec {
  TransmissionInit mode = TransmissionInit::kDarkChannel;
  double constant = 0.5;  // used by kConstant
};

struct SolverParams {
  std::vector<StageParams> stages;
  double t_floor = kTransmissionFloor;
  InitSpec init;
  // Feed the raw transmission estimate (before its prox refinement) into the
  // scene step, restoring the literal update order for ablation.
  bool raw_t_to_sgdm = false;
};

SolverParams default_solver_params(int stages = 4);
void require_valid(const SolverParams& params);

// Transmission initialization. Dark-channel mode estimates
// t = clamp(1 - 0.95 * dark_channel(p, window 15), t_floor, 1).
Transmission init_transmission(const Image& hazy, const InitSpec& init,
                               double t_floor = kTransmissionFloor);

// Closed-form transmission update. Per pixel, minimizes
//   1/2 sum_c (p_c - j_c t + t - 1)^2 + lambda/2 (t - t_prev)^2
// giving t = (lambda*t_prev + sum_c (1-j_c)(1-p_c)) / (lambda + sum_c (1-j_c)^2),
// clamped to [t_floor, 1]. A degenerate denominator (lambda = 0 and j = 1 in
// every channel) falls back to t_prev: a saturated pixel carries no
// transmission information.
Transmission tgdm_step(const Image& hazy, const Image& j_prev, const Transmission& t_prev,
                       double lambda, double t_floor = kTransmissionFloor);

// Closed-form scene update. Per pixel and channel, minimizes
//   1/2 (p - j t + t - 1)^2 + mu/2 (j - j_prev)^2
// giving j = (t*(p + t - 1) + mu*j_prev) / (t^2 + mu), clamped to [0, 1].
Image sgdm_step(const Image& hazy, const Image& j_prev, const Transmission& t_hat,
                double mu);

struct SolverState {
  Image j;
  Transmission t;
  int stage_index = 0;
};

// Intermediate products of one stage, for inspection and descent checks.
struct StageTrace {
  Transmission t_hat;  // transmission after the closed-form step
  Transmission t_out;  // after the transmission prox
  Image j_hat;         // scene after the closed-form step
  Image j_out;         // after the scene prox
};

// One full stage: transmission step, transmission prox, scene step (consuming
// the prox-refined transmission unless raw_t_to_sgdm), scene prox.
SolverState run_stage(const Image& hazy, const SolverState& state, const StageParams& stage,
                      double t_floor, bool raw_t_to_sgdm = false,
                      StageTrace* trace = nullptr);

struct DehazeResult {
  Image j;
  Transmission t;
};

using StageObserver = std::function<void(int stage_index, const SolverState& before,
                                         const StageTrace& trace)>;

// Full solve: initialize (j0 = hazy input, t0 per init mode), then run every
// configured stage in order.
DehazeResult dehaze(const Image& hazy, const SolverParams& params,
                    const StageObserver& observer = nullptr);

// Flat view of the tunable scalars, in stage order:
//   [lambda, mu, t_prox scalars..., s_prox scalars...] per stage.
// Identity contributes nothing; guided contributes [strength, radius, eps];
// bilateral contributes [strength, radius, sigma_s, sigma_r]. Categorical
// fields (kinds, init mode, t_floor) are layout, not coordinates.
std::vector<double> flatten_params(const SolverParams& params);
void assign_flat_params(SolverParams& params, const std::vector<double>& flat);

struct ParamBox {
  double lo = 0.0;
  double hi = 1.0;
};

// Per-coordinate feasible intervals matching flatten_params order.
std::vector<ParamBox> param_boxes(const SolverParams& params);

// True when two parameter sets share stage count, prox kinds, and init mode,
// i.e. their flat vectors are commensurable.
bool same_layout(const SolverParams& a, const SolverParams& b);

}  // namespace unhaze
