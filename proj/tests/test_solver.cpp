#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "support/test_images.hpp"
#include "unhaze/core/error.hpp"
#include "unhaze/core/rng.hpp"
#include "unhaze/physics/scattering.hpp"
#include "unhaze/solver/serialize.hpp"
#include "unhaze/solver/unfolding.hpp"

using namespace unhaze;

namespace {

// Surrogate energies minimized by the two closed-form steps, one pixel at a
// time.
double transmission_energy(const std::vector<double>& p, const std::vector<double>& j,
                           double t, double t_prev, double lambda) {
  double e = 0.0;
  for (size_t c = 0; c < p.size(); ++c) {
    const double r = p[c] - j[c] * t + t - 1.0;
    e += 0.5 * r * r;
  }
  return e + 0.5 * lambda * (t - t_prev) * (t - t_prev);
}

double scene_energy(double p, double j, double j_prev, double t, double mu) {
  const double r = p - j * t + t - 1.0;
  return 0.5 * r * r + 0.5 * mu * (j - j_prev) * (j - j_prev);
}

SolverParams identity_params(int stages, double lambda, double mu) {
  SolverParams params = default_solver_params(stages);
  for (StageParams& s : params.stages) {
    s.lambda = lambda;
    s.mu = mu;
    s.t_prox.kind = ProxKind::kIdentity;
    s.s_prox.kind = ProxKind::kIdentity;
  }
  return params;
}

}  // namespace

TEST_CASE("transmission step matches a hand-computed ratio") {
  Image hazy(1, 1, 3, 0.0);
  hazy[0](0, 0) = 0.5;
  hazy[1](0, 0) = 0.6;
  hazy[2](0, 0) = 0.7;
  Image j(1, 1, 3, 0.0);
  j[0](0, 0) = 0.2;
  j[1](0, 0) = 0.4;
  j[2](0, 0) = 0.6;
  const Transmission t_prev{Plane::Constant(1, 1, 0.5)};
  const Transmission t = tgdm_step(hazy, j, t_prev, 1.0);
  // numerator  = 1*0.5 + 0.8*0.5 + 0.6*0.4 + 0.4*0.3 = 1.26
  // denominator = 1 + 0.64 + 0.36 + 0.16 = 2.16
  CHECK(t.map(0, 0) == doctest::Approx(1.26 / 2.16).epsilon(1e-15));
}

TEST_CASE("scene step matches a hand-computed ratio") {
  const Image hazy(1, 1, 1, 0.6);
  const Image j_prev(1, 1, 1, 0.4);
  const Transmission t{Plane::Constant(1, 1, 0.5)};
  const Image j = sgdm_step(hazy, j_prev, t, 0.1);
  // (0.5*(0.6+0.5-1) + 0.1*0.4) / (0.25+0.1) = 0.09/0.35
  CHECK(j[0](0, 0) == doctest::Approx(0.09 / 0.35).epsilon(1e-15));
}

TEST_CASE("transmission step minimizes its surrogate (oracle comparison)") {
  Rng rng(RngKey::root(101));
  const double t_floor = 0.05;
  for (int trial = 0; trial < 300; ++trial) {
    const std::vector<double> p{rng.uniform(), rng.uniform(), rng.uniform()};
    const std::vector<double> j{rng.uniform(), rng.uniform(), rng.uniform()};
    const double t_prev = rng.uniform(t_floor, 1.0);
    const double lambda = trial % 3 == 0 ? 0.0 : rng.uniform(0.0, 3.0);

    Image hazy(1, 1, 3), scene(1, 1, 3);
    for (int c = 0; c < 3; ++c) {
      hazy[c](0, 0) = p[static_cast<size_t>(c)];
      scene[c](0, 0) = j[static_cast<size_t>(c)];
    }
    const double got =
        tgdm_step(hazy, scene, Transmission{Plane::Constant(1, 1, t_prev)}, lambda).map(0, 0);
    const double want = oracle::golden_min(
        [&](double t) { return transmission_energy(p, j, t, t_prev, lambda); }, t_floor, 1.0);
    CHECK(std::abs(got - want) <= 1e-6);
    if (got > t_floor + 1e-9 && got < 1.0 - 1e-9) {
      // Interior solution: stationarity of the surrogate.
      double grad = lambda * (got - t_prev);
      for (int c = 0; c < 3; ++c) {
        const double jc = j[static_cast<size_t>(c)];
        grad += (p[static_cast<size_t>(c)] - jc * got + got - 1.0) * (1.0 - jc);
      }
      CHECK(std::abs(grad) <= 1e-8);
    }
  }
}

TEST_CASE("scene step minimizes its surrogate (oracle comparison)") {
  Rng rng(RngKey::root(102));
  for (int trial = 0; trial < 300; ++trial) {
    const double p = rng.uniform();
    const double j_prev = rng.uniform();
    const double t = rng.uniform(0.05, 1.0);
    const double mu = rng.uniform(0.0, 2.0) + 1e-6;
    const Image hazy(1, 1, 1, p);
    const Image prev(1, 1, 1, j_prev);
    const double got = sgdm_step(hazy, prev, Transmission{Plane::Constant(1, 1, t)}, mu)[0](0, 0);
    const double want =
        oracle::golden_min([&](double j) { return scene_energy(p, j, j_prev, t, mu); }, 0.0, 1.0);
    CHECK(std::abs(got - want) <= 1e-6);
    if (got > 1e-9 && got < 1.0 - 1e-9) {
      const double grad = (p - got * t + t - 1.0) * (-t) + mu * (got - j_prev);
      CHECK(std::abs(grad) <= 1e-8);
    }
  }
}

TEST_CASE("saturated pixels with no damping fall back to the previous transmission") {
  const Image hazy(2, 2, 3, 0.9);
  const Image j(2, 2, 3, 1.0);  // (1 - j) = 0 in every channel
  const Transmission t_prev{Plane::Constant(2, 2, 0.42)};
  const Transmission t = tgdm_step(hazy, j, t_prev, 0.0);
  CHECK((t.map - 0.42).abs().maxCoeff() == 0.0);
}

TEST_CASE("steps clamp to their feasible intervals") {
  const Transmission mid{Plane::Constant(1, 1, 0.5)};
  // p < j in every channel drives the unconstrained minimizer above 1:
  // (1-j)(1-p) / (1-j)^2 = 0.16/0.04 = 4 -> clamp to 1.
  CHECK(tgdm_step(Image(1, 1, 3, 0.2), Image(1, 1, 3, 0.8), mid, 0.0).map(0, 0) ==
        doctest::Approx(1.0));
  // p near 1 with a dark scene drives it to ~0.001 -> clamp to the floor.
  CHECK(tgdm_step(Image(1, 1, 3, 0.999), Image(1, 1, 3, 0.0), mid, 0.0).map(0, 0) ==
        doctest::Approx(0.05));

  // Strong haze with low transmission drives the scene estimate negative:
  // 0.5*(0.2+0.5-1)/0.25 = -0.6 -> clamp to 0.
  CHECK(sgdm_step(Image(1, 1, 1, 0.2), Image(1, 1, 1, 0.0),
                  Transmission{Plane::Constant(1, 1, 0.5)}, 0.0)[0](0, 0) ==
        doctest::Approx(0.0));
}

TEST_CASE("transmission initialization") {
  // Dark-channel mode on a constant image: t = clamp(1 - 0.95 * v).
  const Image img = testing::constant_image(20, 20, 0.4);
  InitSpec dc;
  dc.mode = TransmissionInit::kDarkChannel;
  const Transmission t = init_transmission(img, dc);
  CHECK((t.map - (1.0 - 0.95 * 0.4)).abs().maxCoeff() <= 1e-12);
  // Very bright image lands at the floor (1 - 0.95 rounds a hair above 0.05,
  // so the clamp may not fire; the result still sits at floor level).
  const Transmission tf = init_transmission(testing::constant_image(20, 20, 1.0), dc);
  CHECK((tf.map - kTransmissionFloor).abs().maxCoeff() <= 1e-15);

  InitSpec cst;
  cst.mode = TransmissionInit::kConstant;
  cst.constant = 0.7;
  const Transmission tc = init_transmission(img, cst);
  CHECK((tc.map - 0.7).abs().maxCoeff() == 0.0);
}

TEST_CASE("stage wiring feeds the refined transmission into the scene step by default") {
  const Image hazy = testing::smooth_scene(16, 16);
  SolverState state{hazy, init_transmission(hazy, InitSpec{}), 0};
  StageParams stage;
  stage.lambda = 0.2;
  stage.mu = 0.1;
  stage.t_prox.kind = ProxKind::kGuided;  // makes t_out differ from t_hat
  stage.s_prox.kind = ProxKind::kIdentity;

  StageTrace trace;
  const SolverState next = run_stage(hazy, state, stage, 0.05, false, &trace);
  REQUIRE((trace.t_out.map - trace.t_hat.map).abs().maxCoeff() > 0.0);
  const Image from_refined = sgdm_step(hazy, state.j, trace.t_out, stage.mu);
  CHECK(max_abs_diff(trace.j_hat, from_refined) == 0.0);
  CHECK(max_abs_diff(next.j, trace.j_out) == 0.0);
  CHECK((next.t.map - trace.t_out.map).abs().maxCoeff() == 0.0);
  CHECK(next.stage_index == 1);

  StageTrace raw_trace;
  run_stage(hazy, state, stage, 0.05, true, &raw_trace);
  const Image from_raw = sgdm_step(hazy, state.j, raw_trace.t_hat, stage.mu);
  CHECK(max_abs_diff(raw_trace.j_hat, from_raw) == 0.0);
}

TEST_CASE("identity proxes leave the closed-form outputs bitwise untouched") {
  const Image hazy = testing::smooth_scene(12, 12);
  SolverState state{hazy, init_transmission(hazy, InitSpec{}), 0};
  StageParams stage;  // defaults
  stage.t_prox.kind = ProxKind::kIdentity;
  stage.s_prox.kind = ProxKind::kIdentity;
  StageTrace trace;
  run_stage(hazy, state, stage, 0.05, false, &trace);
  CHECK((trace.t_out.map - trace.t_hat.map).abs().maxCoeff() == 0.0);
  CHECK(max_abs_diff(trace.j_out, trace.j_hat) == 0.0);
}

TEST_CASE("zero stages returns the initialization unchanged") {
  const Image hazy = testing::smooth_scene(10, 10);
  SolverParams params = identity_params(1, 0.1, 0.05);
  params.stages.clear();
  const DehazeResult out = dehaze(hazy, params);
  CHECK(max_abs_diff(out.j, hazy) == 0.0);
  CHECK((out.t.map - init_transmission(hazy, params.init).map).abs().maxCoeff() == 0.0);
}

TEST_CASE("full solve starts from the hazy input, observes every stage, and stays bounded") {
  const Image hazy = testing::smooth_scene(18, 14);
  const SolverParams params = default_solver_params(3);
  std::vector<int> seen;
  const DehazeResult out = dehaze(hazy, params, [&](int k, const SolverState& before,
                                                    const StageTrace& trace) {
    if (k == 0) CHECK(max_abs_diff(before.j, hazy) == 0.0);
    CHECK(trace.t_out.map.minCoeff() >= params.t_floor);
    seen.push_back(k);
  });
  CHECK(seen == std::vector<int>{0, 1, 2});
  CHECK(out.j[0].minCoeff() >= 0.0);
  CHECK(out.j[0].maxCoeff() <= 1.0);
  CHECK(out.t.map.minCoeff() >= params.t_floor);
  CHECK(out.t.map.maxCoeff() <= 1.0);

  const DehazeResult again = dehaze(hazy, params);
  CHECK(max_abs_diff(again.j, out.j) == 0.0);
}

TEST_CASE("pinned transmission turns the solve into exact scene recovery") {
  const Image scene = testing::smooth_scene(32, 32);
  const double t0 = 0.3;
  const Transmission t{Plane::Constant(32, 32, t0)};
  const Image hazy = compose_simplified(scene, t);

  SolverParams params = identity_params(40, 1e12, 0.01);
  params.init.mode = TransmissionInit::kConstant;
  params.init.constant = t0;
  const DehazeResult out = dehaze(hazy, params);
  CHECK((out.t.map - t0).abs().maxCoeff() <= 1e-9);
  CHECK(mean_abs_diff(out.j, scene) <= 1e-3);
}

TEST_CASE("solver parameter validation") {
  CHECK_NOTHROW(require_valid(default_solver_params(1)));
  CHECK_NOTHROW(require_valid(default_solver_params(16)));
  SolverParams none = default_solver_params(1);
  none.stages.clear();
  CHECK_THROWS_AS(require_valid(none), ConfigError);
  CHECK_THROWS_AS(require_valid(default_solver_params(17)), ConfigError);
  SolverParams bad_floor = default_solver_params(2);
  bad_floor.t_floor = 0.6;
  CHECK_THROWS_AS(require_valid(bad_floor), ConfigError);
  SolverParams bad_const = default_solver_params(2);
  bad_const.init.mode = TransmissionInit::kConstant;
  bad_const.init.constant = 0.01;  // below the floor
  CHECK_THROWS_AS(require_valid(bad_const), ConfigError);
  SolverParams bad_lambda = default_solver_params(2);
  bad_lambda.stages[1].lambda = -0.1;
  CHECK_THROWS_AS(require_valid(bad_lambda), ConfigError);
}

TEST_CASE("parameter flattening round trips and boxes match the layout") {
  SolverParams params = default_solver_params(2);
  params.stages[0].t_prox.kind = ProxKind::kGuided;
  params.stages[0].s_prox.kind = ProxKind::kIdentity;
  params.stages[1].t_prox.kind = ProxKind::kBilateral;
  params.stages[1].s_prox.kind = ProxKind::kGuided;

  const std::vector<double> flat = flatten_params(params);
  // Stage 0: lambda, mu + guided(3) + identity(0); stage 1: lambda, mu +
  // bilateral(4) + guided(3).
  CHECK(flat.size() == 2 + 3 + 2 + 4 + 3);
  CHECK(param_boxes(params).size() == flat.size());

  SolverParams clone = params;
  std::vector<double> moved = flat;
  for (double& v : moved) v += 0.001;
  assign_flat_params(clone, moved);
  CHECK(flatten_params(clone) == moved);
  CHECK(same_layout(params, clone));

  SolverParams other = params;
  other.stages[1].s_prox.kind = ProxKind::kIdentity;
  CHECK_FALSE(same_layout(params, other));

  std::vector<double> wrong(flat.size() + 1, 0.5);
  CHECK_THROWS_AS(assign_flat_params(clone, wrong), ConfigError);

  for (const ParamBox& box : param_boxes(params)) CHECK(box.lo < box.hi);
}

TEST_CASE("checkpoint serialization round trips") {
  SolverParams params = default_solver_params(3);
  params.stages[0].lambda = 0.31;
  params.stages[1].t_prox.kind = ProxKind::kBilateral;
  params.stages[1].t_prox.sigma_r = 0.07;
  params.stages[2].s_prox.kind = ProxKind::kIdentity;
  params.t_floor = 0.08;
  params.init.mode = TransmissionInit::kConstant;
  params.init.constant = 0.5;
  params.raw_t_to_sgdm = true;

  const SolverParams back = solver_params_from_json(to_json(params));
  CHECK(same_layout(params, back));
  CHECK(flatten_params(back) == flatten_params(params));
  CHECK(back.t_floor == params.t_floor);
  CHECK(back.init.constant == params.init.constant);
  CHECK(back.raw_t_to_sgdm == true);

  testing::TempDir tmp("checkpoint");
  save_solver_params(params, tmp.path() / "params.json");
  const SolverParams loaded = load_solver_params(tmp.path() / "params.json");
  CHECK(flatten_params(loaded) == flatten_params(params));

  nlohmann::json bad = to_json(params);
  bad["init"]["mode"] = "alien";
  CHECK_THROWS_AS(solver_params_from_json(bad), ConfigError);
  nlohmann::json junk = {{"stages", "nope"}};
  CHECK_THROWS_AS(solver_params_from_json(junk), ConfigError);
}
