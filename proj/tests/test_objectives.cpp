#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_images.hpp"
#include "unhaze/core/error.hpp"
#include "unhaze/iqa/scoring.hpp"
#include "unhaze/objectives/losses.hpp"
#include "unhaze/physics/scattering.hpp"

using namespace unhaze;

namespace {

// Scene squeezed into [0.2, 0.8] so constant shifts stay in range.
Image gentle_scene(int h, int w, double phase = 0.0) {
  Image img = testing::smooth_scene(h, w, phase);
  for (int c = 0; c < 3; ++c) img[c] = 0.5 + 0.6 * (img[c] - 0.5);
  return img;
}

Image shifted(const Image& img, double delta) {
  Image out = img;
  for (auto& p : out.planes) p += delta;
  return out;
}

}  // namespace

TEST_CASE("objective config validation") {
  CHECK_NOTHROW(require_valid(ObjectiveConfig{}));
  ObjectiveConfig bad;
  bad.beta_c = -0.1;
  CHECK_THROWS_AS(require_valid(bad), ConfigError);
  bad = ObjectiveConfig{};
  bad.tau = {1.0, 0.5};  // three levels but two weights
  CHECK_THROWS_AS(require_valid(bad), ConfigError);
  bad = ObjectiveConfig{};
  bad.pyramid_levels = 0;
  bad.tau = {};
  CHECK_THROWS_AS(require_valid(bad), ConfigError);
  bad = ObjectiveConfig{};
  bad.tau = {0.25, -0.5, 1.0};
  CHECK_THROWS_AS(require_valid(bad), ConfigError);
}

TEST_CASE("feature pyramid halves resolution per level") {
  const Image img = gentle_scene(32, 24);
  const auto pyr = feature_pyramid(img, 3);
  REQUIRE(pyr.size() == 3);
  CHECK(pyr[0].rows() == 32);
  CHECK(pyr[0].cols() == 24);
  CHECK(pyr[1].rows() == 16);
  CHECK(pyr[1].cols() == 12);
  CHECK(pyr[2].rows() == 8);
  CHECK(pyr[2].cols() == 6);
  // Gradient features are non-negative.
  for (const Plane& p : pyr) CHECK(p.minCoeff() >= 0.0);
  CHECK_THROWS_AS(feature_pyramid(gentle_scene(4, 4), 3), ShapeError);
  CHECK_THROWS_AS(feature_pyramid(img, 0), ConfigError);
}

TEST_CASE("reconstruction loss vanishes on identical images") {
  const Image img = gentle_scene(32, 32);
  const ObjectiveConfig cfg;
  CHECK(rec_common(img, img, cfg) == 0.0);
}

TEST_CASE("constant shift costs exactly the shift") {
  // A global brightness offset leaves every gradient feature untouched, so
  // the loss reduces to the plain intensity term.
  const Image gt = gentle_scene(32, 32);
  const Image out = shifted(gt, 0.1);
  const ObjectiveConfig cfg;
  CHECK(rec_common(out, gt, cfg) == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("contrastive reconstruction is zero when output equals target") {
  const Image gt = gentle_scene(32, 32);
  const Image lq = gentle_scene(32, 32, 1.7);
  const ObjectiveConfig cfg;
  CHECK(rec_contrastive(lq, gt, gt, cfg) == 0.0);
  // Moving the output from the target toward the input raises the loss.
  const Image mid = shifted(gt, 0.05);
  CHECK(rec_contrastive(lq, mid, gt, cfg) > 0.0);
}

TEST_CASE("contrastive pull/push ratio shrinks when output leaves the input") {
  // Contrast-scaling one scene about mid-gray scales its gradient features
  // linearly, so the push distance is controlled exactly: with the output
  // fixed relative to the target, an input farther away in feature space
  // means a larger denominator and a smaller penalty.
  ObjectiveConfig cfg;
  cfg.beta_c = 1.0;
  const Image gt = gentle_scene(32, 32);
  const auto squeezed = [&gt](double s) {
    Image img = gt;
    for (int c = 0; c < img.channels(); ++c) img[c] = 0.5 + s * (gt[c] - 0.5);
    return img;
  };
  const Image out = squeezed(0.9);
  const Image lq_near = squeezed(0.8);
  const Image lq_far = squeezed(0.3);
  const double near_loss = rec_contrastive(lq_near, out, gt, cfg);
  const double far_loss = rec_contrastive(lq_far, out, gt, cfg);
  CHECK(near_loss > far_loss);
}

TEST_CASE("coherence loss measures the recomposition residual") {
  const Image scene = gentle_scene(16, 16);
  const Transmission t{testing::constant_plane(16, 16, 0.6)};
  const Image lq = compose_simplified(scene, t);
  CHECK(coherence_loss(lq, scene, t) <= 1e-12);

  const Image lq_off = shifted(lq, 0.1);
  CHECK(coherence_loss(lq_off, scene, t) == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("analytic inversion has zero coherence loss") {
  const Image gt = gentle_scene(20, 20);
  const Plane depth = testing::bumpy_depth(20, 20);
  const Transmission t = transmission_from_depth(normalized_depth(depth), 1.0);
  const Image lq = compose_simplified(gt, t);
  const Image recovered = invert_exact(lq, t);
  CHECK(coherence_loss(lq, recovered, t) <= 1e-12);
}

TEST_CASE("unit trust weights reproduce the unweighted losses") {
  const Image gt = gentle_scene(32, 32);
  const Image lq = gentle_scene(32, 32, 2.3);
  const Image out = shifted(gt, 0.07);
  const Transmission t{testing::constant_plane(32, 32, 0.5)};
  const ObjectiveConfig cfg;
  const TrustWeight ones{Plane::Ones(32, 32)};
  CHECK(std::abs(weighted_rec_contrastive(lq, out, gt, ones, cfg) -
                 rec_contrastive(lq, out, gt, cfg)) <= 1e-15);
  CHECK(std::abs(weighted_coherence_loss(lq, out, t, ones) -
                 coherence_loss(lq, out, t)) <= 1e-15);
}

TEST_CASE("weighted losses are linear in the weight map") {
  const Image gt = gentle_scene(32, 32);
  const Image lq = gentle_scene(32, 32, 2.3);
  const Image out = shifted(gt, 0.07);
  const Transmission t{testing::constant_plane(32, 32, 0.5)};
  const ObjectiveConfig cfg;
  const TrustWeight w{testing::noise_image(32, 32, 1, 77, 0.1, 1.0)[0]};
  const TrustWeight half{Plane(0.5 * w.map)};
  CHECK(std::abs(weighted_rec_contrastive(lq, out, gt, half, cfg) -
                 0.5 * weighted_rec_contrastive(lq, out, gt, w, cfg)) <= 1e-15);
  CHECK(std::abs(weighted_coherence_loss(lq, out, t, half) -
                 0.5 * weighted_coherence_loss(lq, out, t, w)) <= 1e-15);
  const TrustWeight zero{Plane::Zero(32, 32)};
  CHECK(weighted_rec_contrastive(lq, out, gt, zero, cfg) == 0.0);
  CHECK(weighted_coherence_loss(lq, out, t, zero) == 0.0);
}

TEST_CASE("pretraining breakdown composes the documented terms") {
  PretrainSample s;
  s.gt = gentle_scene(32, 32);
  const Plane depth = testing::bumpy_depth(32, 32);
  s.t_out = transmission_from_depth(normalized_depth(depth), 0.8);
  s.lq = compose_simplified(s.gt, s.t_out);
  s.out = shifted(s.gt, 0.03);
  const ObjectiveConfig cfg;
  const LossBreakdown b = loss_pretrain(s, cfg);
  CHECK(std::abs(b.rec - cfg.rho_r * rec_contrastive(s.lq, s.out, s.gt, cfg)) <= 1e-15);
  CHECK(std::abs(b.coh - cfg.rho_c * coherence_loss(s.lq, s.out, s.t_out)) <= 1e-15);
  CHECK(std::abs(b.dens - image_density(s.out)) <= 1e-15);
  CHECK(b.total() == b.rec + b.coh + b.dens);
  CHECK(b.total() > 0.0);
}

TEST_CASE("finetuning breakdown is the sum of real and synthetic parts") {
  FinetuneRealTerm r;
  r.lq = gentle_scene(32, 32, 0.4);
  r.pseudo = gentle_scene(32, 32, 1.1);
  r.out = shifted(r.pseudo, -0.04);
  r.t_out = Transmission{testing::constant_plane(32, 32, 0.7)};
  r.weight = TrustWeight{testing::noise_image(32, 32, 1, 9, 0.2, 0.9)[0]};

  FinetuneSynthTerm s;
  s.gt = gentle_scene(32, 32, 2.9);
  s.out = shifted(s.gt, 0.02);

  const ObjectiveConfig cfg;
  const LossBreakdown br = loss_finetune_real(r, cfg);
  const LossBreakdown bs = loss_finetune_synth(s, cfg);
  const LossBreakdown b = loss_finetune(r, s, cfg);
  CHECK(b.rec == br.rec + bs.rec);
  CHECK(b.coh == br.coh + bs.coh);
  CHECK(b.dens == br.dens + bs.dens);
  // The synthetic part carries no coherence term.
  CHECK(bs.coh == 0.0);
  // The real density term scales with the mean trust weight.
  CHECK(std::abs(br.dens - r.weight.map.mean() * image_density(r.out)) <= 1e-15);
}

TEST_CASE("losses reject mismatched shapes") {
  const Image a = gentle_scene(32, 32);
  const Image b = gentle_scene(32, 16);
  const ObjectiveConfig cfg;
  CHECK_THROWS_AS(rec_common(a, b, cfg), ShapeError);
  CHECK_THROWS_AS(rec_contrastive(a, a, b, cfg), ShapeError);
  CHECK_THROWS_AS(coherence_loss(a, a, Transmission{testing::constant_plane(8, 8, 0.5)}),
                  ShapeError);
}
