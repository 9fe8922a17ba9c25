#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_images.hpp"
#include "unhaze/core/error.hpp"
#include "unhaze/iqa/scoring.hpp"

using namespace unhaze;

TEST_CASE("density score of a constant patch is one minus its value") {
  CHECK(density_score(testing::constant_image(10, 10, 0.3)) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(density_score(testing::constant_image(10, 10, 0.0)) == doctest::Approx(1.0));
  // Haze raises the dark channel, lowering the score.
  CHECK(density_score(testing::constant_image(10, 10, 0.8)) <
        density_score(testing::constant_image(10, 10, 0.2)));
}

TEST_CASE("image density is the mean dark channel (a loss)") {
  CHECK(image_density(testing::constant_image(12, 12, 0.55)) ==
        doctest::Approx(0.55).epsilon(1e-12));
  CHECK(image_density(testing::constant_image(12, 12, 0.55)) ==
        doctest::Approx(1.0 - density_score(testing::constant_image(12, 12, 0.55)))
            .epsilon(1e-12));
}

TEST_CASE("quality score rewards contrast and sharpness, saturating at one") {
  CHECK(quality_score(testing::constant_image(16, 16, 0.5)) == doctest::Approx(0.0));
  // A half-amplitude checkerboard has rms contrast 0.5 >= the 0.25 norm and
  // gradient far above the 0.15 norm: both halves saturate.
  CHECK(quality_score(testing::checker_image(16, 16, 2, 0.0, 1.0)) == doctest::Approx(1.0));
  const double soft = quality_score(testing::checker_image(16, 16, 4, 0.45, 0.55));
  CHECK(soft > 0.0);
  CHECK(soft < 1.0);
  CHECK_THROWS_AS(quality_score(testing::constant_image(7, 7, 0.5)), ShapeError);
  CHECK_NOTHROW(quality_score(testing::constant_image(8, 8, 0.5)));
}

TEST_CASE("score normalization is min-max with a constant fallback") {
  Eigen::ArrayXXd raw(1, 3);
  raw << 1.0, 2.0, 3.0;
  const Eigen::ArrayXXd n = normalize_scores(raw);
  CHECK(n(0, 0) == 0.0);
  CHECK(n(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n(0, 2) == 1.0);
  const Eigen::ArrayXXd flat = normalize_scores(Eigen::ArrayXXd::Constant(2, 2, 0.8));
  CHECK((flat - 0.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("patch scoring normalizes within the image") {
  // Top-left quadrant hazy (bright, flat), rest textured and darker.
  Image img = testing::checker_image(32, 32, 2, 0.1, 0.6);
  for (int c = 0; c < 3; ++c) {
    img[c].block(0, 0, 16, 16).setConstant(0.9);
  }
  const PatchScores scores = score_image(img, 2);
  REQUIRE(scores.n == 2);
  REQUIRE(scores.d.rows() == 2);
  // The hazy quadrant is the worst on both axes -> normalized zero.
  CHECK(scores.d(0, 0) == doctest::Approx(0.0));
  CHECK(scores.q(0, 0) == doctest::Approx(0.0));
  CHECK(scores.d.maxCoeff() == doctest::Approx(1.0));
  CHECK(scores.q.maxCoeff() == doctest::Approx(1.0));
  CHECK(scores.mean_d() == doctest::Approx(scores.d.mean()));

  // Single-patch layout degenerates to the constant fallback.
  const PatchScores one = score_image(img, 1);
  CHECK(one.d(0, 0) == 0.5);
  CHECK(one.q(0, 0) == 0.5);
}

TEST_CASE("trust weights combine scores and interpolate between patch centers") {
  PatchScores scores;
  scores.n = 2;
  scores.d = Eigen::ArrayXXd(2, 2);
  scores.q = Eigen::ArrayXXd(2, 2);
  scores.d << 1.0, 0.5, 0.25, 0.0;
  scores.q << 0.5, 1.0, 1.0, 0.0;

  const TrustWeight prod = trust_weight(scores, 16, 16, WeightCombine::kProduct);
  const TrustWeight sum = trust_weight(scores, 16, 16, WeightCombine::kSum);
  // Patch centers for a 16x16 image with n=2 sit at 3.5 and 11.5; corner
  // pixels clamp to the nearest center value.
  CHECK(prod.map(0, 0) == doctest::Approx(1.0 * 0.5).epsilon(1e-12));
  CHECK(prod.map(15, 15) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sum.map(0, 0) == doctest::Approx(0.5 * (1.0 + 0.5)).epsilon(1e-12));
  CHECK(sum.map(15, 0) == doctest::Approx(0.5 * (0.25 + 1.0)).epsilon(1e-12));
  CHECK(prod.map.minCoeff() >= 0.0);
  CHECK(prod.map.maxCoeff() <= 1.0);
  CHECK(sum.map.minCoeff() >= 0.0);
  CHECK(sum.map.maxCoeff() <= 1.0);

  // Constant scores give a constant map equal to the combined value.
  PatchScores flat;
  flat.n = 2;
  flat.d = Eigen::ArrayXXd::Constant(2, 2, 0.6);
  flat.q = Eigen::ArrayXXd::Constant(2, 2, 0.5);
  CHECK((trust_weight(flat, 10, 10, WeightCombine::kProduct).map - 0.3).abs().maxCoeff() <=
        1e-12);
  CHECK((trust_weight(flat, 10, 10, WeightCombine::kSum).map - 0.55).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("patch scores serialize and round trip") {
  Image img = testing::checker_image(24, 24, 3, 0.2, 0.7);
  img[0].block(0, 0, 12, 12).setConstant(0.85);
  const PatchScores scores = score_image(img, 3);
  const nlohmann::json j = to_json(scores);
  CHECK(j.at("n").get<int>() == 3);
  CHECK(j.at("d").size() == 3);
  CHECK(j.at("mean_d").get<double>() == doctest::Approx(scores.mean_d()));
  const PatchScores back = patch_scores_from_json(j);
  CHECK(back.n == scores.n);
  CHECK((back.d - scores.d).abs().maxCoeff() == 0.0);
  CHECK((back.q - scores.q).abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(patch_scores_from_json(nlohmann::json{{"n", 2}}), FormatError);
}
