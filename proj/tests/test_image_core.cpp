#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_images.hpp"
#include "unhaze/core/error.hpp"
#include "unhaze/core/rng.hpp"
#include "unhaze/core/types.hpp"

using namespace unhaze;

TEST_CASE("image construction and shape accessors") {
  Image img(4, 6, 3, 0.25);
  CHECK(img.height() == 4);
  CHECK(img.width() == 6);
  CHECK(img.channels() == 3);
  CHECK(img[2](3, 5) == 0.25);
  CHECK(img.same_shape(Image(4, 6, 3)));
  CHECK_FALSE(img.same_shape(Image(4, 6, 1)));
  CHECK_FALSE(img.same_shape(Image(6, 4, 3)));
}

TEST_CASE("image validation rejects bad channel counts, range, and non-finite values") {
  CHECK_NOTHROW(require_valid(Image(2, 2, 1, 0.5)));
  CHECK_NOTHROW(require_valid(Image(2, 2, 3, 1.0)));
  CHECK_THROWS_AS(require_valid(Image(2, 2, 2, 0.5)), ShapeError);
  Image over(2, 2, 3, 0.5);
  over[1](0, 0) = 1.0001;
  CHECK_THROWS_AS(require_valid(over), ShapeError);
  Image nan(2, 2, 3, 0.5);
  nan[0](1, 1) = std::nan("");
  CHECK_THROWS_AS(require_valid(nan), ShapeError);
}

TEST_CASE("transmission validation") {
  CHECK_NOTHROW(require_valid(Transmission{Plane::Constant(2, 2, 0.05)}, 0.05));
  CHECK_NOTHROW(require_valid(Transmission{Plane::Constant(2, 2, 1.0)}, 0.05));
  CHECK_THROWS_AS(require_valid(Transmission{Plane::Constant(2, 2, 0.0499)}, 0.05),
                  ShapeError);
  CHECK_THROWS_AS(require_valid(Transmission{Plane::Constant(2, 2, 1.001)}, 0.05),
                  ShapeError);
}

TEST_CASE("luminance uses standard weights") {
  Image red(2, 2, 3, 0.0);
  red[0].setConstant(1.0);
  CHECK(luminance(red)(0, 0) == doctest::Approx(0.299).epsilon(1e-12));
  Image green(2, 2, 3, 0.0);
  green[1].setConstant(1.0);
  CHECK(luminance(green)(0, 0) == doctest::Approx(0.587).epsilon(1e-12));
  Image blue(2, 2, 3, 0.0);
  blue[2].setConstant(1.0);
  CHECK(luminance(blue)(0, 0) == doctest::Approx(0.114).epsilon(1e-12));
  Image gray(2, 2, 1, 0.4);
  CHECK(luminance(gray)(1, 1) == 0.4);
}

TEST_CASE("quantize8 rounds half to even") {
  CHECK(quantize8(0.0) == 0);
  CHECK(quantize8(1.0) == 255);
  CHECK(quantize8(0.5) == 128);   // 127.5 -> even neighbor is 128
  CHECK(quantize8(0.3) == 76);    // 76.5 -> even neighbor is 76
  CHECK(quantize8(0.1) == 26);    // 25.5 -> even neighbor is 26
  CHECK(quantize8(76.4999 / 255.0) == 76);
  CHECK(quantize8(76.5001 / 255.0) == 77);
}

TEST_CASE("quantized8 snaps to the 8-bit grid and is idempotent") {
  const Image img = testing::noise_image(9, 7, 3, 41);
  const Image q = quantized8(img);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 7; ++x) {
        const double v = q[c](y, x);
        CHECK(v * 255.0 == doctest::Approx(std::round(v * 255.0)).epsilon(1e-12));
        CHECK(std::abs(v - img[c](y, x)) <= 0.5 / 255.0 + 1e-12);
      }
    }
  }
  CHECK(max_abs_diff(quantized8(q), q) == 0.0);
  CHECK(quantized8(Image(1, 1, 1, 128.0 / 255.0))[0](0, 0) == 128.0 / 255.0);
}

TEST_CASE("clamping") {
  Plane p(1, 3);
  p << -0.5, 0.5, 1.5;
  const Plane c = clamped01(p);
  CHECK(c(0, 0) == 0.0);
  CHECK(c(0, 1) == 0.5);
  CHECK(c(0, 2) == 1.0);
}

TEST_CASE("patch partition covers the image with floor-sized cells and remainder at the end") {
  const PatchLayout layout = partition(10, 10, 3);
  CHECK(layout.n == 3);
  CHECK(layout.patches.size() == 9);
  // Rows: 3, 3, 4 (last absorbs the remainder); same for columns.
  CHECK(layout.at(0, 0).height == 3);
  CHECK(layout.at(2, 2).height == 4);
  CHECK(layout.at(2, 2).width == 4);
  CHECK(layout.at(2, 0).y0 == 6);
  int area = 0;
  for (const Patch& p : layout.patches) area += p.height * p.width;
  CHECK(area == 100);
  // 128x128 with n=8: 64 exactly equal 16x16 patches.
  const PatchLayout big = partition(128, 128, 8);
  for (const Patch& p : big.patches) {
    CHECK(p.height == 16);
    CHECK(p.width == 16);
  }
  CHECK(big.center_y(0) == doctest::Approx(7.5));
  CHECK(big.center_x(7) == doctest::Approx(112 + 7.5));
}

TEST_CASE("partition rejects degenerate grids") {
  CHECK_THROWS_AS(partition(10, 10, 0), ShapeError);
  CHECK_THROWS_AS(partition(2, 10, 3), ShapeError);
}

TEST_CASE("crop and hflip") {
  const Image img = testing::ramp_image(6, 8);
  const Patch p{1, 2, 3, 4};
  const Image c = crop(img, p);
  CHECK(c.height() == 3);
  CHECK(c.width() == 4);
  CHECK(c[1](0, 0) == img[1](1, 2));
  CHECK(c[2](2, 3) == img[2](3, 5));

  const Image f = hflip(img);
  CHECK(f[0](0, 0) == img[0](0, 7));
  CHECK(max_abs_diff(hflip(f), img) == 0.0);
}

TEST_CASE("difference reductions") {
  Image a(2, 2, 1, 0.5);
  Image b(2, 2, 1, 0.5);
  b[0](0, 0) = 0.9;
  CHECK(max_abs_diff(a, b) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(mean_abs_diff(a, b) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(max_abs_diff(a, a) == 0.0);
}

TEST_CASE("rng streams are deterministic and key-separated") {
  Rng a(RngKey::root(7).derive("stream"));
  Rng b(RngKey::root(7).derive("stream"));
  Rng c(RngKey::root(7).derive("other"));
  bool all_equal = true;
  bool any_diff_c = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.uniform();
    CHECK(va >= 0.0);
    CHECK(va < 1.0);
    if (va != b.uniform()) all_equal = false;
    if (va != c.uniform()) any_diff_c = true;
  }
  CHECK(all_equal);
  CHECK(any_diff_c);

  Rng d(RngKey::root(7).derive(std::uint64_t{3}));
  Rng e(RngKey::root(7).derive(std::uint64_t{4}));
  CHECK(d.uniform() != e.uniform());
}

TEST_CASE("rng helpers stay in range") {
  Rng rng(RngKey::root(99));
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(2.0, 5.0);
    CHECK(u >= 2.0);
    CHECK(u < 5.0);
    const std::uint64_t k = rng.below(7);
    CHECK(k < 7);
  }
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
