#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace unhaze {

// A single image channel. Row index = y (top to bottom), column index = x.
using Plane = Eigen::ArrayXXd;

// Transmission maps are clamped to [kTransmissionFloor, 1] everywhere so the
// scattering model stays invertible.
inline constexpr double kTransmissionFloor = 0.05;

// Planar image with 1 (gray) or 3 (RGB) channels, values in [0, 1].
struct Image {
  std::vector<Plane> planes;

  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);

  int height() const { return planes.empty() ? 0 : static_cast<int>(planes[0].rows()); }
  int width() const { return planes.empty() ? 0 : static_cast<int>(planes[0].cols()); }
  int channels() const { return static_cast<int>(planes.size()); }

  Plane& operator[](int c) { return planes[static_cast<size_t>(c)]; }
  const Plane& operator[](int c) const { return planes[static_cast<size_t>(c)]; }

  bool same_shape(const Image& other) const;
};

// Per-pixel transmission in [t_floor, 1].
struct Transmission {
  Plane map;

  int height() const { return static_cast<int>(map.rows()); }
  int width() const { return static_cast<int>(map.cols()); }
};

// Validation helpers; throw ShapeError on violation.
void require_valid(const Image& img);
void require_valid(const Transmission& t, double t_floor = kTransmissionFloor);
void require_same_shape(const Image& a, const Image& b);
void require_same_shape(const Image& img, const Transmission& t);

// Rec.601 luma for RGB; identity for grayscale.
Plane luminance(const Image& img);

// Value-clamped copy, every channel forced into [0, 1].
Image clamped01(Image img);
Plane clamped01(Plane p);

// Quantization to the 8-bit grid. Scales by 255 and rounds half to even, so
// results match across platforms regardless of FPU rounding mode.
std::uint8_t quantize8(double v);
Image quantized8(const Image& img);

// Uniform n-by-n grid partition; the last row/column absorbs the remainder.
struct Patch {
  int y0 = 0;
  int x0 = 0;
  int height = 0;
  int width = 0;
};

struct PatchLayout {
  int n = 0;
  int image_height = 0;
  int image_width = 0;
  std::vector<Patch> patches;  // row-major, n*n entries

  const Patch& at(int i, int j) const { return patches[static_cast<size_t>(i * n + j)]; }
  // Patch centers in pixel coordinates; used to anchor bilinear upsampling.
  double center_y(int i) const;
  double center_x(int j) const;
};

PatchLayout partition(int height, int width, int n);

Plane crop(const Plane& p, const Patch& patch);
Image crop(const Image& img, const Patch& patch);
Plane hflip(const Plane& p);
Image hflip(const Image& img);

double mean_abs_diff(const Image& a, const Image& b);
double max_abs_diff(const Image& a, const Image& b);

}  // namespace unhaze
