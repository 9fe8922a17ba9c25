#include "unhaze/core/types.hpp"

#include <cmath>
#include <string>

#include "unhaze/core/error.hpp"

namespace unhaze {

Image::Image(int height, int width, int channels, double fill) {
  if (height <= 0 || width <= 0 || (channels != 1 && channels != 3)) {
    throw ShapeError("image dimensions must be positive with 1 or 3 channels");
  }
  planes.assign(static_cast<size_t>(channels), Plane::Constant(height, width, fill));
}

bool Image::same_shape(const Image& other) const {
  return channels() == other.channels() && height() == other.height() &&
         width() == other.width();
}

void require_valid(const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw ShapeError("image must have 1 or 3 channels, got " +
                     std::to_string(img.channels()));
  }
  const int h = img.height();
  const int w = img.width();
  if (h <= 0 || w <= 0) throw ShapeError("image has empty plane");
  for (const Plane& p : img.planes) {
    if (p.rows() != h || p.cols() != w) throw ShapeError("image planes disagree on shape");
    if (!p.isFinite().all()) throw ShapeError("image contains non-finite values");
    if ((p < 0.0).any() || (p > 1.0).any()) {
      throw ShapeError("image values outside [0, 1]");
    }
  }
}

void require_valid(const Transmission& t, double t_floor) {
  if (t.map.rows() <= 0 || t.map.cols() <= 0) throw ShapeError("empty transmission map");
  if (!t.map.isFinite().all()) throw ShapeError("transmission contains non-finite values");
  if ((t.map < t_floor - 1e-12).any() || (t.map > 1.0 + 1e-12).any()) {
    throw ShapeError("transmission values outside [t_floor, 1]");
  }
}

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("images disagree on shape");
}

void require_same_shape(const Image& img, const Transmission& t) {
  if (img.height() != t.height() || img.width() != t.width()) {
    throw ShapeError("transmission map does not match image shape");
  }
}

Plane luminance(const Image& img) {
  if (img.channels() == 1) return img[0];
  return 0.299 * img[0] + 0.587 * img[1] + 0.114 * img[2];
}

Plane clamped01(Plane p) { return p.max(0.0).min(1.0); }

Image clamped01(Image img) {
  for (Plane& p : img.planes) p = clamped01(std::move(p));
  return img;
}

std::uint8_t quantize8(double v) {
  double x = v * 255.0;
  if (!(x > 0.0)) return 0;
  if (x >= 255.0) return 255;
  double lo = std::floor(x);
  double frac = x - lo;
  double r;
  if (frac > 0.5) {
    r = lo + 1.0;
  } else if (frac < 0.5) {
    r = lo;
  } else {
    // Exact tie: round half to even.
    r = (std::fmod(lo, 2.0) == 0.0) ? lo : lo + 1.0;
  }
  return static_cast<std::uint8_t>(r);
}

Image quantized8(const Image& img) {
  Image out = img;
  for (Plane& p : out.planes) {
    p = p.unaryExpr([](double v) { return quantize8(v) / 255.0; });
  }
  return out;
}

double PatchLayout::center_y(int i) const {
  const Patch& p = at(i, 0);
  return p.y0 + (p.height - 1) / 2.0;
}

double PatchLayout::center_x(int j) const {
  const Patch& p = at(0, j);
  return p.x0 + (p.width - 1) / 2.0;
}

PatchLayout partition(int height, int width, int n) {
  if (n <= 0) throw ShapeError("patch grid size must be positive");
  if (height < n || width < n) {
    throw ShapeError("image smaller than requested patch grid");
  }
  PatchLayout layout;
  layout.n = n;
  layout.image_height = height;
  layout.image_width = width;
  layout.patches.reserve(static_cast<size_t>(n) * n);
  const int base_h = height / n;
  const int base_w = width / n;
  for (int i = 0; i < n; ++i) {
    const int y0 = i * base_h;
    const int h = (i == n - 1) ? height - y0 : base_h;
    for (int j = 0; j < n; ++j) {
      const int x0 = j * base_w;
      const int w = (j == n - 1) ? width - x0 : base_w;
      layout.patches.push_back(Patch{y0, x0, h, w});
    }
  }
  return layout;
}

Plane crop(const Plane& p, const Patch& patch) {
  return p.block(patch.y0, patch.x0, patch.height, patch.width);
}

Image crop(const Image& img, const Patch& patch) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const Plane& p : img.planes) out.planes.push_back(crop(p, patch));
  return out;
}

Plane hflip(const Plane& p) { return p.rowwise().reverse(); }

Image hflip(const Image& img) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const Plane& p : img.planes) out.planes.push_back(hflip(p));
  return out;
}

double mean_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b);
  double acc = 0.0;
  for (int c = 0; c < a.channels(); ++c) acc += (a[c] - b[c]).abs().mean();
  return acc / a.channels();
}

double max_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b);
  double m = 0.0;
  for (int c = 0; c < a.channels(); ++c) m = std::max(m, (a[c] - b[c]).abs().maxCoeff());
  return m;
}

}  // namespace unhaze
