#include "unhaze/selftrain/augment.hpp"

#include <array>
#include <cmath>

#include "unhaze/core/error.hpp"
#include "unhaze/core/filters.hpp"

namespace unhaze {

AugmentorConfig default_augmentor() {
  AugmentorConfig cfg;
  cfg.strong = {
      {StrongOpKind::kContrast, 0.5, 0.6, 1.4},
      {StrongOpKind::kBrightness, 0.5, 0.7, 1.3},
      {StrongOpKind::kPosterize, 0.25, 4.0, 8.0},
      {StrongOpKind::kSharpness, 0.3, 0.2, 1.5},
      {StrongOpKind::kJpeg, 0.3, 30.0, 80.0},
      {StrongOpKind::kGaussianBlur, 0.3, 0.3, 1.2},
  };
  return cfg;
}

void require_valid(const AugmentorConfig& cfg) {
  for (const StrongOp& op : cfg.strong) {
    if (!(op.prob >= 0.0 && op.prob <= 1.0)) {
      throw ConfigError("augment op probability must lie in [0, 1]");
    }
    if (!(op.lo <= op.hi)) throw ConfigError("augment magnitude range inverted");
    switch (op.kind) {
      case StrongOpKind::kContrast:
      case StrongOpKind::kBrightness:
        if (op.lo < 0.0 || op.hi > 4.0) throw ConfigError("gain outside safe range [0, 4]");
        break;
      case StrongOpKind::kPosterize:
        if (op.lo < 2.0 || op.hi > 256.0) throw ConfigError("posterize levels outside [2, 256]");
        break;
      case StrongOpKind::kSharpness:
        if (op.lo < 0.0 || op.hi > 4.0) throw ConfigError("sharpness outside safe range [0, 4]");
        break;
      case StrongOpKind::kJpeg:
        if (op.lo < 1.0 || op.hi > 100.0) throw ConfigError("jpeg quality outside [1, 100]");
        break;
      case StrongOpKind::kGaussianBlur:
        if (op.lo < 0.0 || op.hi > 8.0) throw ConfigError("blur sigma outside safe range [0, 8]");
        break;
    }
  }
  if (!(cfg.weak.hflip_prob >= 0.0 && cfg.weak.hflip_prob <= 1.0)) {
    throw ConfigError("hflip probability must lie in [0, 1]");
  }
  if (cfg.weak.crop_size < 0) throw ConfigError("crop size must be >= 0");
}

Image adjust_contrast(const Image& img, double factor) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const Plane& p : img.planes) {
    out.planes.push_back(clamped01(Plane(0.5 + factor * (p - 0.5))));
  }
  return out;
}

Image adjust_brightness(const Image& img, double factor) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const Plane& p : img.planes) out.planes.push_back(clamped01(Plane(factor * p)));
  return out;
}

Image posterize(const Image& img, int levels) {
  if (levels < 2) throw ConfigError("posterize needs at least 2 levels");
  const double steps = levels - 1;
  Image out;
  out.planes.reserve(img.planes.size());
  for (const Plane& p : img.planes) {
    out.planes.push_back(Plane((p * steps).round() / steps));
  }
  return out;
}

Image sharpen(const Image& img, double amount) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const Plane& p : img.planes) {
    out.planes.push_back(clamped01(Plane(p + amount * (p - gaussian_blur(p, 1.0)))));
  }
  return out;
}

namespace {

// Orthonormal 8-point DCT-II basis.
Eigen::Matrix<double, 8, 8> dct8_basis() {
  Eigen::Matrix<double, 8, 8> c;
  const double pi = std::acos(-1.0);
  for (int u = 0; u < 8; ++u) {
    const double scale = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
    for (int x = 0; x < 8; ++x) {
      c(u, x) = scale * std::cos((2 * x + 1) * u * pi / 16.0);
    }
  }
  return c;
}

// Standard luminance quantization table.
constexpr std::array<int, 64> kJpegLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

Eigen::Matrix<double, 8, 8> quant_table(int quality) {
  const int q = std::clamp(quality, 1, 100);
  const int scale = q < 50 ? 5000 / q : 200 - 2 * q;
  Eigen::Matrix<double, 8, 8> t;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const int v = (kJpegLumaBase[static_cast<size_t>(i * 8 + j)] * scale + 50) / 100;
      t(i, j) = std::clamp(v, 1, 255);
    }
  }
  return t;
}

// Quantizes a luma plane (unit range) blockwise in the 8-bit JPEG domain.
Plane quantize_luma(const Plane& luma, int quality) {
  const int h = static_cast<int>(luma.rows());
  const int w = static_cast<int>(luma.cols());
  const int ph = (h + 7) / 8 * 8;
  const int pw = (w + 7) / 8 * 8;
  // Edge-replicate pad to a multiple of 8.
  Eigen::MatrixXd padded(ph, pw);
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      padded(y, x) = luma(std::min(y, h - 1), std::min(x, w - 1)) * 255.0 - 128.0;
    }
  }
  const Eigen::Matrix<double, 8, 8> basis = dct8_basis();
  const Eigen::Matrix<double, 8, 8> table = quant_table(quality);
  for (int by = 0; by < ph; by += 8) {
    for (int bx = 0; bx < pw; bx += 8) {
      Eigen::Matrix<double, 8, 8> block = padded.block<8, 8>(by, bx);
      Eigen::Matrix<double, 8, 8> coef = basis * block * basis.transpose();
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          coef(i, j) = std::round(coef(i, j) / table(i, j)) * table(i, j);
        }
      }
      padded.block<8, 8>(by, bx) = basis.transpose() * coef * basis;
    }
  }
  Plane out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(y, x) = (padded(y, x) + 128.0) / 255.0;
  }
  return clamped01(std::move(out));
}

}  // namespace

Image jpeg_artifacts(const Image& img, int quality) {
  if (img.channels() == 1) {
    Image out;
    out.planes.push_back(quantize_luma(img[0], quality));
    return out;
  }
  // BT.601 full-range: quantize luma only, keep chroma untouched.
  const Plane y = 0.299 * img[0] + 0.587 * img[1] + 0.114 * img[2];
  const Plane cb = -0.168736 * img[0] - 0.331264 * img[1] + 0.5 * img[2];
  const Plane cr = 0.5 * img[0] - 0.418688 * img[1] - 0.081312 * img[2];
  const Plane yq = quantize_luma(y, quality);
  Image out;
  out.planes.push_back(clamped01(Plane(yq + 1.402 * cr)));
  out.planes.push_back(clamped01(Plane(yq - 0.344136 * cb - 0.714136 * cr)));
  out.planes.push_back(clamped01(Plane(yq + 1.772 * cb)));
  return out;
}

Image strong_augment(const Image& img, const std::vector<StrongOp>& ops, Rng& rng) {
  Image out = img;
  for (const StrongOp& op : ops) {
    if (!rng.bernoulli(op.prob)) continue;
    switch (op.kind) {
      case StrongOpKind::kContrast:
        out = adjust_contrast(out, rng.uniform(op.lo, op.hi));
        break;
      case StrongOpKind::kBrightness:
        out = adjust_brightness(out, rng.uniform(op.lo, op.hi));
        break;
      case StrongOpKind::kPosterize: {
        const int lo = static_cast<int>(std::lround(op.lo));
        const int hi = static_cast<int>(std::lround(op.hi));
        out = posterize(out, lo + static_cast<int>(rng.below(
                                 static_cast<std::uint64_t>(hi - lo + 1))));
        break;
      }
      case StrongOpKind::kSharpness:
        out = sharpen(out, rng.uniform(op.lo, op.hi));
        break;
      case StrongOpKind::kJpeg:
        out = jpeg_artifacts(
            out, static_cast<int>(std::lround(rng.uniform(op.lo, op.hi))));
        break;
      case StrongOpKind::kGaussianBlur:
        out = gaussian_blur(out, rng.uniform(op.lo, op.hi));
        break;
    }
  }
  return out;
}

WeakAugmented weak_augment(const Image& img, const std::optional<Image>& gt,
                           const std::optional<Transmission>& t, const WeakAugment& cfg,
                           Rng& rng) {
  if (gt) require_same_shape(img, *gt);
  if (t) require_same_shape(img, *t);
  WeakAugmented out{img, gt, t};
  if (cfg.crop_size > 0) {
    if (cfg.crop_size > img.height() || cfg.crop_size > img.width()) {
      throw ShapeError("crop size exceeds image dimensions");
    }
    const int y0 = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(img.height() - cfg.crop_size + 1)));
    const int x0 = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(img.width() - cfg.crop_size + 1)));
    const Patch window{y0, x0, cfg.crop_size, cfg.crop_size};
    out.image = crop(out.image, window);
    if (out.gt) out.gt = crop(*out.gt, window);
    if (out.t) out.t = Transmission{crop(out.t->map, window)};
  }
  if (rng.bernoulli(cfg.hflip_prob)) {
    out.image = hflip(out.image);
    if (out.gt) out.gt = hflip(*out.gt);
    if (out.t) out.t = Transmission{hflip(out.t->map)};
  }
  return out;
}

}  // namespace unhaze
