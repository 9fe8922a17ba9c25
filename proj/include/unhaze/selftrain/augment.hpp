#pragma once

#include <optional>
#include <vector>

#include "unhaze/core/rng.hpp"
#include "unhaze/core/types.hpp"

namespace unhaze {

// Strong (photometric-only) augmentation ops. Geometric warps are
// deliberately absent: pseudo labels must stay pixel-aligned with inputs.
enum class StrongOpKind {
  kContrast,      // pivot 0.5, factor in magnitude range
  kBrightness,    // multiplicative gain
  kPosterize,     // quantize to k levels, k drawn from [lo, hi]
  kSharpness,     // unsharp masking, amount in magnitude range
  kJpeg,          // block-DCT luma quantization, quality in [lo, hi]
  kGaussianBlur,  // sigma in magnitude range
};

struct StrongOp {
  StrongOpKind kind = StrongOpKind::kContrast;
  double prob = 0.5;
  double lo = 1.0;  // magnitude range (levels/quality for the integer ops)
  double hi = 1.0;
};

struct WeakAugment {
  int crop_size = 0;        // 0 disables cropping
  double hflip_prob = 0.5;
};

struct AugmentorConfig {
  std::vector<StrongOp> strong;
  WeakAugment weak;
};

AugmentorConfig default_augmentor();
void require_valid(const AugmentorConfig& cfg);

// Individual photometric ops (all clamp to [0,1]).
Image adjust_contrast(const Image& img, double factor);
Image adjust_brightness(const Image& img, double factor);
Image posterize(const Image& img, int levels);
Image sharpen(const Image& img, double amount);
// Compression artifacts via 8x8 block-DCT quantization of the luma channel
// with the standard quality-scaled table; no entropy coding round trip.
Image jpeg_artifacts(const Image& img, int quality);

// Applies each configured op in order with its own probability/magnitude
// draw. Same rng key => identical output; all probabilities zero => the
// input is returned untouched.
Image strong_augment(const Image& img, const std::vector<StrongOp>& ops, Rng& rng);

// Weak geometric augmentation: one crop window and one flip decision applied
// identically to the image and any paired ground truth / transmission, so
// pixel correspondences (and the scattering identity) are preserved.
struct WeakAugmented {
  Image image;
  std::optional<Image> gt;
  std::optional<Transmission> t;
};

WeakAugmented weak_augment(const Image& img, const std::optional<Image>& gt,
                           const std::optional<Transmission>& t, const WeakAugment& cfg,
                           Rng& rng);

}  // namespace unhaze
