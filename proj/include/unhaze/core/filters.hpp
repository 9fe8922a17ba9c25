#pragma once

#include <vector>

#include "unhaze/core/types.hpp"

namespace unhaze {

// Mirror index into [0, n) without repeating the edge sample:
// positions ... d c b | a b c d ... w x y z | y x w ...
int reflect_index(int i, int n);

// Normalized box filter of half-width `radius` with mirror padding. The
// effective radius is clamped to dim-1 on each axis so mirroring stays
// well-defined on small inputs.
Plane box_mean(const Plane& p, int radius);

// Morphological erosion (windowed minimum). The window is clipped at the
// borders, which matches mirror padding exactly for a min filter.
Plane min_filter(const Plane& p, int radius);

// Per-pixel channel minimum followed by a windowed minimum. `window` is the
// full side length and must be odd.
Plane dark_channel(const Image& img, int window);

// Gaussian blur with kernel truncated at 3 sigma, mirror padding.
// sigma <= 0 returns the input unchanged.
Plane gaussian_blur(const Plane& p, double sigma);
Image gaussian_blur(const Image& img, double sigma);

// Smooth-then-decimate by 2 using the binomial kernel [1 4 6 4 1]/16.
// Output dimensions are ceil(n / 2); keeps even-indexed samples.
Plane downsample_half(const Plane& p);

// Forward-difference gradient magnitude; the last row/column use a zero
// one-sided difference.
Plane gradient_magnitude(const Plane& p);

// Edge-preserving smoothing of `src` steered by `guide` (He-style local
// linear model): q = mean(a) * guide + mean(b) with a,b fit over box windows.
Plane guided_filter(const Plane& guide, const Plane& src, int radius, double eps);

// Joint bilateral filter: one range kernel computed on `guide` reweights a
// spatial Gaussian; the same weights are applied to every channel of `src`.
Image joint_bilateral(const Image& src, const Plane& guide, int radius, double sigma_s,
                      double sigma_r);

// Bilinear interpolation of a coarse grid of values anchored at
// (anchor_y[i], anchor_x[j]) up to a full-resolution plane. Pixels outside
// the anchor hull clamp to the nearest anchor row/column.
Plane upsample_bilinear(const Eigen::ArrayXXd& values, const std::vector<double>& anchor_y,
                        const std::vector<double>& anchor_x, int height, int width);

}  // namespace unhaze
