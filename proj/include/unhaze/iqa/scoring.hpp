#pragma once

#include <json.hpp>

#include "unhaze/core/types.hpp"

namespace unhaze {

// Haze-density and quality statistics standing in for learned evaluators.
// Conventions: density_score and quality_score are "higher = better"
// (less haze, sharper); image_density is a LOSS (lower = less haze).

inline constexpr int kDensityWindow = 7;
inline constexpr int kMinQualityPatch = 8;
inline constexpr double kContrastNorm = 0.25;   // rms contrast saturating at 1
inline constexpr double kGradientNorm = 0.15;   // mean gradient saturating at 1

// 1 - mean dark channel of the patch; higher = less haze.
double density_score(const Image& patch);

// 0.5 * clamped rms contrast + 0.5 * clamped mean gradient magnitude of the
// luminance. Patches must be at least 8x8.
double quality_score(const Image& patch);

// Mean dark channel over the whole image, as a loss (lower = less haze).
double image_density(const Image& img);

// Min-max normalization to [0,1]; a constant vector maps to all 0.5.
Eigen::ArrayXXd normalize_scores(const Eigen::ArrayXXd& raw);

struct PatchScores {
  int n = 0;
  Eigen::ArrayXXd d;  // normalized density scores, n x n
  Eigen::ArrayXXd q;  // normalized quality scores, n x n

  double mean_d() const { return d.mean(); }
  double mean_q() const { return q.mean(); }
};

// Scores every patch of an n-by-n partition and normalizes within the image.
PatchScores score_image(const Image& img, int n);

struct TrustWeight {
  Plane map;  // full-resolution weights in [0,1]
};

enum class WeightCombine { kProduct, kSum };

// Per-patch weight d*q (or the mean (d+q)/2 in sum mode, keeping [0,1]),
// bilinearly upsampled from patch centers to full resolution.
TrustWeight trust_weight(const PatchScores& scores, int height, int width,
                         WeightCombine combine = WeightCombine::kProduct);

// scores.json layout: {n, d:[[...]], q:[[...]], mean_d, mean_q}.
nlohmann::json to_json(const PatchScores& scores);
PatchScores patch_scores_from_json(const nlohmann::json& j);

}  // namespace unhaze
