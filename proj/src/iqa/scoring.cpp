#include "unhaze/iqa/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "unhaze/core/error.hpp"
#include "unhaze/core/filters.hpp"

namespace unhaze {

double density_score(const Image& patch) {
  return 1.0 - dark_channel(patch, kDensityWindow).mean();
}

double quality_score(const Image& patch) {
  if (patch.height() < kMinQualityPatch || patch.width() < kMinQualityPatch) {
    throw ShapeError("quality score needs a patch of at least 8x8");
  }
  const Plane luma = luminance(patch);
  const double rms = std::sqrt((luma - luma.mean()).square().mean());
  const double grad = gradient_magnitude(luma).mean();
  const double contrast_term = std::min(rms / kContrastNorm, 1.0);
  const double gradient_term = std::min(grad / kGradientNorm, 1.0);
  return 0.5 * contrast_term + 0.5 * gradient_term;
}

double image_density(const Image& img) { return dark_channel(img, kDensityWindow).mean(); }

Eigen::ArrayXXd normalize_scores(const Eigen::ArrayXXd& raw) {
  const double lo = raw.minCoeff();
  const double hi = raw.maxCoeff();
  if (hi - lo <= 0.0) {
    return Eigen::ArrayXXd::Constant(raw.rows(), raw.cols(), 0.5);
  }
  return (raw - lo) / (hi - lo);
}

PatchScores score_image(const Image& img, int n) {
  require_valid(img);
  const PatchLayout layout = partition(img.height(), img.width(), n);
  Eigen::ArrayXXd raw_d(n, n);
  Eigen::ArrayXXd raw_q(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Image patch = crop(img, layout.at(i, j));
      raw_d(i, j) = density_score(patch);
      raw_q(i, j) = quality_score(patch);
    }
  }
  return PatchScores{n, normalize_scores(raw_d), normalize_scores(raw_q)};
}

TrustWeight trust_weight(const PatchScores& scores, int height, int width,
                         WeightCombine combine) {
  const int n = scores.n;
  if (n <= 0 || scores.d.rows() != n || scores.q.rows() != n) {
    throw ShapeError("invalid patch score grid");
  }
  Eigen::ArrayXXd w = combine == WeightCombine::kProduct
                          ? Eigen::ArrayXXd(scores.d * scores.q)
                          : Eigen::ArrayXXd(0.5 * (scores.d + scores.q));
  const PatchLayout layout = partition(height, width, n);
  std::vector<double> ys(static_cast<size_t>(n));
  std::vector<double> xs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ys[static_cast<size_t>(i)] = layout.center_y(i);
  for (int j = 0; j < n; ++j) xs[static_cast<size_t>(j)] = layout.center_x(j);
  return TrustWeight{clamped01(upsample_bilinear(w, ys, xs, height, width))};
}

nlohmann::json to_json(const PatchScores& scores) {
  auto grid = [](const Eigen::ArrayXXd& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < a.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  return nlohmann::json{{"n", scores.n},
                        {"d", grid(scores.d)},
                        {"q", grid(scores.q)},
                        {"mean_d", scores.mean_d()},
                        {"mean_q", scores.mean_q()}};
}

PatchScores patch_scores_from_json(const nlohmann::json& j) {
  PatchScores s;
  try {
    s.n = j.at("n").get<int>();
    if (s.n <= 0) throw FormatError("scores.json: n must be positive");
    s.d.resize(s.n, s.n);
    s.q.resize(s.n, s.n);
    for (int i = 0; i < s.n; ++i) {
      for (int k = 0; k < s.n; ++k) {
        s.d(i, k) = j.at("d").at(i).at(k).get<double>();
        s.q(i, k) = j.at("q").at(i).at(k).get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad scores.json: ") + e.what());
  }
  return s;
}

}  // namespace unhaze
