#include "unhaze/objectives/losses.hpp"

#include "unhaze/core/error.hpp"
#include "unhaze/core/filters.hpp"

namespace unhaze {

void require_valid(const ObjectiveConfig& cfg) {
  if (cfg.beta_c < 0.0 || cfg.rho_r < 0.0 || cfg.rho_c < 0.0) {
    throw ConfigError("objective weights must be >= 0");
  }
  if (cfg.pyramid_levels < 1 ||
      cfg.tau.size() != static_cast<size_t>(cfg.pyramid_levels)) {
    throw ConfigError("tau must list one weight per pyramid level");
  }
  for (double t : cfg.tau) {
    if (t < 0.0) throw ConfigError("tau weights must be >= 0");
  }
}

std::vector<Plane> feature_pyramid(const Image& img, int levels) {
  if (levels < 1) throw ConfigError("pyramid needs at least one level");
  const int min_side = 1 << levels;
  if (img.height() < min_side || img.width() < min_side) {
    throw ShapeError("image too small for requested pyramid depth");
  }
  std::vector<Plane> out;
  out.reserve(static_cast<size_t>(levels));
  Plane luma = luminance(img);
  for (int i = 0; i < levels; ++i) {
    out.push_back(gradient_magnitude(luma));
    if (i + 1 < levels) luma = downsample_half(luma);
  }
  return out;
}

namespace {

double pyramid_l1_sum(const Image& a, const Image& b, const ObjectiveConfig& cfg) {
  const std::vector<Plane> pa = feature_pyramid(a, cfg.pyramid_levels);
  const std::vector<Plane> pb = feature_pyramid(b, cfg.pyramid_levels);
  double acc = 0.0;
  for (int i = 0; i < cfg.pyramid_levels; ++i) {
    acc += cfg.tau[static_cast<size_t>(i)] *
           (pa[static_cast<size_t>(i)] - pb[static_cast<size_t>(i)]).abs().mean();
  }
  return acc;
}

double contrastive_pyramid_sum(const Image& lq, const Image& out, const Image& gt,
                               const ObjectiveConfig& cfg) {
  const std::vector<Plane> p_lq = feature_pyramid(lq, cfg.pyramid_levels);
  const std::vector<Plane> p_out = feature_pyramid(out, cfg.pyramid_levels);
  const std::vector<Plane> p_gt = feature_pyramid(gt, cfg.pyramid_levels);
  double acc = 0.0;
  for (int i = 0; i < cfg.pyramid_levels; ++i) {
    const size_t k = static_cast<size_t>(i);
    const double pull = (p_gt[k] - p_out[k]).abs().mean();
    const double push = (p_lq[k] - p_out[k]).abs().mean();
    acc += cfg.tau[k] * pull / (push + kContrastiveEps);
  }
  return acc;
}

double weighted_mean_abs_diff(const Image& a, const Image& b, const Plane& w) {
  require_same_shape(a, b);
  double acc = 0.0;
  for (int c = 0; c < a.channels(); ++c) acc += (w * (a[c] - b[c]).abs()).mean();
  return acc / a.channels();
}

}  // namespace

double rec_common(const Image& out, const Image& gt, const ObjectiveConfig& cfg) {
  require_same_shape(out, gt);
  return mean_abs_diff(out, gt) + cfg.beta_c * pyramid_l1_sum(gt, out, cfg);
}

double rec_contrastive(const Image& lq, const Image& out, const Image& gt,
                       const ObjectiveConfig& cfg) {
  require_same_shape(lq, out);
  require_same_shape(out, gt);
  return mean_abs_diff(out, gt) + cfg.beta_c * contrastive_pyramid_sum(lq, out, gt, cfg);
}

double coherence_loss(const Image& lq, const Image& out, const Transmission& t_out) {
  require_same_shape(lq, out);
  require_same_shape(out, t_out);
  double acc = 0.0;
  for (int c = 0; c < lq.channels(); ++c) {
    acc += (out[c] * t_out.map + (1.0 - t_out.map) - lq[c]).abs().mean();
  }
  return acc / lq.channels();
}

double weighted_rec_contrastive(const Image& lq, const Image& out, const Image& gt,
                                const TrustWeight& w, const ObjectiveConfig& cfg) {
  require_same_shape(lq, out);
  require_same_shape(out, gt);
  return weighted_mean_abs_diff(out, gt, w.map) +
         w.map.mean() * cfg.beta_c * contrastive_pyramid_sum(lq, out, gt, cfg);
}

double weighted_coherence_loss(const Image& lq, const Image& out, const Transmission& t_out,
                               const TrustWeight& w) {
  require_same_shape(lq, out);
  require_same_shape(out, t_out);
  double acc = 0.0;
  for (int c = 0; c < lq.channels(); ++c) {
    acc += (w.map * (out[c] * t_out.map + (1.0 - t_out.map) - lq[c]).abs()).mean();
  }
  return acc / lq.channels();
}

LossBreakdown loss_pretrain(const PretrainSample& s, const ObjectiveConfig& cfg) {
  LossBreakdown b;
  b.rec = cfg.rho_r * rec_contrastive(s.lq, s.out, s.gt, cfg);
  b.coh = cfg.rho_c * coherence_loss(s.lq, s.out, s.t_out);
  b.dens = image_density(s.out);
  return b;
}

LossBreakdown loss_finetune_real(const FinetuneRealTerm& r, const ObjectiveConfig& cfg) {
  LossBreakdown b;
  b.rec = cfg.rho_r * weighted_rec_contrastive(r.lq, r.out, r.pseudo, r.weight, cfg);
  b.coh = cfg.rho_c * weighted_coherence_loss(r.lq, r.out, r.t_out, r.weight);
  b.dens = r.weight.map.mean() * image_density(r.out);
  return b;
}

LossBreakdown loss_finetune_synth(const FinetuneSynthTerm& s, const ObjectiveConfig& cfg) {
  LossBreakdown b;
  b.rec = cfg.rho_r * rec_common(s.out, s.gt, cfg);
  b.dens = image_density(s.out);
  return b;
}

LossBreakdown loss_finetune(const FinetuneRealTerm& r, const FinetuneSynthTerm& s,
                            const ObjectiveConfig& cfg) {
  const LossBreakdown br = loss_finetune_real(r, cfg);
  const LossBreakdown bs = loss_finetune_synth(s, cfg);
  return LossBreakdown{br.rec + bs.rec, br.coh + bs.coh, br.dens + bs.dens};
}

}  // namespace unhaze
