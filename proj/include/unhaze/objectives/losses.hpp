#pragma once

#include <vector>

#include "unhaze/core/types.hpp"
#include "unhaze/iqa/scoring.hpp"

namespace unhaze {

struct ObjectiveConfig {
  double beta_c = 0.2;    // pyramid-feature term weight
  double rho_r = 5.0;     // reconstruction trade-off
  double rho_c = 0.01;    // coherence trade-off
  std::vector<double> tau{0.25, 0.5, 1.0};  // per-level weights
  int pyramid_levels = 3;
};

void require_valid(const ObjectiveConfig& cfg);

inline constexpr double kContrastiveEps = 1e-7;

// Level i is the gradient-magnitude map of the i-times downsampled luminance
// (a classical stand-in for deep perceptual features).
std::vector<Plane> feature_pyramid(const Image& img, int levels);

// L1 + weighted pyramid-feature L1 between output and target:
//   |gt - out|_1 + beta_c * sum_i tau_i |phi_i(gt) - phi_i(out)|_1.
double rec_common(const Image& out, const Image& gt, const ObjectiveConfig& cfg);

// Contrastive variant: each pyramid term is a pull/push ratio
//   |phi_i(gt) - phi_i(out)|_1 / (|phi_i(lq) - phi_i(out)|_1 + eps),
// attracting the output to the target while repelling it from the input.
double rec_contrastive(const Image& lq, const Image& out, const Image& gt,
                       const ObjectiveConfig& cfg);

// Physical recomposition residual: mean |out * t + (1 - t) - lq|.
double coherence_loss(const Image& lq, const Image& out, const Transmission& t_out);

// Trust-weighted variants. Pixel-domain L1 terms weight elementwise inside
// the mean (mean(w * |diff|)); feature-ratio terms and the scalar density
// loss scale by mean(w). All are therefore linear in w.
double weighted_rec_contrastive(const Image& lq, const Image& out, const Image& gt,
                                const TrustWeight& w, const ObjectiveConfig& cfg);
double weighted_coherence_loss(const Image& lq, const Image& out, const Transmission& t_out,
                               const TrustWeight& w);

// Individually reported pieces of a composite loss.
struct LossBreakdown {
  double rec = 0.0;   // trade-off-weighted reconstruction terms
  double coh = 0.0;   // trade-off-weighted coherence terms
  double dens = 0.0;  // density terms
  double total() const { return rec + coh + dens; }
};

// Pretraining objective on one synthetic sample (all tensors already
// weak-augmented consistently):
//   rho_r * rec_contrastive(lq, out, gt) + rho_c * coherence(lq, out, t_out)
//   + image_density(out).
struct PretrainSample {
  Image lq;          // weak-augmented hazy input fed to the solver
  Image out;         // solver scene estimate
  Transmission t_out;
  Image gt;          // weak-augmented ground truth
};

LossBreakdown loss_pretrain(const PretrainSample& s, const ObjectiveConfig& cfg);

// Finetuning objective: trust-weighted terms on a real (pseudo-labeled)
// sample plus plain supervised terms on a synthetic sample.
struct FinetuneRealTerm {
  Image lq;           // strong-augmented real hazy input
  Image out;          // student scene estimate on that input
  Transmission t_out;
  Image pseudo;       // pooled pseudo label
  TrustWeight weight;
};

struct FinetuneSynthTerm {
  Image out;
  Image gt;
};

LossBreakdown loss_finetune_real(const FinetuneRealTerm& r, const ObjectiveConfig& cfg);
LossBreakdown loss_finetune_synth(const FinetuneSynthTerm& s, const ObjectiveConfig& cfg);
LossBreakdown loss_finetune(const FinetuneRealTerm& r, const FinetuneSynthTerm& s,
                            const ObjectiveConfig& cfg);

}  // namespace unhaze
