#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "unhaze/objectives/losses.hpp"
#include "unhaze/selftrain/corpus.hpp"
#include "unhaze/selftrain/label_pool.hpp"
#include "unhaze/selftrain/mean_teacher.hpp"
#include "unhaze/solver/unfolding.hpp"

namespace unhaze {

enum class TunerMethod { kCoordinateSearch, kNelderMead };

struct TunerConfig {
  TunerMethod method = TunerMethod::kCoordinateSearch;
  int budget = 200;        // max loss evaluations per phase
  double init_step = 0.25; // initial step, relative to each box width
  double shrink = 0.5;     // step decay after a sweep with no improvement
  double min_step = 1e-3;  // relative step floor: termination
  int batch_size = 8;      // images per loss evaluation
  std::uint64_t seed = 0;
  int jobs = 1;
};

void require_valid(const TunerConfig& cfg);

struct TraceEntry {
  int eval_index = 0;
  double loss = 0.0;
};

struct PhaseReport {
  SolverParams best_params;
  double best_loss = 0.0;
  std::vector<TraceEntry> loss_trace;       // every evaluation, in order
  std::vector<LossBreakdown> breakdowns;    // aligned with loss_trace
  int accepted_moves = 0;
  int evaluations = 0;
};

// ---- Generic derivative-free minimization over a box ----

using LossFn = std::function<double(const std::vector<double>&)>;

struct SearchResult {
  std::vector<double> best_x;
  double best_loss = 0.0;
  std::vector<TraceEntry> trace;
  int accepted_moves = 0;
  int evaluations = 0;
};

// Cyclic coordinate descent with shrinking steps and box projection. Accepts
// only strict improvements; deterministic (no randomized ordering).
SearchResult coordinate_search(const LossFn& f, std::vector<double> x0,
                               const std::vector<ParamBox>& boxes, const TunerConfig& cfg);

// Standard Nelder-Mead (reflect/expand/contract/shrink). Candidates leaving
// the box are reflected back across the violated bound rather than clamped,
// so the simplex cannot collapse onto a box face.
SearchResult nelder_mead(const LossFn& f, std::vector<double> x0,
                         const std::vector<ParamBox>& boxes, const TunerConfig& cfg);

SearchResult minimize(const LossFn& f, std::vector<double> x0,
                      const std::vector<ParamBox>& boxes, const TunerConfig& cfg);

// ---- Training phases ----

// Pretraining: tunes solver parameters by minimizing the mean pretraining
// loss over a mini-batch fixed ahead of time from the seed (every candidate
// is scored on identical, identically-augmented data).
PhaseReport pretrain(const std::vector<SyntheticTriple>& corpus, const SolverParams& init,
                     const ObjectiveConfig& objective, const WeakAugment& weak,
                     const TunerConfig& cfg);

struct FinetuneOutcome {
  PhaseReport report;    // student tuning trace, concatenated across rounds
  SolverParams teacher;  // EMA-blended teacher after the final round
  SolverParams student;
};

// Fine-tuning: per round, (a) a self-training pass refreshes the label pool
// with teacher outputs, (b) the student is tuned against pooled pseudo
// labels plus supervised synthetic terms, (c) the teacher EMA-tracks the
// student. The evaluation budget is split evenly across rounds.
FinetuneOutcome finetune(const std::vector<RealSample>& real_corpus,
                         const std::vector<SyntheticTriple>& synth_corpus,
                         const SolverParams& init, LabelPool& pool,
                         const ObjectiveConfig& objective, const AugmentorConfig& augment,
                         const TunerConfig& cfg, const EmaConfig& ema, int rounds);

// Stage-count ablation: pretrain once per stage count, report losses and
// corpus statistics.
struct SweepRow {
  int stages = 0;
  double init_loss = 0.0;
  double tuned_loss = 0.0;
  double mean_density = 0.0;  // image_density over corpus, tuned params
  double mean_quality = 0.0;  // whole-image quality score, tuned params
  int evaluations = 0;
  int accepted_moves = 0;
};

std::vector<SweepRow> sweep_stages(const std::vector<SyntheticTriple>& corpus,
                                   const std::vector<int>& stage_counts,
                                   const SolverParams& base, const ObjectiveConfig& objective,
                                   const WeakAugment& weak, const TunerConfig& cfg);

}  // namespace unhaze
