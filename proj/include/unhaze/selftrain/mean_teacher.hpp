#pragma once

#include <string>
#include <vector>

#include "unhaze/core/rng.hpp"
#include "unhaze/selftrain/augment.hpp"
#include "unhaze/selftrain/corpus.hpp"
#include "unhaze/selftrain/label_pool.hpp"
#include "unhaze/solver/unfolding.hpp"

namespace unhaze {

struct EmaConfig {
  double eta = 0.999;  // teacher momentum, in (0, 1)
};

void require_valid(const EmaConfig& cfg);

// Exponential moving average over the flattened tunable scalars:
// teacher' = eta * teacher + (1 - eta) * student. Layouts (stage count, prox
// kinds, init mode) must match; categorical fields pass through unchanged.
SolverParams ema_update(const SolverParams& teacher, const SolverParams& student,
                        double eta);

struct ForwardResult {
  DehazeResult teacher;  // teacher dehazes the clean input
  DehazeResult student;  // student dehazes the strong-augmented input
  Image student_input;
};

ForwardResult teacher_student_forward(const Image& real_hazy, const SolverParams& teacher,
                                      const SolverParams& student,
                                      const std::vector<StrongOp>& strong, Rng& rng);

// Per-image outcome of one self-training round.
struct RoundItem {
  std::string id;
  Image student_input;     // strong-augmented hazy input
  DehazeResult student;    // student estimate on the augmented input
  LabelPoolEntry pseudo;   // best-ever pseudo label after this round's update
  bool accepted = false;
};

// One Colabator round over a batch of real images: teacher and student
// forwards (parallelizable), then serialized pool updates in batch order.
// Randomness is keyed per (base_key, image id, round), so any parallel
// schedule produces identical results.
std::vector<RoundItem> colabator_round(const std::vector<RealSample>& batch,
                                       const SolverParams& teacher,
                                       const SolverParams& student, LabelPool& pool,
                                       const std::vector<StrongOp>& strong, RngKey base_key,
                                       int round, int jobs = 1);

}  // namespace unhaze
