#include "unhaze/selftrain/mean_teacher.hpp"

#include "unhaze/core/error.hpp"
#include "unhaze/core/parallel.hpp"

namespace unhaze {

void require_valid(const EmaConfig& cfg) {
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw ConfigError("ema eta must lie in (0, 1)");
}

SolverParams ema_update(const SolverParams& teacher, const SolverParams& student,
                        double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("ema eta must lie in (0, 1)");
  if (!same_layout(teacher, student)) {
    throw ConfigError("ema requires identical parameter layouts");
  }
  const std::vector<double> tea = flatten_params(teacher);
  const std::vector<double> stu = flatten_params(student);
  std::vector<double> blended(tea.size());
  for (size_t i = 0; i < tea.size(); ++i) {
    blended[i] = eta * tea[i] + (1.0 - eta) * stu[i];
  }
  SolverParams out = teacher;
  assign_flat_params(out, blended);
  return out;
}

ForwardResult teacher_student_forward(const Image& real_hazy, const SolverParams& teacher,
                                      const SolverParams& student,
                                      const std::vector<StrongOp>& strong, Rng& rng) {
  ForwardResult r;
  r.student_input = strong_augment(real_hazy, strong, rng);
  r.teacher = dehaze(real_hazy, teacher);
  r.student = dehaze(r.student_input, student);
  return r;
}

std::vector<RoundItem> colabator_round(const std::vector<RealSample>& batch,
                                       const SolverParams& teacher,
                                       const SolverParams& student, LabelPool& pool,
                                       const std::vector<StrongOp>& strong, RngKey base_key,
                                       int round, int jobs) {
  const int n = static_cast<int>(batch.size());
  std::vector<ForwardResult> forwards(static_cast<size_t>(n));
  parallel_for(n, jobs, [&](int i) {
    const RealSample& sample = batch[static_cast<size_t>(i)];
    Rng rng(base_key.derive(sample.id).derive(static_cast<std::uint64_t>(round)));
    forwards[static_cast<size_t>(i)] =
        teacher_student_forward(sample.image, teacher, student, strong, rng);
  });
  // Pool mutations are serialized in batch order (single-writer discipline).
  std::vector<RoundItem> items;
  items.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const RealSample& sample = batch[static_cast<size_t>(i)];
    ForwardResult& f = forwards[static_cast<size_t>(i)];
    LabelPool::UpdateResult u =
        pool.update(sample.id, f.teacher.j, f.teacher.t, round);
    items.push_back(RoundItem{sample.id, std::move(f.student_input), std::move(f.student),
                              std::move(u.pseudo), u.accepted});
  }
  return items;
}

}  // namespace unhaze
