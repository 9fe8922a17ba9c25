#include "unhaze/tuner/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unhaze/core/error.hpp"
#include "unhaze/core/parallel.hpp"
#include "unhaze/core/rng.hpp"

namespace unhaze {

void require_valid(const TunerConfig& cfg) {
  if (cfg.budget < 1) throw ConfigError("tuner budget must be >= 1");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) throw ConfigError("shrink must lie in (0, 1)");
  if (!(cfg.init_step > 0.0) || !(cfg.min_step > 0.0)) {
    throw ConfigError("tuner steps must be positive");
  }
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
}

namespace {

std::vector<double> project(std::vector<double> x, const std::vector<ParamBox>& boxes) {
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], boxes[i].lo, boxes[i].hi);
  }
  return x;
}

// Reflects out-of-box coordinates back across the violated bound (then clamps
// for extreme overshoots). Clamping alone piles simplex vertices exactly onto
// a box face, where reflections through the centroid can never re-open that
// dimension; folding keeps candidates interior.
std::vector<double> fold_into_box(std::vector<double> x, const std::vector<ParamBox>& boxes) {
  for (size_t i = 0; i < x.size(); ++i) {
    const double lo = boxes[i].lo;
    const double hi = boxes[i].hi;
    if (x[i] < lo) x[i] = lo + (lo - x[i]);
    if (x[i] > hi) x[i] = hi - (x[i] - hi);
    x[i] = std::clamp(x[i], lo, hi);
  }
  return x;
}

// Seeded choice of batch_size distinct indices (all of them when the corpus
// is small enough); deterministic partial Fisher-Yates.
std::vector<size_t> pick_batch(size_t corpus_size, int batch_size, RngKey key) {
  std::vector<size_t> idx(corpus_size);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (corpus_size <= static_cast<size_t>(batch_size)) return idx;
  Rng rng(key);
  for (size_t i = 0; i < static_cast<size_t>(batch_size); ++i) {
    const size_t j = i + static_cast<size_t>(rng.below(corpus_size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<size_t>(batch_size));
  std::sort(idx.begin(), idx.end());  // evaluation order independent of draw order
  return idx;
}

}  // namespace

SearchResult coordinate_search(const LossFn& f, std::vector<double> x0,
                               const std::vector<ParamBox>& boxes, const TunerConfig& cfg) {
  require_valid(cfg);
  if (x0.size() != boxes.size()) throw ConfigError("parameter/box size mismatch");
  SearchResult r;
  r.best_x = project(std::move(x0), boxes);
  r.best_loss = f(r.best_x);
  r.trace.push_back({0, r.best_loss});
  r.evaluations = 1;

  const size_t dims = boxes.size();
  std::vector<double> step(dims);
  std::vector<double> floor(dims);
  for (size_t i = 0; i < dims; ++i) {
    const double width = boxes[i].hi - boxes[i].lo;
    step[i] = cfg.init_step * width;
    floor[i] = cfg.min_step * width;
  }

  auto all_below_floor = [&] {
    for (size_t i = 0; i < dims; ++i) {
      if (step[i] >= floor[i] && boxes[i].hi > boxes[i].lo) return false;
    }
    return true;
  };

  while (r.evaluations < cfg.budget && !all_below_floor()) {
    bool improved = false;
    for (size_t i = 0; i < dims && r.evaluations < cfg.budget; ++i) {
      if (boxes[i].hi <= boxes[i].lo) continue;
      for (const double dir : {+1.0, -1.0}) {
        if (r.evaluations >= cfg.budget) break;
        std::vector<double> cand = r.best_x;
        cand[i] = std::clamp(cand[i] + dir * step[i], boxes[i].lo, boxes[i].hi);
        if (cand[i] == r.best_x[i]) continue;  // projection made it a no-op
        const double loss = f(cand);
        r.trace.push_back({r.evaluations, loss});
        ++r.evaluations;
        if (loss < r.best_loss) {
          r.best_loss = loss;
          r.best_x = std::move(cand);
          ++r.accepted_moves;
          improved = true;
          break;  // move on to the next coordinate
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= cfg.shrink;
    }
  }
  return r;
}

SearchResult nelder_mead(const LossFn& f, std::vector<double> x0,
                         const std::vector<ParamBox>& boxes, const TunerConfig& cfg) {
  require_valid(cfg);
  if (x0.size() != boxes.size()) throw ConfigError("parameter/box size mismatch");
  const size_t dims = boxes.size();
  SearchResult r;

  struct Vertex {
    std::vector<double> x;
    double loss = 0.0;
  };
  auto eval = [&](std::vector<double> x) {
    Vertex v{project(std::move(x), boxes), 0.0};
    v.loss = f(v.x);
    r.trace.push_back({r.evaluations, v.loss});
    ++r.evaluations;
    return v;
  };

  std::vector<Vertex> simplex;
  simplex.push_back(eval(std::move(x0)));
  r.best_x = simplex[0].x;
  r.best_loss = simplex[0].loss;
  for (size_t i = 0; i < dims && r.evaluations < cfg.budget; ++i) {
    std::vector<double> v = simplex[0].x;
    const double width = boxes[i].hi - boxes[i].lo;
    v[i] += (v[i] + cfg.init_step * width <= boxes[i].hi ? 1.0 : -1.0) * cfg.init_step * width;
    simplex.push_back(eval(std::move(v)));
  }

  auto track_best = [&](const Vertex& v) {
    if (v.loss < r.best_loss) {
      r.best_loss = v.loss;
      r.best_x = v.x;
      ++r.accepted_moves;
    }
  };
  for (const Vertex& v : simplex) track_best(v);

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  while (r.evaluations < cfg.budget && simplex.size() == dims + 1) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.loss < b.loss; });
    // Termination: simplex collapsed below the relative step floor.
    double spread = 0.0;
    for (size_t i = 0; i < dims; ++i) {
      const double width = boxes[i].hi - boxes[i].lo;
      if (width <= 0.0) continue;
      double lo = simplex[0].x[i], hi = simplex[0].x[i];
      for (const Vertex& v : simplex) {
        lo = std::min(lo, v.x[i]);
        hi = std::max(hi, v.x[i]);
      }
      spread = std::max(spread, (hi - lo) / width);
    }
    if (spread < cfg.min_step) break;

    std::vector<double> centroid(dims, 0.0);
    for (size_t k = 0; k + 1 < simplex.size(); ++k) {
      for (size_t i = 0; i < dims; ++i) centroid[i] += simplex[k].x[i];
    }
    for (double& c : centroid) c /= static_cast<double>(dims);
    const Vertex& worst = simplex.back();

    auto along = [&](double coef) {
      std::vector<double> x(dims);
      for (size_t i = 0; i < dims; ++i) x[i] = centroid[i] + coef * (centroid[i] - worst.x[i]);
      return fold_into_box(std::move(x), boxes);
    };

    Vertex reflected = eval(along(kReflect));
    track_best(reflected);
    if (reflected.loss < simplex[0].loss && r.evaluations < cfg.budget) {
      Vertex expanded = eval(along(kExpand));
      track_best(expanded);
      simplex.back() = expanded.loss < reflected.loss ? std::move(expanded) : std::move(reflected);
      continue;
    }
    if (reflected.loss < simplex[simplex.size() - 2].loss) {
      simplex.back() = std::move(reflected);
      continue;
    }
    if (r.evaluations >= cfg.budget) break;
    Vertex contracted = eval(along(-kContract));
    track_best(contracted);
    if (contracted.loss < worst.loss) {
      simplex.back() = std::move(contracted);
      continue;
    }
    // Shrink toward the best vertex.
    for (size_t k = 1; k < simplex.size() && r.evaluations < cfg.budget; ++k) {
      std::vector<double> x(dims);
      for (size_t i = 0; i < dims; ++i) {
        x[i] = simplex[0].x[i] + kShrink * (simplex[k].x[i] - simplex[0].x[i]);
      }
      simplex[k] = eval(std::move(x));
      track_best(simplex[k]);
    }
  }
  return r;
}

SearchResult minimize(const LossFn& f, std::vector<double> x0,
                      const std::vector<ParamBox>& boxes, const TunerConfig& cfg) {
  return cfg.method == TunerMethod::kCoordinateSearch ? coordinate_search(f, std::move(x0), boxes, cfg)
                                                      : nelder_mead(f, std::move(x0), boxes, cfg);
}

namespace {

struct PreparedPretrain {
  Image lq;  // weak-augmented input
  Image gt;  // identically augmented ground truth
};

// Mean pretraining loss over the prepared batch for one parameter vector.
LossBreakdown eval_pretrain_batch(const std::vector<PreparedPretrain>& batch,
                                  const SolverParams& params, const ObjectiveConfig& objective,
                                  int jobs) {
  std::vector<LossBreakdown> parts(batch.size());
  parallel_for(static_cast<int>(batch.size()), jobs, [&](int i) {
    const PreparedPretrain& s = batch[static_cast<size_t>(i)];
    const DehazeResult out = dehaze(s.lq, params);
    parts[static_cast<size_t>(i)] =
        loss_pretrain(PretrainSample{s.lq, out.j, out.t, s.gt}, objective);
  });
  LossBreakdown mean;
  for (const LossBreakdown& b : parts) {
    mean.rec += b.rec;
    mean.coh += b.coh;
    mean.dens += b.dens;
  }
  const double n = std::max<size_t>(batch.size(), 1);
  mean.rec /= n;
  mean.coh /= n;
  mean.dens /= n;
  return mean;
}

PhaseReport run_phase(const SolverParams& init,
                      const std::function<LossBreakdown(const SolverParams&)>& batch_loss,
                      const TunerConfig& cfg) {
  require_valid(init);
  PhaseReport report;
  std::vector<LossBreakdown>& breakdowns = report.breakdowns;
  const LossFn f = [&](const std::vector<double>& x) {
    SolverParams p = init;
    assign_flat_params(p, x);
    const LossBreakdown b = batch_loss(p);
    breakdowns.push_back(b);
    return b.total();
  };
  const SearchResult r = minimize(f, flatten_params(init), param_boxes(init), cfg);
  report.best_params = init;
  assign_flat_params(report.best_params, r.best_x);
  report.best_loss = r.best_loss;
  report.loss_trace = r.trace;
  report.accepted_moves = r.accepted_moves;
  report.evaluations = r.evaluations;
  return report;
}

}  // namespace

PhaseReport pretrain(const std::vector<SyntheticTriple>& corpus, const SolverParams& init,
                     const ObjectiveConfig& objective, const WeakAugment& weak,
                     const TunerConfig& cfg) {
  if (corpus.empty()) throw ConfigError("pretraining needs a nonempty corpus");
  require_valid(objective);
  require_valid(cfg);
  const RngKey root = RngKey::root(cfg.seed);
  const std::vector<size_t> batch_idx =
      pick_batch(corpus.size(), cfg.batch_size, root.derive("pretrain-batch"));
  std::vector<PreparedPretrain> batch;
  batch.reserve(batch_idx.size());
  for (const size_t i : batch_idx) {
    const SyntheticTriple& s = corpus[i];
    Rng rng(root.derive("weak").derive(s.id));
    WeakAugmented a = weak_augment(s.lq, s.gt, std::nullopt, weak, rng);
    batch.push_back(PreparedPretrain{std::move(a.image), std::move(*a.gt)});
  }
  return run_phase(init,
                   [&](const SolverParams& p) {
                     return eval_pretrain_batch(batch, p, objective, cfg.jobs);
                   },
                   cfg);
}

namespace {

struct PreparedSynth {
  Image lq;
  Image gt;
};

}  // namespace

FinetuneOutcome finetune(const std::vector<RealSample>& real_corpus,
                         const std::vector<SyntheticTriple>& synth_corpus,
                         const SolverParams& init, LabelPool& pool,
                         const ObjectiveConfig& objective, const AugmentorConfig& augment,
                         const TunerConfig& cfg, const EmaConfig& ema, int rounds) {
  if (real_corpus.empty()) throw ConfigError("finetuning needs a nonempty real corpus");
  if (synth_corpus.empty()) throw ConfigError("finetuning needs a nonempty synthetic corpus");
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  require_valid(objective);
  require_valid(cfg);
  require_valid(ema);
  require_valid(augment);

  FinetuneOutcome outcome;
  outcome.teacher = init;
  outcome.student = init;
  outcome.report.best_params = init;
  outcome.report.best_loss = 0.0;  // meaningful only once a round has run

  const RngKey root = RngKey::root(cfg.seed);
  TunerConfig round_cfg = cfg;
  round_cfg.budget = rounds > 0 ? std::max(1, cfg.budget / rounds) : cfg.budget;

  for (int round = 0; round < rounds; ++round) {
    // (a) Refresh pseudo labels with the current teacher; fix this round's
    // student inputs (strong-augmented) alongside.
    const std::vector<size_t> real_idx = pick_batch(
        real_corpus.size(), cfg.batch_size, root.derive("real-batch").derive(round));
    std::vector<RealSample> real_batch;
    real_batch.reserve(real_idx.size());
    for (const size_t i : real_idx) real_batch.push_back(real_corpus[i]);
    const std::vector<RoundItem> items =
        colabator_round(real_batch, outcome.teacher, outcome.student, pool,
                        augment.strong, root.derive("strong"), round, cfg.jobs);

    const std::vector<size_t> synth_idx = pick_batch(
        synth_corpus.size(), cfg.batch_size, root.derive("synth-batch").derive(round));
    std::vector<PreparedSynth> synth_batch;
    synth_batch.reserve(synth_idx.size());
    for (const size_t i : synth_idx) {
      const SyntheticTriple& s = synth_corpus[i];
      Rng rng(root.derive("weak").derive(s.id).derive(round));
      WeakAugmented a = weak_augment(s.lq, s.gt, std::nullopt, augment.weak, rng);
      synth_batch.push_back(PreparedSynth{std::move(a.image), std::move(*a.gt)});
    }

    // (b) Tune the student against frozen pseudo labels + synthetic pairs.
    const auto batch_loss = [&](const SolverParams& p) {
      std::vector<LossBreakdown> real_parts(items.size());
      parallel_for(static_cast<int>(items.size()), cfg.jobs, [&](int i) {
        const RoundItem& item = items[static_cast<size_t>(i)];
        const DehazeResult out = dehaze(item.student_input, p);
        real_parts[static_cast<size_t>(i)] = loss_finetune_real(
            FinetuneRealTerm{item.student_input, out.j, out.t,
                             item.pseudo.pseudo_image, item.pseudo.weight},
            objective);
      });
      std::vector<LossBreakdown> synth_parts(synth_batch.size());
      parallel_for(static_cast<int>(synth_batch.size()), cfg.jobs, [&](int i) {
        const PreparedSynth& s = synth_batch[static_cast<size_t>(i)];
        const DehazeResult out = dehaze(s.lq, p);
        synth_parts[static_cast<size_t>(i)] =
            loss_finetune_synth(FinetuneSynthTerm{out.j, s.gt}, objective);
      });
      LossBreakdown mean;
      for (const LossBreakdown& b : real_parts) {
        mean.rec += b.rec / real_parts.size();
        mean.coh += b.coh / real_parts.size();
        mean.dens += b.dens / real_parts.size();
      }
      for (const LossBreakdown& b : synth_parts) {
        mean.rec += b.rec / synth_parts.size();
        mean.dens += b.dens / synth_parts.size();
      }
      return mean;
    };
    PhaseReport round_report = run_phase(outcome.student, batch_loss, round_cfg);

    // Concatenate the round trace with a continuing eval index.
    const int offset = outcome.report.evaluations;
    for (const TraceEntry& t : round_report.loss_trace) {
      outcome.report.loss_trace.push_back({t.eval_index + offset, t.loss});
    }
    outcome.report.breakdowns.insert(outcome.report.breakdowns.end(),
                                     round_report.breakdowns.begin(),
                                     round_report.breakdowns.end());
    outcome.report.evaluations += round_report.evaluations;
    outcome.report.accepted_moves += round_report.accepted_moves;
    outcome.student = round_report.best_params;
    outcome.report.best_params = outcome.student;
    outcome.report.best_loss = round_report.best_loss;

    // (c) Teacher follows the student by EMA.
    outcome.teacher = ema_update(outcome.teacher, outcome.student, ema.eta);
  }
  return outcome;
}

std::vector<SweepRow> sweep_stages(const std::vector<SyntheticTriple>& corpus,
                                   const std::vector<int>& stage_counts,
                                   const SolverParams& base, const ObjectiveConfig& objective,
                                   const WeakAugment& weak, const TunerConfig& cfg) {
  if (corpus.empty()) throw ConfigError("stage sweep needs a nonempty corpus");
  std::vector<SweepRow> rows;
  rows.reserve(stage_counts.size());
  for (const int k : stage_counts) {
    if (k < 1 || k > 16) throw ConfigError("stage counts must lie in [1, 16]");
    SolverParams params = base;
    const StageParams fill = params.stages.empty() ? StageParams{} : params.stages.back();
    params.stages.resize(static_cast<size_t>(k), fill);
    const PhaseReport report = pretrain(corpus, params, objective, weak, cfg);

    SweepRow row;
    row.stages = k;
    row.init_loss = report.loss_trace.front().loss;
    row.tuned_loss = report.best_loss;
    row.evaluations = report.evaluations;
    row.accepted_moves = report.accepted_moves;
    std::vector<double> dens(corpus.size());
    std::vector<double> qual(corpus.size());
    parallel_for(static_cast<int>(corpus.size()), cfg.jobs, [&](int i) {
      const DehazeResult out = dehaze(corpus[static_cast<size_t>(i)].lq, report.best_params);
      dens[static_cast<size_t>(i)] = image_density(out.j);
      qual[static_cast<size_t>(i)] = quality_score(out.j);
    });
    for (size_t i = 0; i < corpus.size(); ++i) {
      row.mean_density += dens[i] / static_cast<double>(corpus.size());
      row.mean_quality += qual[i] / static_cast<double>(corpus.size());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace unhaze
