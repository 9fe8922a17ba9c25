#include "unhaze/cli/commands.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "unhaze/core/error.hpp"
#include "unhaze/core/parallel.hpp"
#include "unhaze/io/pfm_io.hpp"
#include "unhaze/io/png_io.hpp"
#include "unhaze/iqa/scoring.hpp"
#include "unhaze/selftrain/corpus.hpp"
#include "unhaze/solver/serialize.hpp"

namespace unhaze {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- enum <-> name maps ----

std::string combine_name(WeightCombine c) {
  return c == WeightCombine::kProduct ? "product" : "sum";
}

WeightCombine combine_from_name(const std::string& s) {
  if (s == "product") return WeightCombine::kProduct;
  if (s == "sum") return WeightCombine::kSum;
  throw ConfigError("unknown weight_combine '" + s + "'");
}

std::string accept_name(PoolOptions::Accept a) {
  switch (a) {
    case PoolOptions::Accept::kMean: return "mean";
    case PoolOptions::Accept::kDominance: return "dominance";
    case PoolOptions::Accept::kFrozen: return "frozen";
  }
  return "mean";
}

PoolOptions::Accept accept_from_name(const std::string& s) {
  if (s == "mean") return PoolOptions::Accept::kMean;
  if (s == "dominance") return PoolOptions::Accept::kDominance;
  if (s == "frozen") return PoolOptions::Accept::kFrozen;
  throw ConfigError("unknown pool_accept '" + s + "'");
}

std::string method_name(TunerMethod m) {
  return m == TunerMethod::kCoordinateSearch ? "coordinate-search" : "nelder-mead";
}

TunerMethod method_from_name(const std::string& s) {
  if (s == "coordinate-search") return TunerMethod::kCoordinateSearch;
  if (s == "nelder-mead") return TunerMethod::kNelderMead;
  throw ConfigError("unknown tuner method '" + s + "'");
}

std::string op_kind_name(StrongOpKind k) {
  switch (k) {
    case StrongOpKind::kContrast: return "contrast";
    case StrongOpKind::kBrightness: return "brightness";
    case StrongOpKind::kPosterize: return "posterize";
    case StrongOpKind::kSharpness: return "sharpness";
    case StrongOpKind::kJpeg: return "jpeg";
    case StrongOpKind::kGaussianBlur: return "gaussian-blur";
  }
  return "contrast";
}

StrongOpKind op_kind_from_name(const std::string& s) {
  if (s == "contrast") return StrongOpKind::kContrast;
  if (s == "brightness") return StrongOpKind::kBrightness;
  if (s == "posterize") return StrongOpKind::kPosterize;
  if (s == "sharpness") return StrongOpKind::kSharpness;
  if (s == "jpeg") return StrongOpKind::kJpeg;
  if (s == "gaussian-blur") return StrongOpKind::kGaussianBlur;
  throw ConfigError("unknown augmentation op '" + s + "'");
}

// ---- section (de)serialization ----

json json_of(const ObjectiveConfig& c) {
  return json{{"beta_c", c.beta_c},
              {"rho_r", c.rho_r},
              {"rho_c", c.rho_c},
              {"tau", c.tau},
              {"pyramid_levels", c.pyramid_levels}};
}

ObjectiveConfig objective_from_json(const json& j) {
  ObjectiveConfig c;
  c.beta_c = j.value("beta_c", c.beta_c);
  c.rho_r = j.value("rho_r", c.rho_r);
  c.rho_c = j.value("rho_c", c.rho_c);
  c.tau = j.value("tau", c.tau);
  c.pyramid_levels = j.value("pyramid_levels", c.pyramid_levels);
  return c;
}

json json_of(const AugmentorConfig& c) {
  json strong = json::array();
  for (const StrongOp& op : c.strong) {
    strong.push_back(json{
        {"op", op_kind_name(op.kind)}, {"prob", op.prob}, {"lo", op.lo}, {"hi", op.hi}});
  }
  return json{{"strong", strong},
              {"weak", {{"crop_size", c.weak.crop_size}, {"hflip_prob", c.weak.hflip_prob}}}};
}

AugmentorConfig augment_from_json(const json& j) {
  AugmentorConfig c = default_augmentor();
  if (j.contains("strong")) {
    c.strong.clear();
    for (const json& e : j.at("strong")) {
      StrongOp op;
      op.kind = op_kind_from_name(e.at("op").get<std::string>());
      op.prob = e.value("prob", op.prob);
      op.lo = e.at("lo").get<double>();
      op.hi = e.at("hi").get<double>();
      c.strong.push_back(op);
    }
  }
  if (j.contains("weak")) {
    const json& w = j.at("weak");
    c.weak.crop_size = w.value("crop_size", c.weak.crop_size);
    c.weak.hflip_prob = w.value("hflip_prob", c.weak.hflip_prob);
  }
  return c;
}

json json_of(const TunerConfig& c) {
  return json{{"method", method_name(c.method)}, {"budget", c.budget},
              {"init_step", c.init_step},        {"shrink", c.shrink},
              {"min_step", c.min_step},          {"batch_size", c.batch_size}};
}

TunerConfig tuner_from_json(const json& j) {
  TunerConfig c;
  c.method = method_from_name(j.value("method", method_name(c.method)));
  c.budget = j.value("budget", c.budget);
  c.init_step = j.value("init_step", c.init_step);
  c.shrink = j.value("shrink", c.shrink);
  c.min_step = j.value("min_step", c.min_step);
  c.batch_size = j.value("batch_size", c.batch_size);
  return c;
}

json json_of(const HazeSynthesisConfig& c) {
  return json{{"beta_min", c.beta_min},
              {"beta_max", c.beta_max},
              {"airlight_min", c.airlight_min},
              {"airlight_max", c.airlight_max},
              {"airlight_jitter", c.airlight_jitter}};
}

HazeSynthesisConfig synthesis_from_json(const json& j) {
  HazeSynthesisConfig c;
  c.beta_min = j.value("beta_min", c.beta_min);
  c.beta_max = j.value("beta_max", c.beta_max);
  c.airlight_min = j.value("airlight_min", c.airlight_min);
  c.airlight_max = j.value("airlight_max", c.airlight_max);
  c.airlight_jitter = j.value("airlight_jitter", c.airlight_jitter);
  return c;
}

json json_of(const RunPaths& p) {
  return json{{"input_dir", p.input_dir.string()},
              {"output_dir", p.output_dir.string()},
              {"pool_dir", p.pool_dir.string()},
              {"synthetic_dir", p.synthetic_dir.string()},
              {"real_dir", p.real_dir.string()},
              {"params_file", p.params_file.string()}};
}

RunPaths paths_from_json(const json& j) {
  RunPaths p;
  p.input_dir = j.value("input_dir", p.input_dir.string());
  p.output_dir = j.value("output_dir", p.output_dir.string());
  p.pool_dir = j.value("pool_dir", p.pool_dir.string());
  p.synthetic_dir = j.value("synthetic_dir", p.synthetic_dir.string());
  p.real_dir = j.value("real_dir", p.real_dir.string());
  p.params_file = j.value("params_file", p.params_file.string());
  return p;
}

// Every stochastic component keys off the single top-level seed.
void propagate_seed(RunConfig& cfg) {
  cfg.tuner.seed = cfg.seed;
  cfg.tuner.jobs = cfg.jobs;
  cfg.synthesis.seed = cfg.seed;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  if (s.empty()) throw ConfigError(what + " is empty");
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) {
    throw ConfigError("invalid " + what + " '" + s + "'");
  }
  return v;
}

// "a.b.c=value": navigates/creates objects along the dotted path; the value
// is parsed as JSON when possible, otherwise taken as a raw string.
void apply_override(json& root, const std::string& kv) {
  const std::size_t eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key=value, got '" + kv + "'");
  }
  const std::string key = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("empty path segment in override '" + kv + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &((*node)[part]);
    start = dot + 1;
  }
}

// ---- small output helpers ----

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_trace_csv(const fs::path& path, const std::vector<TraceEntry>& trace) {
  std::ostringstream csv;
  csv << "eval,loss\n";
  for (const TraceEntry& e : trace) csv << e.eval_index << ',' << fmt(e.loss) << '\n';
  write_text_file(path, csv.str());
}

void write_losses_csv(const fs::path& path, const std::vector<TraceEntry>& trace,
                      const std::vector<LossBreakdown>& breakdowns) {
  std::ostringstream csv;
  csv << "step,L_rec,L_coh,L_dens,total\n";
  const std::size_t n = std::min(trace.size(), breakdowns.size());
  for (std::size_t i = 0; i < n; ++i) {
    const LossBreakdown& b = breakdowns[i];
    csv << trace[i].eval_index << ',' << fmt(b.rec) << ',' << fmt(b.coh) << ','
        << fmt(b.dens) << ',' << fmt(b.total()) << '\n';
  }
  write_text_file(path, csv.str());
}

json json_of(const PhaseReport& r) {
  return json{{"best_loss", r.best_loss},
              {"evaluations", r.evaluations},
              {"accepted_moves", r.accepted_moves},
              {"best_params", to_json(r.best_params)}};
}

// Sorted stems of every <stem>.png directly inside dir.
std::vector<std::string> png_stems(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      stems.push_back(entry.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

SolverParams effective_solver_params(const RunConfig& cfg) {
  if (!cfg.paths.params_file.empty()) return load_solver_params(cfg.paths.params_file);
  return cfg.solver;
}

std::vector<SyntheticTriple> require_synthetic_corpus(const RunConfig& cfg) {
  if (cfg.paths.synthetic_dir.empty()) throw ConfigError("paths.synthetic_dir is not set");
  std::vector<SyntheticTriple> corpus = load_synthetic_corpus(cfg.paths.synthetic_dir);
  if (corpus.empty()) {
    throw ConfigError("no synthetic samples under " + cfg.paths.synthetic_dir.string());
  }
  return corpus;
}

}  // namespace

PoolOptions pool_options(const RunConfig& cfg) {
  PoolOptions o;
  o.n_patches = cfg.n_patches;
  o.combine = cfg.weight_combine;
  o.accept = cfg.pool_accept;
  return o;
}

fs::path effective_pool_dir(const RunConfig& cfg) {
  return cfg.paths.pool_dir.empty() ? cfg.paths.output_dir / "pool" : cfg.paths.pool_dir;
}

json to_json(const RunConfig& cfg) {
  return json{{"seed", cfg.seed},
              {"jobs", cfg.jobs},
              {"n_patches", cfg.n_patches},
              {"linearize", cfg.linearize},
              {"weight_combine", combine_name(cfg.weight_combine)},
              {"pool_accept", accept_name(cfg.pool_accept)},
              {"finetune_rounds", cfg.finetune_rounds},
              {"paths", json_of(cfg.paths)},
              {"solver", to_json(cfg.solver)},
              {"objective", json_of(cfg.objective)},
              {"augment", json_of(cfg.augment)},
              {"tuner", json_of(cfg.tuner)},
              {"synthesis", json_of(cfg.synthesis)},
              {"ema", json{{"eta", cfg.ema.eta}}}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  try {
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.n_patches = j.value("n_patches", cfg.n_patches);
    cfg.linearize = j.value("linearize", cfg.linearize);
    cfg.weight_combine =
        combine_from_name(j.value("weight_combine", combine_name(cfg.weight_combine)));
    cfg.pool_accept = accept_from_name(j.value("pool_accept", accept_name(cfg.pool_accept)));
    cfg.finetune_rounds = j.value("finetune_rounds", cfg.finetune_rounds);
    if (j.contains("paths")) cfg.paths = paths_from_json(j.at("paths"));
    if (j.contains("solver")) cfg.solver = solver_params_from_json(j.at("solver"));
    if (j.contains("objective")) cfg.objective = objective_from_json(j.at("objective"));
    if (j.contains("augment")) cfg.augment = augment_from_json(j.at("augment"));
    if (j.contains("tuner")) cfg.tuner = tuner_from_json(j.at("tuner"));
    if (j.contains("synthesis")) cfg.synthesis = synthesis_from_json(j.at("synthesis"));
    if (j.contains("ema")) cfg.ema.eta = j.at("ema").value("eta", cfg.ema.eta);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed configuration: ") + ex.what());
  }
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (cfg.n_patches < 1) throw ConfigError("n_patches must be >= 1");
  if (cfg.finetune_rounds < 0) throw ConfigError("finetune_rounds must be >= 0");
  propagate_seed(cfg);
  require_valid(cfg.solver);
  require_valid(cfg.objective);
  require_valid(cfg.augment);
  require_valid(cfg.tuner);
  require_valid(cfg.synthesis);
  require_valid(cfg.ema);
  return cfg;
}

RunConfig load_run_config(const std::optional<fs::path>& config_file,
                          const std::vector<std::string>& overrides) {
  json merged = to_json(RunConfig{});
  if (config_file) {
    const json user = load_json_file(*config_file);
    if (!user.is_object()) {
      throw ConfigError("configuration root must be a JSON object: " + config_file->string());
    }
    merged.merge_patch(user);
  }
  for (const std::string& kv : overrides) apply_override(merged, kv);
  RunConfig cfg = run_config_from_json(merged);
  if (const char* env = std::getenv("CORUN_SEED")) {
    cfg.seed = parse_u64(env, "CORUN_SEED");
    propagate_seed(cfg);
  }
  return cfg;
}

// ---- synthesize ----

int cmd_synthesize(const RunConfig& cfg) {
  if (cfg.paths.input_dir.empty()) throw ConfigError("paths.input_dir is not set");
  const std::vector<std::string> stems = png_stems(cfg.paths.input_dir);
  fs::create_directories(cfg.paths.output_dir);

  struct ItemResult {
    json meta;     // null on failure
    std::string error;
  };
  std::vector<ItemResult> results(stems.size());

  parallel_for(stems.size(), cfg.jobs, [&](std::size_t i) {
    const std::string& stem = stems[i];
    ItemResult& res = results[i];
    try {
      const fs::path scene_path = cfg.paths.input_dir / (stem + ".png");
      const fs::path depth_path = cfg.paths.input_dir / (stem + ".pfm");
      if (!fs::exists(depth_path)) throw IoError("missing depth map " + depth_path.string());
      const Image scene = load_png(scene_path, cfg.linearize);
      const Plane depth = load_pfm_gray(depth_path);
      if (depth.rows() != scene.height() || depth.cols() != scene.width()) {
        throw ShapeError("depth map shape does not match scene for '" + stem + "'");
      }
      const SyntheticSample sample = synthesize_pair(scene, depth, cfg.synthesis, i);
      const double recomposition =
          max_abs_diff(compose(scene, sample.t, sample.airlight), sample.hazy);
      if (recomposition > 1e-12) {
        throw Error("recomposition check failed for '" + stem + "'");
      }
      const fs::path item_dir = cfg.paths.output_dir / stem;
      fs::create_directories(item_dir);
      save_png(sample.hazy, item_dir / "hazy.png");
      save_png(scene, item_dir / "gt.png");
      save_pfm(sample.t.map, item_dir / "trans.pfm");
      res.meta = json{{"id", stem},
                      {"index", i},
                      {"beta", sample.beta},
                      {"airlight", sample.airlight.value},
                      {"recomposition_error", recomposition}};
      save_json_file(res.meta, item_dir / "meta.json");
    } catch (const std::exception& ex) {
      res.error = ex.what();
    }
  });

  json items = json::array();
  json errors = json::array();
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (results[i].error.empty()) {
      items.push_back(results[i].meta);
    } else {
      errors.push_back(json{{"id", stems[i]}, {"message", results[i].error}});
      std::cerr << "synthesize: " << stems[i] << ": " << results[i].error << '\n';
    }
  }
  save_json_file(json{{"config", to_json(cfg)}, {"items", items}, {"errors", errors}},
                 cfg.paths.output_dir / "manifest.json");
  std::cout << "synthesized " << items.size() << " of " << stems.size() << " scenes -> "
            << cfg.paths.output_dir.string() << '\n';
  return errors.empty() ? kExitOk : kExitPartial;
}

// ---- pretrain ----

int cmd_pretrain(const RunConfig& cfg) {
  const std::vector<SyntheticTriple> corpus = require_synthetic_corpus(cfg);
  const SolverParams init = effective_solver_params(cfg);
  const PhaseReport report = pretrain(corpus, init, cfg.objective, cfg.augment.weak, cfg.tuner);

  fs::create_directories(cfg.paths.output_dir);
  save_solver_params(report.best_params, cfg.paths.output_dir / "params.json");
  save_json_file(json{{"config", to_json(cfg)}, {"phase", "pretrain"}, {"report", json_of(report)}},
                 cfg.paths.output_dir / "report.json");
  write_trace_csv(cfg.paths.output_dir / "trace.csv", report.loss_trace);
  write_losses_csv(cfg.paths.output_dir / "losses.csv", report.loss_trace, report.breakdowns);
  std::cout << "pretrain: best loss " << fmt(report.best_loss) << " after "
            << report.evaluations << " evaluations (" << report.accepted_moves
            << " accepted) -> " << cfg.paths.output_dir.string() << '\n';
  return kExitOk;
}

// ---- finetune ----

int cmd_finetune(const RunConfig& cfg) {
  const std::vector<SyntheticTriple> synth = require_synthetic_corpus(cfg);
  if (cfg.paths.real_dir.empty()) throw ConfigError("paths.real_dir is not set");
  const std::vector<RealSample> real = load_real_corpus(cfg.paths.real_dir);
  if (real.empty()) throw ConfigError("no real images under " + cfg.paths.real_dir.string());
  if (cfg.paths.params_file.empty()) {
    throw ConfigError("paths.params_file must point at pretrained parameters");
  }
  const SolverParams init = load_solver_params(cfg.paths.params_file);

  fs::create_directories(cfg.paths.output_dir);
  LabelPool pool(effective_pool_dir(cfg), pool_options(cfg));
  const FinetuneOutcome outcome = finetune(real, synth, init, pool, cfg.objective, cfg.augment,
                                           cfg.tuner, cfg.ema, cfg.finetune_rounds);

  save_solver_params(outcome.teacher, cfg.paths.output_dir / "params.json");
  save_solver_params(outcome.student, cfg.paths.output_dir / "params_student.json");
  save_json_file(json{{"config", to_json(cfg)},
                      {"phase", "finetune"},
                      {"rounds", cfg.finetune_rounds},
                      {"pool_entries", pool.rows().size()},
                      {"report", json_of(outcome.report)}},
                 cfg.paths.output_dir / "report.json");
  write_trace_csv(cfg.paths.output_dir / "trace.csv", outcome.report.loss_trace);
  write_losses_csv(cfg.paths.output_dir / "losses.csv", outcome.report.loss_trace,
                   outcome.report.breakdowns);

  try {
    pool.verify();
  } catch (const PoolError& ex) {
    std::cerr << "finetune: pool verification failed: " << ex.what() << '\n';
    return kExitPool;
  }
  std::cout << "finetune: best student loss " << fmt(outcome.report.best_loss) << " over "
            << cfg.finetune_rounds << " rounds, pool holds " << pool.rows().size()
            << " labels -> " << cfg.paths.output_dir.string() << '\n';
  return kExitOk;
}

// ---- dehaze ----

int cmd_dehaze(const RunConfig& cfg, const fs::path& input) {
  const SolverParams params = effective_solver_params(cfg);
  std::vector<fs::path> files;
  if (fs::is_regular_file(input)) {
    files.push_back(input);
  } else if (fs::is_directory(input)) {
    for (const std::string& stem : png_stems(input)) {
      files.push_back(input / (stem + ".png"));
    }
  } else {
    throw ConfigError("input does not exist: " + input.string());
  }
  fs::create_directories(cfg.paths.output_dir);

  std::vector<std::string> item_errors(files.size());
  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
    try {
      const Image hazy = load_png(files[i], cfg.linearize);
      const DehazeResult result = dehaze(hazy, params);
      const std::string stem = files[i].stem().string();
      save_png(result.j, cfg.paths.output_dir / (stem + ".png"));
      save_pfm(result.t.map, cfg.paths.output_dir / (stem + ".pfm"));
    } catch (const std::exception& ex) {
      item_errors[i] = ex.what();
    }
  });

  json items = json::array();
  json errors = json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string stem = files[i].stem().string();
    if (item_errors[i].empty()) {
      items.push_back(json{{"id", stem}});
    } else {
      errors.push_back(json{{"id", stem}, {"message", item_errors[i]}});
      std::cerr << "dehaze: " << stem << ": " << item_errors[i] << '\n';
    }
  }
  save_json_file(json{{"config", to_json(cfg)}, {"items", items}, {"errors", errors}},
                 cfg.paths.output_dir / "manifest.json");
  std::cout << "dehazed " << items.size() << " of " << files.size() << " images -> "
            << cfg.paths.output_dir.string() << '\n';
  return errors.empty() ? kExitOk : kExitPartial;
}

// ---- evaluate ----

int cmd_evaluate(const RunConfig& cfg, const fs::path& input,
                 const std::optional<fs::path>& lq_dir) {
  const std::vector<std::string> stems = png_stems(input);

  struct Row {
    json entry;
    std::string csv;
    std::string error;
    double density = 0.0;
    double quality = 0.0;
    double coherence = 0.0;
    bool has_coherence = false;
  };
  std::vector<Row> rows(stems.size());

  parallel_for(stems.size(), cfg.jobs, [&](std::size_t i) {
    Row& row = rows[i];
    try {
      const Image img = load_png(input / (stems[i] + ".png"), cfg.linearize);
      row.density = image_density(img);
      row.quality = quality_score(img);
      row.entry = json{{"id", stems[i]}, {"density", row.density}, {"quality", row.quality}};
      std::string coh;
      const fs::path t_path = input / (stems[i] + ".pfm");
      if (lq_dir && fs::exists(*lq_dir / (stems[i] + ".png")) && fs::exists(t_path)) {
        const Image lq = load_png(*lq_dir / (stems[i] + ".png"), cfg.linearize);
        const Transmission t{load_pfm_gray(t_path)};
        row.coherence = coherence_loss(lq, img, t);
        row.has_coherence = true;
        row.entry["coherence"] = row.coherence;
        coh = fmt(row.coherence);
      }
      row.csv = stems[i] + ',' + fmt(row.density) + ',' + fmt(row.quality) + ',' + coh;
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  });

  std::ostringstream csv;
  csv << "id,density,quality,coherence\n";
  json items = json::array();
  json errors = json::array();
  double sum_density = 0.0;
  double sum_quality = 0.0;
  double sum_coherence = 0.0;
  int n_ok = 0;
  int n_coherence = 0;
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (!rows[i].error.empty()) {
      errors.push_back(json{{"id", stems[i]}, {"message", rows[i].error}});
      std::cerr << "evaluate: " << stems[i] << ": " << rows[i].error << '\n';
      continue;
    }
    csv << rows[i].csv << '\n';
    items.push_back(rows[i].entry);
    sum_density += rows[i].density;
    sum_quality += rows[i].quality;
    ++n_ok;
    if (rows[i].has_coherence) {
      sum_coherence += rows[i].coherence;
      ++n_coherence;
    }
  }

  json summary{{"n", n_ok},
               {"mean_density", n_ok > 0 ? sum_density / n_ok : 0.0},
               {"mean_quality", n_ok > 0 ? sum_quality / n_ok : 0.0}};
  if (n_coherence > 0) {
    summary["mean_coherence"] = sum_coherence / n_coherence;
    summary["coherence_n"] = n_coherence;
  }
  fs::create_directories(cfg.paths.output_dir);
  write_text_file(cfg.paths.output_dir / "report.csv", csv.str());
  save_json_file(
      json{{"config", to_json(cfg)}, {"items", items}, {"summary", summary}, {"errors", errors}},
      cfg.paths.output_dir / "report.json");
  std::cout << "evaluated " << n_ok << " of " << stems.size() << " images -> "
            << cfg.paths.output_dir.string() << '\n';
  return errors.empty() ? kExitOk : kExitPartial;
}

// ---- pool inspection ----

int cmd_pool(const RunConfig& cfg, const std::string& action, const std::string& image_id) {
  const fs::path dir = effective_pool_dir(cfg);
  if (!fs::exists(dir / "manifest.json")) {
    std::cerr << "pool: no pool manifest at " << (dir / "manifest.json").string() << '\n';
    return kExitConfig;
  }
  try {
    LabelPool pool = LabelPool::open(dir);
    if (action == "list") {
      std::cout << "id,round,mean_d,mean_q\n";
      for (const LabelPool::Row& row : pool.rows()) {
        std::cout << row.image_id << ',' << row.round << ',' << fmt(row.mean_d) << ','
                  << fmt(row.mean_q) << '\n';
      }
      std::cout << pool.rows().size() << " entries in " << dir.string() << '\n';
      return kExitOk;
    }
    if (action == "show") {
      if (image_id.empty()) {
        std::cerr << "pool show requires --id\n";
        return kExitConfig;
      }
      if (!pool.contains(image_id)) {
        std::cerr << "pool: no entry for '" << image_id << "'\n";
        return kExitConfig;
      }
      const LabelPoolEntry entry = pool.load_entry(image_id);
      const json j{{"id", entry.image_id},
                   {"round", entry.round},
                   {"height", entry.pseudo_image.height()},
                   {"width", entry.pseudo_image.width()},
                   {"scores", to_json(entry.scores)}};
      std::cout << j.dump(2) << '\n';
      return kExitOk;
    }
    if (action == "verify") {
      pool.verify();
      std::cout << "pool OK: " << pool.rows().size() << " entries verified in " << dir.string()
                << '\n';
      return kExitOk;
    }
    std::cerr << "unknown pool action '" << action << "' (expected list, show, or verify)\n";
    return kExitConfig;
  } catch (const PoolError& ex) {
    std::cerr << "pool: " << ex.what() << '\n';
    return kExitPool;
  }
}

// ---- stage sweep ----

int cmd_sweep(const RunConfig& cfg, const std::vector<int>& stage_counts) {
  if (stage_counts.empty()) throw ConfigError("sweep needs at least one stage count");
  const std::vector<SyntheticTriple> corpus = require_synthetic_corpus(cfg);
  const std::vector<SweepRow> rows =
      sweep_stages(corpus, stage_counts, cfg.solver, cfg.objective, cfg.augment.weak, cfg.tuner);

  std::ostringstream csv;
  csv << "stages,init_loss,tuned_loss,mean_density,mean_quality,evaluations,accepted_moves\n";
  json items = json::array();
  for (const SweepRow& r : rows) {
    csv << r.stages << ',' << fmt(r.init_loss) << ',' << fmt(r.tuned_loss) << ','
        << fmt(r.mean_density) << ',' << fmt(r.mean_quality) << ',' << r.evaluations << ','
        << r.accepted_moves << '\n';
    items.push_back(json{{"stages", r.stages},
                         {"init_loss", r.init_loss},
                         {"tuned_loss", r.tuned_loss},
                         {"mean_density", r.mean_density},
                         {"mean_quality", r.mean_quality},
                         {"evaluations", r.evaluations},
                         {"accepted_moves", r.accepted_moves}});
  }
  fs::create_directories(cfg.paths.output_dir);
  write_text_file(cfg.paths.output_dir / "sweep.csv", csv.str());
  save_json_file(json{{"config", to_json(cfg)}, {"rows", items}},
                 cfg.paths.output_dir / "sweep.json");

  std::cout << std::left << std::setw(8) << "stages" << std::setw(14) << "init_loss"
            << std::setw(14) << "tuned_loss" << std::setw(14) << "density" << std::setw(14)
            << "quality" << std::setw(8) << "evals" << '\n';
  std::cout << std::setprecision(6);
  for (const SweepRow& r : rows) {
    std::cout << std::left << std::setw(8) << r.stages << std::setw(14) << r.init_loss
              << std::setw(14) << r.tuned_loss << std::setw(14) << r.mean_density
              << std::setw(14) << r.mean_quality << std::setw(8) << r.evaluations << '\n';
  }
  return kExitOk;
}

}  // namespace unhaze
