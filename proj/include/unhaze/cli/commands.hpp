#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unhaze/objectives/losses.hpp"
#include "unhaze/physics/scattering.hpp"
#include "unhaze/selftrain/augment.hpp"
#include "unhaze/selftrain/label_pool.hpp"
#include "unhaze/selftrain/mean_teacher.hpp"
#include "unhaze/solver/unfolding.hpp"
#include "unhaze/tuner/tuner.hpp"

namespace unhaze {

inline constexpr int kExitOk = 0;       // full success
inline constexpr int kExitConfig = 1;   // configuration / usage error
inline constexpr int kExitPartial = 2;  // some items failed, run continued
inline constexpr int kExitPool = 3;     // label pool corruption

struct RunPaths {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir = "out";
  std::filesystem::path pool_dir;       // empty: <output_dir>/pool
  std::filesystem::path synthetic_dir;
  std::filesystem::path real_dir;
  std::filesystem::path params_file;
};

// Full run configuration; a single JSON document plus `--set key=value`
// overrides. The one top-level seed feeds every stochastic component; the
// CORUN_SEED environment variable overrides it.
struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  int n_patches = 8;
  bool linearize = false;
  WeightCombine weight_combine = WeightCombine::kProduct;
  PoolOptions::Accept pool_accept = PoolOptions::Accept::kMean;
  int finetune_rounds = 3;
  RunPaths paths;
  SolverParams solver = default_solver_params();
  ObjectiveConfig objective;
  AugmentorConfig augment = default_augmentor();
  TunerConfig tuner;
  HazeSynthesisConfig synthesis;
  EmaConfig ema;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

// Defaults <- optional config file <- --set overrides <- CORUN_SEED.
RunConfig load_run_config(const std::optional<std::filesystem::path>& config_file,
                          const std::vector<std::string>& overrides);

PoolOptions pool_options(const RunConfig& cfg);
std::filesystem::path effective_pool_dir(const RunConfig& cfg);

// Workflow commands; each returns a process exit code.
int cmd_synthesize(const RunConfig& cfg);
int cmd_pretrain(const RunConfig& cfg);
int cmd_finetune(const RunConfig& cfg);
int cmd_dehaze(const RunConfig& cfg, const std::filesystem::path& input);
int cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& input,
                 const std::optional<std::filesystem::path>& lq_dir);
int cmd_pool(const RunConfig& cfg, const std::string& action, const std::string& image_id);
int cmd_sweep(const RunConfig& cfg, const std::vector<int>& stage_counts);

}  // namespace unhaze
