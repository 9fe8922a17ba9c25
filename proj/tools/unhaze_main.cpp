#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unhaze/cli/commands.hpp"
#include "unhaze/core/error.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config;
  std::vector<std::string> sets;
  std::string output;
  int jobs = 0;  // 0: keep configured value
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--config", opts.config, "JSON configuration file");
  sub->add_option("--set", opts.sets, "Dotted-path override, e.g. --set tuner.budget=50")
      ->take_all();
  sub->add_option("--output", opts.output, "Output directory");
  sub->add_option("--jobs", opts.jobs, "Worker threads");
}

unhaze::RunConfig make_config(const CommonOpts& opts) {
  std::optional<fs::path> file;
  if (!opts.config.empty()) file = fs::path(opts.config);
  std::vector<std::string> sets = opts.sets;
  if (!opts.output.empty()) sets.push_back("paths.output_dir=" + opts.output);
  if (opts.jobs > 0) sets.push_back("jobs=" + std::to_string(opts.jobs));
  return unhaze::load_run_config(file, sets);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unhaze: cooperative-unfolding dehazer with self-trained labels"};
  app.require_subcommand(1);

  std::function<int()> action;

  // synthesize
  {
    auto opts = std::make_shared<CommonOpts>();
    auto input = std::make_shared<std::string>();
    CLI::App* sub = app.add_subcommand(
        "synthesize", "Compose hazy/clear training pairs from scenes and depth maps");
    add_common(sub, *opts);
    sub->add_option("--input", *input, "Directory of <stem>.png scenes with <stem>.pfm depths");
    sub->callback([&action, opts, input] {
      action = [opts, input] {
        unhaze::RunConfig cfg = make_config(*opts);
        if (!input->empty()) cfg.paths.input_dir = *input;
        return unhaze::cmd_synthesize(cfg);
      };
    });
  }

  // pretrain
  {
    auto opts = std::make_shared<CommonOpts>();
    auto synthetic = std::make_shared<std::string>();
    auto params = std::make_shared<std::string>();
    CLI::App* sub =
        app.add_subcommand("pretrain", "Tune solver parameters on the synthetic corpus");
    add_common(sub, *opts);
    sub->add_option("--synthetic", *synthetic, "Synthesized corpus directory");
    sub->add_option("--params", *params, "Initial solver parameters (JSON)");
    sub->callback([&action, opts, synthetic, params] {
      action = [opts, synthetic, params] {
        unhaze::RunConfig cfg = make_config(*opts);
        if (!synthetic->empty()) cfg.paths.synthetic_dir = *synthetic;
        if (!params->empty()) cfg.paths.params_file = *params;
        return unhaze::cmd_pretrain(cfg);
      };
    });
  }

  // finetune
  {
    auto opts = std::make_shared<CommonOpts>();
    auto synthetic = std::make_shared<std::string>();
    auto real = std::make_shared<std::string>();
    auto params = std::make_shared<std::string>();
    auto pool = std::make_shared<std::string>();
    CLI::App* sub = app.add_subcommand(
        "finetune", "Self-train on real images with a teacher-maintained label pool");
    add_common(sub, *opts);
    sub->add_option("--synthetic", *synthetic, "Synthesized corpus directory");
    sub->add_option("--real", *real, "Directory of real hazy PNGs");
    sub->add_option("--params", *params, "Pretrained solver parameters (JSON)");
    sub->add_option("--pool", *pool, "Label pool directory");
    sub->callback([&action, opts, synthetic, real, params, pool] {
      action = [opts, synthetic, real, params, pool] {
        unhaze::RunConfig cfg = make_config(*opts);
        if (!synthetic->empty()) cfg.paths.synthetic_dir = *synthetic;
        if (!real->empty()) cfg.paths.real_dir = *real;
        if (!params->empty()) cfg.paths.params_file = *params;
        if (!pool->empty()) cfg.paths.pool_dir = *pool;
        return unhaze::cmd_finetune(cfg);
      };
    });
  }

  // dehaze
  {
    auto opts = std::make_shared<CommonOpts>();
    auto input = std::make_shared<std::string>();
    auto params = std::make_shared<std::string>();
    CLI::App* sub = app.add_subcommand("dehaze", "Dehaze a PNG file or a directory of PNGs");
    add_common(sub, *opts);
    sub->add_option("input", *input, "Input PNG file or directory")->required();
    sub->add_option("--params", *params, "Solver parameters (JSON)");
    sub->callback([&action, opts, input, params] {
      action = [opts, input, params] {
        unhaze::RunConfig cfg = make_config(*opts);
        if (!params->empty()) cfg.paths.params_file = *params;
        return unhaze::cmd_dehaze(cfg, fs::path(*input));
      };
    });
  }

  // evaluate
  {
    auto opts = std::make_shared<CommonOpts>();
    auto input = std::make_shared<std::string>();
    auto lq = std::make_shared<std::string>();
    CLI::App* sub = app.add_subcommand(
        "evaluate", "Report haze density / quality (and coherence against hazy inputs)");
    add_common(sub, *opts);
    sub->add_option("input", *input, "Directory of dehazed PNGs (with optional .pfm maps)")
        ->required();
    sub->add_option("--lq", *lq, "Directory of the matching hazy inputs");
    sub->callback([&action, opts, input, lq] {
      action = [opts, input, lq] {
        unhaze::RunConfig cfg = make_config(*opts);
        std::optional<fs::path> lq_dir;
        if (!lq->empty()) lq_dir = fs::path(*lq);
        return unhaze::cmd_evaluate(cfg, fs::path(*input), lq_dir);
      };
    });
  }

  // pool
  {
    auto opts = std::make_shared<CommonOpts>();
    auto pool_action = std::make_shared<std::string>();
    auto pool_dir = std::make_shared<std::string>();
    auto id = std::make_shared<std::string>();
    CLI::App* sub = app.add_subcommand("pool", "Inspect or verify a label pool");
    add_common(sub, *opts);
    sub->add_option("action", *pool_action, "list, show, or verify")
        ->required()
        ->check(CLI::IsMember({"list", "show", "verify"}));
    sub->add_option("--pool", *pool_dir, "Label pool directory");
    sub->add_option("--id", *id, "Image id (for show)");
    sub->callback([&action, opts, pool_action, pool_dir, id] {
      action = [opts, pool_action, pool_dir, id] {
        unhaze::RunConfig cfg = make_config(*opts);
        if (!pool_dir->empty()) cfg.paths.pool_dir = *pool_dir;
        return unhaze::cmd_pool(cfg, *pool_action, *id);
      };
    });
  }

  // sweep
  {
    auto opts = std::make_shared<CommonOpts>();
    auto synthetic = std::make_shared<std::string>();
    auto stages = std::make_shared<std::vector<int>>();
    CLI::App* sub =
        app.add_subcommand("sweep", "Tune at several stage counts and tabulate the results");
    add_common(sub, *opts);
    sub->add_option("--synthetic", *synthetic, "Synthesized corpus directory");
    sub->add_option("--stages", *stages, "Stage counts, e.g. --stages 1,2,4")
        ->delimiter(',');
    sub->callback([&action, opts, synthetic, stages] {
      action = [opts, synthetic, stages] {
        unhaze::RunConfig cfg = make_config(*opts);
        if (!synthetic->empty()) cfg.paths.synthetic_dir = *synthetic;
        std::vector<int> counts = *stages;
        if (counts.empty()) counts = {1, 2, 4};
        return unhaze::cmd_sweep(cfg, counts);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return unhaze::kExitConfig;
  }

  try {
    return action ? action() : unhaze::kExitConfig;
  } catch (const unhaze::PoolError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return unhaze::kExitPool;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return unhaze::kExitConfig;
  }
}
