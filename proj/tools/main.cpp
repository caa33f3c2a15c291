// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver. Exit codes: 0 success, 2 configuration error,
// 3 data/file error, 4 numeric failure, 1 anything else.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "shufflepose/csm.hpp"
#include "shufflepose/gradcheck.hpp"
#include "shufflepose/pipeline/train.hpp"

namespace {

using namespace shufflepose;

struct CommonArgs {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_dir = "out";
  std::string variant;
  std::uint64_t seed = 0;
  bool seed_set = false;
  Index groups = 0;
  bool groups_set = false;
};

pipeline::Config resolve_config(const CommonArgs& args) {
  pipeline::Config cfg;
  if (!args.config_path.empty()) {
    cfg = pipeline::load_config(args.config_path);
  }
  if (args.seed_set) cfg.train.seed = args.seed;
  if (args.groups_set) cfg.model.groups = args.groups;
  if (!args.variant.empty()) {
    cfg.model.variant = attention::parse_variant(args.variant);
  }
  return cfg;
}

void add_common(CLI::App* sub, CommonArgs& args, bool with_checkpoint) {
  sub->add_option("--config", args.config_path,
                  "Config file (key = value lines); defaults when omitted");
  sub->add_option("--out", args.out_dir, "Output directory")
      ->capture_default_str();
  sub->add_option("--seed", args.seed, "Override the config seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  sub->add_option("--groups", args.groups, "Override the shuffle group count")
      ->each([&args](const std::string&) { args.groups_set = true; });
  sub->add_option("--variant", args.variant,
                  "Override the block variant: plain, scarb or csarb");
  if (with_checkpoint) {
    sub->add_option("--checkpoint", args.checkpoint_path, "Checkpoint file")
        ->required();
  }
}

int run_gradcheck(std::uint64_t seed) {
  const auto results = gradcheck::run_suite(seed);
  bool all_ok = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "ok   " : "FAIL ") << r.name
              << "  max_rel_err=" << r.max_rel_err
              << "  coords=" << r.coords_checked << '\n';
    all_ok = all_ok && r.pass;
  }
  if (!all_ok) {
    throw NumericError("gradient check failed");
  }
  std::cout << "all " << results.size() << " gradient checks passed\n";
  return 0;
}

int run_shuffle_demo(Index channels, Index groups) {
  const csm::ShuffleSpec spec{groups, channels};
  const auto perm = csm::shuffle_permutation(spec);
  const auto inv =
      csm::shuffle_permutation({channels / groups, channels});
  std::cout << "channels " << channels << ", groups " << groups << '\n';
  std::cout << "permutation:";
  for (const Index p : perm) std::cout << ' ' << p;
  std::cout << '\n';
  std::cout << "inverse:";
  for (const Index p : inv) std::cout << ' ' << p;
  std::cout << '\n';
  bool identity = true;
  for (Index i = 0; i < channels; ++i) {
    if (inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] != i) {
      identity = false;
    }
  }
  std::cout << "roundtrip: " << (identity ? "identity" : "BROKEN") << '\n';
  return identity ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose estimation with channel shuffling and attention blocks"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, infer_args, data_args;
  std::uint64_t gradcheck_seed = 0;
  Index demo_channels = 8, demo_groups = 2;

  CLI::App* cmd_train = app.add_subcommand("train", "Train on synthetic data");
  add_common(cmd_train, train_args, false);

  CLI::App* cmd_eval =
      app.add_subcommand("eval", "Evaluate a checkpoint on the held-out split");
  add_common(cmd_eval, eval_args, true);

  CLI::App* cmd_infer =
      app.add_subcommand("infer", "Dump heatmaps and decoded predictions");
  add_common(cmd_infer, infer_args, true);

  CLI::App* cmd_grad =
      app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  cmd_grad->add_option("--seed", gradcheck_seed, "Random seed")
      ->capture_default_str();

  CLI::App* cmd_demo =
      app.add_subcommand("shuffle-demo", "Print a channel shuffle permutation");
  cmd_demo->add_option("channels", demo_channels, "Total channel count")
      ->required();
  cmd_demo->add_option("--groups", demo_groups, "Shuffle groups")
      ->capture_default_str();

  CLI::App* cmd_data =
      app.add_subcommand("make-data", "Write a synthetic dataset to disk");
  add_common(cmd_data, data_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_train->parsed()) {
      const auto cfg = resolve_config(train_args);
      const auto result = pipeline::train(cfg, train_args.out_dir);
      std::cout << "trained " << result.steps
                << " steps, final loss " << result.final_total << '\n'
                << "wrote " << result.checkpoint_path << '\n';
    } else if (cmd_eval->parsed()) {
      const auto cfg = resolve_config(eval_args);
      const auto result = pipeline::evaluate(cfg, eval_args.checkpoint_path,
                                             eval_args.out_dir);
      std::cout << result.report << '\n';
    } else if (cmd_infer->parsed()) {
      const auto cfg = resolve_config(infer_args);
      pipeline::infer_to_dir(cfg, infer_args.checkpoint_path,
                             infer_args.out_dir);
      std::cout << "wrote heatmaps and predictions to " << infer_args.out_dir
                << '\n';
    } else if (cmd_grad->parsed()) {
      return run_gradcheck(gradcheck_seed);
    } else if (cmd_demo->parsed()) {
      return run_shuffle_demo(demo_channels, demo_groups);
    } else if (cmd_data->parsed()) {
      const auto cfg = resolve_config(data_args);
      pipeline::make_data_to_dir(cfg, data_args.out_dir);
      std::cout << "wrote dataset to " << data_args.out_dir << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
