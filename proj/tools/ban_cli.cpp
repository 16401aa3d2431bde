// Copyright 2026 The ban-seg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// ban: generate synthetic scenes, train, evaluate, infer, check gradients,
// run mode ablations and export similarity rows.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ban/config.hpp"
#include "ban/errors.hpp"
#include "ban/gradcheck.hpp"
#include "ban/pipeline.hpp"
#include "ban/training.hpp"

namespace fs = std::filesystem;
using namespace ban;

namespace {

enum Exit : int { kOk = 0, kOther = 1, kConfigExit = 2, kDataExit = 3, kNumericExit = 4, kToleranceExit = 5 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kVersion: return kConfigExit;
    case ErrorKind::kInput:
    case ErrorKind::kParse:
    case ErrorKind::kIo:
    case ErrorKind::kSpec:
    case ErrorKind::kLabel:
    case ErrorKind::kBounds: return kDataExit;
    case ErrorKind::kNumeric: return kNumericExit;
    case ErrorKind::kTolerance: return kToleranceExit;
    default: return kOther;
  }
}

// Options shared by every subcommand that reads a RunConfig.
struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::size_t threads = 0;  // 0: keep the configured value
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, std::string("INI run config (default: $") + kConfigEnv + ")");
  cmd->add_option("-s,--set", c.overrides, "override a key, section.key=value (repeatable)");
  cmd->add_option("-j,--threads", c.threads, "worker threads; 1 is bit-reproducible");
}

// Precedence: explicit --config, then the environment, then `fallback`, then defaults.
RunConfig resolve(const Common& c, const std::optional<fs::path>& fallback = std::nullopt) {
  RunConfig config;
  if (!c.config.empty()) {
    config = RunConfig::load(c.config);
  } else if (const char* env = std::getenv(kConfigEnv); env && *env) {
    config = RunConfig::load(env);
  } else if (fallback && fs::exists(*fallback)) {
    config = RunConfig::load(*fallback);
  }
  for (const std::string& o : c.overrides) config.apply_override(o);
  if (c.threads > 0) config.threads = c.threads;
  config.validate();
  return config;
}

fs::path require_path(const std::string& flag, const std::string& configured, const std::string& key) {
  if (!flag.empty()) return flag;
  if (!configured.empty()) return configured;
  fail(ErrorKind::kConfig, "no path given; pass a flag or set " + key);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::kIo, "cannot write " + path.string());
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point cloud instance and semantic segmentation with bidirectional attention"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ban 1.0.0");

  // generate
  std::string gen_spec, gen_preset = "floor-and-chairs", gen_out;
  std::size_t gen_count = 1;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("generate", "write labeled synthetic scenes and a manifest");
  auto* spec_opt = gen->add_option("--spec", gen_spec, "INI scene recipe")->check(CLI::ExistingFile);
  gen->add_option("--preset", gen_preset, "named recipe: two-chairs, floor-and-chairs, room")
      ->excludes(spec_opt)
      ->capture_default_str();
  gen->add_option("-o,--out", gen_out, "output directory")->required();
  gen->add_option("-n,--count", gen_count, "number of scenes")->capture_default_str();
  gen->add_option("--seed", gen_seed, "first scene seed (default: the recipe's)");

  // train
  Common train_c;
  std::string train_data, train_out, train_resume;
  auto* tr = app.add_subcommand("train", "train a model; writes checkpoints and train_log.jsonl");
  add_common(tr, train_c);
  tr->add_option("-d,--data", train_data, "training dataset directory (paths.train)");
  tr->add_option("-o,--out", train_out, "run directory (paths.output)");
  tr->add_option("--resume", train_resume, "checkpoint to continue from")->check(CLI::ExistingFile);

  // eval
  Common eval_c;
  std::string eval_ckpt, eval_data, eval_out;
  bool eval_gt = false;
  auto* ev = app.add_subcommand("eval", "segment a labeled dataset and score it");
  add_common(ev, eval_c);
  auto* ck_opt = ev->add_option("-m,--checkpoint", eval_ckpt, "model checkpoint")->check(CLI::ExistingFile);
  ev->add_flag("--ground-truth", eval_gt, "score the labels themselves, through blocks and merging")
      ->excludes(ck_opt);
  ev->add_option("-d,--data", eval_data, "test dataset directory (paths.test)");
  ev->add_option("-o,--out", eval_out, "report directory (paths.output)");

  // infer
  Common infer_c;
  std::string infer_ckpt, infer_out;
  std::vector<std::string> infer_scenes;
  auto* inf = app.add_subcommand("infer", "segment scene files and write labeled clouds");
  add_common(inf, infer_c);
  inf->add_option("-m,--checkpoint", infer_ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
  inf->add_option("scenes", infer_scenes, "scene files (.txt or .json)")->required()->check(CLI::ExistingFile);
  inf->add_option("-o,--out", infer_out, "output directory")->required();

  // gradcheck
  Common gc_c;
  GradcheckOptions gc_opts;
  std::string gc_out;
  auto* gc = app.add_subcommand("gradcheck", "compare analytic gradients with literal and numeric ones");
  add_common(gc, gc_c);
  gc->add_option("--sizes", gc_opts.kronecker_sizes, "point counts for the Kronecker comparison")
      ->capture_default_str();
  gc->add_option("--cases", gc_opts.random_cases, "random finite-difference cases")->capture_default_str();
  gc->add_option("--model-seeds", gc_opts.model_seeds, "seeds for the full-model check")->capture_default_str();
  gc->add_option("--points", gc_opts.model_points, "cloud size for the full-model check")->capture_default_str();
  gc->add_option("--seed", gc_opts.seed, "base seed")->capture_default_str();
  gc->add_option("-o,--out", gc_out, "also write gradcheck.tsv and config.ini here");
  gc->add_option("--corrupt", gc_opts.corrupt, "test hook: perturb analytic gradients")->group("");

  // ablate
  Common ab_c;
  std::string ab_train, ab_test, ab_out;
  std::vector<std::string> ab_modes;
  auto* ab = app.add_subcommand("ablate", "train and evaluate every attention mode on the same data");
  add_common(ab, ab_c);
  ab->add_option("--train", ab_train, "training dataset directory (paths.train)");
  ab->add_option("--test", ab_test, "test dataset directory (paths.test)");
  ab->add_option("-o,--out", ab_out, "output directory (paths.output)");
  ab->add_option("--modes", ab_modes, "subset of modes (default: all six)");

  // export-sim
  Common ex_c;
  std::string ex_ckpt, ex_scene, ex_out;
  std::size_t ex_index = 0;
  std::optional<double> ex_threshold;
  auto* ex = app.add_subcommand("export-sim", "export one similarity row as two binary-labeled clouds");
  add_common(ex, ex_c);
  ex->add_option("-m,--checkpoint", ex_ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
  ex->add_option("--scene", ex_scene, "scene file")->required()->check(CLI::ExistingFile);
  ex->add_option("-i,--index", ex_index, "query point")->required();
  ex->add_option("-t,--threshold", ex_threshold, "similar when the row entry is at least this (default: 1/N)");
  ex->add_option("-o,--out", ex_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigExit;
  }

  try {
    if (gen->parsed()) {
      SceneSpec spec = gen_spec.empty() ? SceneSpec::preset(gen_preset) : SceneSpec::load(gen_spec);
      if (gen_seed) spec.seed = *gen_seed;
      const auto files = generate_dataset(spec, gen_count, gen_out);
      std::cout << "wrote " << files.size() << " scenes to " << gen_out << "\n";
    } else if (tr->parsed()) {
      std::optional<fs::path> fallback;
      if (!train_resume.empty()) fallback = fs::path(train_resume).parent_path() / "config.ini";
      RunConfig config = resolve(train_c, fallback);
      const fs::path data_dir = require_path(train_data, config.train_data, "paths.train");
      const fs::path out_dir = require_path(train_out, config.output, "paths.output");
      config.train_data = data_dir.string();
      config.output = out_dir.string();
      const Dataset data = load_dataset(data_dir);
      std::optional<fs::path> resume;
      if (!train_resume.empty()) resume = train_resume;
      const TrainResult r = train(config, data, out_dir, resume, &std::cout);
      std::cout << "last checkpoint " << r.last.string() << "\n";
    } else if (ev->parsed()) {
      std::optional<fs::path> fallback;
      if (!eval_ckpt.empty()) fallback = fs::path(eval_ckpt).parent_path() / "config.ini";
      RunConfig config = resolve(eval_c, fallback);
      if (eval_ckpt.empty() && !eval_gt) fail(ErrorKind::kConfig, "eval needs --checkpoint or --ground-truth");
      const fs::path data_dir = require_path(eval_data, config.test_data, "paths.test");
      const fs::path out_dir = require_path(eval_out, config.output, "paths.output");
      config.test_data = data_dir.string();
      config.output = out_dir.string();
      const Dataset data = load_dataset(data_dir);
      std::optional<LoadedCheckpoint> ck;
      if (!eval_gt) {
        ck.emplace(load_checkpoint(eval_ckpt));
        require_compatible(ck->model, config, data, eval_ckpt);
      }
      const Evaluation result = evaluate(ck ? &ck->model : nullptr, data, config);
      make_dir(out_dir);
      config.save(out_dir / "config.ini");
      write_report(result.report, out_dir);
      std::cout << result.report.to_text();
    } else if (inf->parsed()) {
      const RunConfig config = resolve(infer_c, fs::path(infer_ckpt).parent_path() / "config.ini");
      const LoadedCheckpoint ck = load_checkpoint(infer_ckpt);
      make_dir(infer_out);
      config.save(fs::path(infer_out) / "config.ini");
      for (std::size_t k = 0; k < infer_scenes.size(); ++k) {
        PointCloud scene = load_cloud(infer_scenes[k]);
        const SegmentationResult seg = segment_scene(ck.model, scene, config, k);
        scene.semantic = seg.semantic;
        scene.instance = seg.instance;
        const fs::path target = fs::path(infer_out) / fs::path(infer_scenes[k]).filename();
        save_cloud(scene, target);
        std::cout << target.string() << ": " << seg.uncovered << " points labeled from neighbors\n";
      }
    } else if (gc->parsed()) {
      const RunConfig config = resolve(gc_c);
      gc_opts.attention = config.attention;
      gc_opts.loss = config.loss;
      const std::vector<GradcheckEntry> entries = run_gradcheck(gc_opts);
      const std::string table = gradcheck_table(entries);
      std::cout << table;
      if (!gc_out.empty()) {
        make_dir(gc_out);
        config.save(fs::path(gc_out) / "config.ini");
        write_file(fs::path(gc_out) / "gradcheck.tsv", table);
      }
      std::size_t failed = 0;
      for (const GradcheckEntry& e : entries) failed += e.pass() ? 0 : 1;
      if (failed > 0) {
        std::cerr << "gradcheck: " << failed << " of " << entries.size() << " checks failed\n";
        return kToleranceExit;
      }
    } else if (ab->parsed()) {
      RunConfig config = resolve(ab_c);
      const fs::path train_dir = require_path(ab_train, config.train_data, "paths.train");
      const fs::path test_dir = require_path(ab_test, config.test_data, "paths.test");
      const fs::path out_dir = require_path(ab_out, config.output, "paths.output");
      config.train_data = train_dir.string();
      config.test_data = test_dir.string();
      config.output = out_dir.string();
      std::vector<BiDirMode> modes;
      for (const std::string& m : ab_modes) modes.push_back(parse_bidir_mode(m));
      if (modes.empty()) modes = all_bidir_modes();
      const Dataset train_set = load_dataset(train_dir);
      const Dataset test_set = load_dataset(test_dir);
      const auto rows = ablate(config, train_set, test_set, modes, out_dir, &std::cout);
      std::cout << ablation_table(rows);
    } else if (ex->parsed()) {
      const RunConfig config = resolve(ex_c, fs::path(ex_ckpt).parent_path() / "config.ini");
      const LoadedCheckpoint ck = load_checkpoint(ex_ckpt);
      const PointCloud scene = load_cloud(ex_scene);
      const auto [semantic, instance] = export_similarity(
          ck.model, scene, ex_index, ex_threshold.value_or(default_similarity_threshold(scene.size())));
      make_dir(ex_out);
      config.save(fs::path(ex_out) / "config.ini");
      save_cloud(semantic, fs::path(ex_out) / "semantic_similarity.txt");
      save_cloud(instance, fs::path(ex_out) / "instance_similarity.txt");
      std::cout << "wrote similarity masks for point " << ex_index << " to " << ex_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "ban: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "ban: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
