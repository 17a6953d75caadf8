/*
 * Copyright 2026 The SISA++ Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end.
//
//   sisa synth   --spec <synth-spec> --out <file>
//   sisa plan    --data <file> --shards K --slices R --seed S [--random] --out <file>
//   sisa train   --data <file> --plan <file> [--config <file>] --out <run-dir>
//   sisa unlearn --run <dir> (--remove-users u1,u2 | --remove-points p1,p2)
//   sisa verify  --before <gen-dir> --after <gen-dir>
//   sisa infer   --run <dir> --mode vote|mean|merge --input <file> [--out <file>]
//   sisa eval    --run <dir> --test <file>
//   sisa bench   (--data <file> | --synth <spec>) [--grid <file>] --out <dir>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "sisa/aggregate.h"
#include "sisa/dataset.h"
#include "sisa/errors.h"
#include "sisa/harness.h"
#include "sisa/kv.h"
#include "sisa/run.h"
#include "sisa/sharding.h"
#include "sisa/synth.h"
#include "sisa/trainer.h"
#include "sisa/unlearn.h"

namespace fs = std::filesystem;

namespace {

std::set<std::string> SplitSet(const std::string& csv) {
  std::set<std::string> out;
  for (const std::string& part : sisa::SplitString(csv, ',')) {
    if (!part.empty()) out.insert(part);
  }
  return out;
}

// A generation directory lives directly under its run directory.
std::pair<fs::path, int> SplitGenerationPath(const fs::path& gen_dir) {
  fs::path p = gen_dir;
  if (p.filename().empty()) p = p.parent_path();
  return {p.parent_path(), sisa::Run::ParseGenerationDir(p)};
}

void PrintScores(const std::string& label, const sisa::Task& task,
                 const sisa::Scores& scores) {
  if (task.is_classification()) {
    std::cout << label << ".accuracy=" << sisa::FormatDouble(scores.first) << "\n"
              << label << ".macro_f1=" << sisa::FormatDouble(scores.second) << "\n";
  } else {
    std::cout << label << ".mae=" << sisa::FormatDouble(scores.first) << "\n"
              << label << ".rmse=" << sisa::FormatDouble(scores.second) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharded, sliced training with exact unlearning (SISA / SISA++)"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic feature file");
  std::string synth_spec = "task=cls,n=600,users=40,d=16,C=6,sep=4,seed=1";
  std::string synth_out;
  synth->add_option("--spec", synth_spec, "e.g. task=cls,n=600,users=40,d=16,C=6,sep=4,seed=1");
  synth->add_option("--out", synth_out, "Output feature file")->required();

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Partition a feature file into shards and slices");
  std::string plan_data, plan_out;
  int plan_shards = 4, plan_slices = 2;
  uint64_t plan_seed = 7;
  bool plan_random = false;
  plan_cmd->add_option("--data", plan_data, "Feature file")->required();
  plan_cmd->add_option("--shards", plan_shards, "Shard count K");
  plan_cmd->add_option("--slices", plan_slices, "Slices per shard R");
  plan_cmd->add_option("--seed", plan_seed, "Master seed");
  plan_cmd->add_flag("--random", plan_random, "Seeded random assignment instead of user-aware");
  plan_cmd->add_option("--out", plan_out, "Output plan file")->required();

  // train
  auto* train = app.add_subcommand("train", "Train every shard and checkpoint each slice stage");
  std::string train_data, train_plan, train_config, train_out;
  train->add_option("--data", train_data, "Feature file")->required();
  train->add_option("--plan", train_plan, "Plan file")->required();
  train->add_option("--config", train_config, "Training config (key=value)");
  train->add_option("--out", train_out, "Run directory to create")->required();

  // unlearn
  auto* unlearn = app.add_subcommand("unlearn", "Erase users or points and retrain affected shards");
  std::string unlearn_run, remove_users, remove_points, unlearn_report;
  unlearn->add_option("--run", unlearn_run, "Run directory")->required();
  auto* users_opt = unlearn->add_option("--remove-users", remove_users, "Comma-separated user ids");
  auto* points_opt = unlearn->add_option("--remove-points", remove_points, "Comma-separated point ids");
  users_opt->excludes(points_opt);
  unlearn->add_option("--report", unlearn_report, "Also write the report here");

  // verify
  auto* verify = app.add_subcommand("verify", "Check that a generation correctly erased its request");
  std::string verify_before, verify_after, verify_report;
  verify->add_option("--before", verify_before, "Parent generation directory")->required();
  verify->add_option("--after", verify_after, "Generation directory to verify")->required();
  verify->add_option("--report", verify_report, "Also write the report here");

  // infer
  auto* infer = app.add_subcommand("infer", "Predict with the current generation");
  std::string infer_run, infer_mode = "merge", infer_input, infer_out;
  infer->add_option("--run", infer_run, "Run directory")->required();
  infer->add_option("--mode", infer_mode, "vote | mean | merge");
  infer->add_option("--input", infer_input, "Feature file with rows to predict")->required();
  infer->add_option("--out", infer_out, "Predictions file (default: stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score the current generation on a test file");
  std::string eval_run, eval_test;
  eval->add_option("--run", eval_run, "Run directory")->required();
  eval->add_option("--test", eval_test, "Test feature file")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Run the before/after unlearning grid");
  std::string bench_data, bench_synth, bench_grid, bench_out;
  auto* data_opt = bench->add_option("--data", bench_data, "Feature file");
  auto* synth_opt = bench->add_option("--synth", bench_synth, "Synthetic data spec");
  data_opt->excludes(synth_opt);
  bench->add_option("--grid", bench_grid, "Grid config (key=value)");
  bench->add_option("--out", bench_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const sisa::SynthSpec spec = sisa::SynthSpec::Parse(synth_spec);
      sisa::SaveFeatureFile(sisa::GenerateSynthetic(spec), synth_out);
      std::cout << "wrote " << synth_out << " (" << spec.ToString() << ")\n";
    } else if (*plan_cmd) {
      const sisa::Dataset data = sisa::LoadFeatureFile(plan_data);
      const sisa::ShardPlan plan =
          sisa::MakeShardPlan(data, plan_shards, plan_slices, plan_seed, !plan_random);
      sisa::SavePlan(plan, plan_out);
      const auto sizes = plan.ShardSizes();
      for (size_t k = 0; k < sizes.size(); ++k) {
        std::cout << "shard." << k << ".points=" << sizes[k] << "\n";
      }
    } else if (*train) {
      const sisa::Dataset data = sisa::LoadFeatureFile(train_data);
      const sisa::ShardPlan plan = sisa::LoadPlan(train_plan);
      sisa::TrainConfig cfg;
      if (!train_config.empty()) {
        cfg = sisa::TrainConfig::FromKeyValue(sisa::KeyValueFile::Load(train_config));
      } else {
        cfg.master_seed = plan.master_seed();
      }
      const sisa::Run run = sisa::Run::Train(train_out, data, plan, cfg);
      std::cout << "trained " << plan.num_shards() << " shards x " << plan.num_slices()
                << " stages into " << run.GenerationDir(0).string() << "\n";
    } else if (*unlearn) {
      if (remove_users.empty() && remove_points.empty()) {
        throw sisa::InvalidArgumentError("unlearn: give --remove-users or --remove-points");
      }
      sisa::UnlearnRequest request = sisa::UnlearnRequest::ForUsers({"-"});
      if (!remove_users.empty()) {
        request = sisa::UnlearnRequest::ForUsers(SplitSet(remove_users));
      } else {
        std::set<sisa::PointId> ids;
        for (const std::string& p : SplitSet(remove_points)) ids.insert(sisa::ParseUint(p));
        request = sisa::UnlearnRequest::ForPoints(std::move(ids));
      }
      sisa::Run run = sisa::Run::Open(unlearn_run);
      const sisa::UnlearnOutcome outcome = sisa::ExecuteUnlearn(run, request);
      const sisa::KeyValueFile report = outcome.ToReport();
      if (!unlearn_report.empty()) report.Save(unlearn_report);
      std::cout << report.Format();
    } else if (*verify) {
      const auto [before_run, before_gen] = SplitGenerationPath(verify_before);
      const auto [after_run, after_gen] = SplitGenerationPath(verify_after);
      if (fs::weakly_canonical(before_run) != fs::weakly_canonical(after_run)) {
        throw sisa::IntegrityError("verify: generations belong to different runs");
      }
      const sisa::Run run = sisa::Run::Open(after_run);
      const sisa::ErasureReport report = sisa::VerifyErasure(run, before_gen, after_gen);
      const sisa::KeyValueFile kv = report.ToReport();
      if (!verify_report.empty()) kv.Save(verify_report);
      std::cout << kv.Format();
      return report.passed() ? EXIT_SUCCESS : EXIT_FAILURE;
    } else if (*infer) {
      const sisa::Run run = sisa::Run::Open(infer_run);
      const sisa::EnsembleModel ensemble =
          sisa::EnsembleOfRun(run, sisa::ParseEnsembleMode(infer_mode));
      const sisa::Dataset input = sisa::LoadFeatureFile(infer_input);
      std::string out;
      for (const sisa::DataPoint& p : input.points()) {
        const double prediction = ensemble.Predict(p.features);
        out += run.dataset().task().is_classification()
                   ? std::to_string(static_cast<int>(prediction))
                   : sisa::FormatDouble(prediction);
        out += '\n';
      }
      if (infer_out.empty()) {
        std::cout << out;
      } else {
        sisa::WriteFileAtomic(infer_out, out);
      }
    } else if (*eval) {
      const sisa::Run run = sisa::Run::Open(eval_run);
      const sisa::Dataset test = sisa::LoadFeatureFile(eval_test);
      const sisa::Task& task = run.dataset().task();
      std::cout << "generation=" << run.current_generation() << "\n";
      uint64_t passes = 0;
      PrintScores(sisa::ToString(sisa::DefaultEnsembleMode(task)), task,
                  sisa::Evaluate(sisa::EnsembleOfRun(run, sisa::DefaultEnsembleMode(task)), test,
                                 &passes));
      std::cout << sisa::ToString(sisa::DefaultEnsembleMode(task))
                << ".forward_passes_per_query=" << passes << "\n";
      PrintScores("merge", task,
                  sisa::Evaluate(sisa::EnsembleOfRun(run, sisa::EnsembleMode::kWeightAverage),
                                 test, &passes));
      std::cout << "merge.forward_passes_per_query=" << passes << "\n";
    } else if (*bench) {
      if (bench_data.empty() && bench_synth.empty()) {
        throw sisa::InvalidArgumentError("bench: give --data or --synth");
      }
      const sisa::Dataset data =
          bench_data.empty() ? sisa::GenerateSynthetic(sisa::SynthSpec::Parse(bench_synth))
                             : sisa::LoadFeatureFile(bench_data);
      const sisa::GridConfig grid =
          bench_grid.empty() ? sisa::GridConfig{}
                             : sisa::GridConfig::FromKeyValue(sisa::KeyValueFile::Load(bench_grid));
      fs::create_directories(bench_out);
      const auto reports = sisa::RunGrid(data, grid, bench_out);
      std::cout << sisa::FormatComparisonTable(reports);
      for (const auto& r : reports) {
        if (!r.ok) return EXIT_FAILURE;
      }
    }
  } catch (const sisa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return EXIT_SUCCESS;
}
