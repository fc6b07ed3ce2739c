// tools/ensalign.cpp

// Copyright 2026 The ensalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


// Command-line front end:
//
//   ensalign train-ensemble --out-dir models [--members 10] [--seed 1]
//   ensalign align --audio-dir wav --text-dir txt --dict dict.txt
//                  --models models/ensemble.manifest --out-dir out
//   ensalign evaluate --ref-dir ref --hyp-dir out [--method auto]
//   ensalign ci-table --hyp-dir out
//   ensalign synth --out-dir demo
//
// Options may also come from an INI file given with --config.  Exit status:
// 0 success, 1 some files failed, 2 configuration or input error.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ensalign.hpp"

namespace {

using ensalign::JobConfig;

void AddCommon(CLI::App *cmd, JobConfig &cfg) {
  cmd->add_option("--frame-advance-ms", cfg.frame_advance_ms, "Frame advance in ms")
      ->capture_default_str();
  cmd->add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
}

void AddReportLabels(CLI::App *cmd, JobConfig &cfg) {
  cmd->add_option("--split", cfg.data_split, "Data split label for the report row");
  cmd->add_option("--transcription", cfg.transcription,
                  "Transcription label for the report row");
  cmd->add_option("--report", cfg.report, "Table CSV to create or append to");
  cmd->add_option("--out-dir", cfg.out_dir, "Directory for the default report file");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Ensemble forced alignment with boundary confidence intervals"};
  app.set_config("--config", "", "INI file with option values");
  app.require_subcommand(1);
  JobConfig cfg;

  auto *align = app.add_subcommand("align", "Align recordings with a classifier ensemble");
  align->add_option("--audio-dir", cfg.audio_dir, "Directory of <id>.wav files");
  align->add_option("--text-dir", cfg.text_dir, "Directory of <id>.txt transcripts")
      ->required();
  align->add_option("--dict", cfg.dict, "Pronunciation dictionary (CMU format)");
  align->add_option("--models", cfg.models, "Classifier files or an ensemble manifest")
      ->delimiter(',');
  align->add_option("--prob-dirs", cfg.prob_dirs,
                    "Per-member directories of precomputed <id>.prob matrices")
      ->delimiter(',');
  align->add_option("--out-dir", cfg.out_dir, "Output directory")->required();
  align->add_option("--rank", cfg.rank, "Order-statistic rank of the intervals")
      ->capture_default_str();
  align->add_flag("--pseudo-lexicon", cfg.pseudo_lexicon,
                  "Transcripts list segment labels directly");
  align->add_option("--variant", cfg.variant, "Pronunciation variant policy")
      ->capture_default_str();
  AddCommon(align, cfg);

  auto *evaluate = app.add_subcommand("evaluate", "Boundary errors against references");
  evaluate->add_option("--ref-dir", cfg.ref_dir, "Reference TextGrids")->required();
  evaluate->add_option("--hyp-dir", cfg.hyp_dir, "Hypothesis TextGrids or alignment CSVs")
      ->required();
  evaluate->add_option("--tier", cfg.tier, "Interval tier to compare")->capture_default_str();
  evaluate->add_option("--method", cfg.method, "paired|dtw|auto")
      ->check(CLI::IsMember({"paired", "dtw", "auto"}))
      ->capture_default_str();
  evaluate->add_option("--method-label", cfg.method_label, "Method column override");
  AddReportLabels(evaluate, cfg);

  auto *train = app.add_subcommand("train-ensemble", "Train a classifier ensemble");
  train->add_option("--out-dir", cfg.out_dir, "Model directory")->required();
  train->add_option("--members", cfg.members, "Ensemble size")->capture_default_str();
  train->add_option("--audio-dir", cfg.audio_dir,
                    "Training recordings (default: synthetic corpus)");
  train->add_option("--ref-dir", cfg.ref_dir, "Reference TextGrids for --audio-dir");
  train->add_option("--tier", cfg.tier, "Reference tier with segment labels")
      ->capture_default_str();
  train->add_option("--synthetic-files", cfg.synthetic_files, "Synthetic training files")
      ->capture_default_str();
  train->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
  train->add_option("--learning-rate", cfg.learning_rate, "SGD step size")
      ->capture_default_str();
  bool no_bootstrap = false;
  train->add_flag("--no-bootstrap", no_bootstrap, "Train every member on the full data");
  AddCommon(train, cfg);

  auto *ci = app.add_subcommand("ci-table", "Summarize interval widths of aligned files");
  ci->add_option("--hyp-dir", cfg.hyp_dir, "Directory of <id>.ci.csv files");
  AddReportLabels(ci, cfg);

  std::size_t synth_files = 20;
  auto *synth = app.add_subcommand("synth", "Write a small synthetic demo corpus");
  synth->add_option("--out-dir", cfg.out_dir, "Corpus directory")->required();
  synth->add_option("--files", synth_files, "Number of utterances")->capture_default_str();
  synth->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  cfg.bootstrap = !no_bootstrap;

  try {
    if (*align) {
      cfg.command = "align";
      return ensalign::RunAlign(cfg, std::cerr).exit_code();
    }
    if (*evaluate) {
      cfg.command = "evaluate";
      return ensalign::RunEvaluate(cfg, std::cerr).summary.exit_code();
    }
    if (*train) {
      cfg.command = "train-ensemble";
      ensalign::RunTrainEnsemble(cfg, std::cerr);
      return 0;
    }
    if (*ci) {
      cfg.command = "ci-table";
      ensalign::RunCiTable(cfg, std::cerr);
      return 0;
    }
    if (*synth) {
      cfg.command = "synth";
      ensalign::RunSynth(cfg, synth_files, std::cerr);
      return 0;
    }
  } catch (const ensalign::Error &e) {
    std::cerr << "error [" << ensalign::ToString(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
