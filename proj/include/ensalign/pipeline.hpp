// ensalign/pipeline.hpp

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

// Batch jobs behind the command-line tool: ensemble training, ensemble
// alignment of a directory of recordings, evaluation against reference
// TextGrids and CI-width tables.  Every job is deterministic for a fixed
// configuration; the worker count only changes throughput.

#ifndef ENSALIGN_PIPELINE_HPP
#define ENSALIGN_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ensalign/acoustic.hpp"
#include "ensalign/aligner.hpp"
#include "ensalign/ensemble.hpp"
#include "ensalign/evaluation.hpp"
#include "ensalign/features.hpp"
#include "ensalign/lexicon.hpp"
#include "ensalign/synthetic.hpp"
#include "ensalign/textgrid.hpp"
#include "ensalign/wav.hpp"

namespace ensalign {

namespace fs = std::filesystem;

struct JobConfig {
  std::string command;
  fs::path audio_dir;
  fs::path text_dir;
  fs::path dict;
  std::vector<std::string> models;  // classifier files, or one manifest
  std::vector<fs::path> prob_dirs;  // one directory of <id>.prob per member
  fs::path out_dir;
  fs::path ref_dir;
  fs::path hyp_dir;
  fs::path report;
  std::size_t rank = 2;
  double frame_advance_ms = 10.0;
  unsigned workers = 1;
  std::string method = "auto";
  std::string method_label;
  std::uint64_t seed = 1;
  std::size_t members = 10;
  bool pseudo_lexicon = false;
  std::string variant = "first";
  std::string tier = "phones";
  std::string data_split;
  std::string transcription;
  std::size_t synthetic_files = 40;
  int epochs = 15;
  double learning_rate = 0.1;
  bool bootstrap = true;
};

inline void RequireDir(const fs::path &p, const char *flag) {
  if (p.empty()) throw Error(ErrorCode::kConfig, std::string(flag) + " is required");
  if (!fs::is_directory(p))
    throw Error(ErrorCode::kConfig,
                std::string(flag) + ": '" + p.string() + "' is not a directory");
}

inline void RequireFile(const fs::path &p, const char *flag) {
  if (p.empty()) throw Error(ErrorCode::kConfig, std::string(flag) + " is required");
  if (!fs::is_regular_file(p))
    throw Error(ErrorCode::kConfig, std::string(flag) + ": '" + p.string() + "' not found");
}

/// Runs fn(0) .. fn(count-1) on up to `workers` threads.
inline void ParallelFor(std::size_t count, unsigned workers,
                        const std::function<void(std::size_t)> &fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                                  std::max<std::size_t>(count, 1))));
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
  work();
}

/// Sorted stems of the files in `dir` whose name ends with `suffix`.
inline std::vector<std::string> ListIds(const fs::path &dir, std::string_view suffix) {
  std::vector<std::string> ids;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix))
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline MfccOptions FeatureOptions(const JobConfig &cfg) {
  MfccOptions o;
  o.frame_advance_s = cfg.frame_advance_ms / 1000.0;
  if (!(o.frame_advance_s > 0.0) || o.frame_advance_s > o.frame_length_s)
    throw Error(ErrorCode::kConfig, "--frame-advance-ms must be in (0, 25]");
  return o;
}

// ---------------------------------------------------------------------------
// Ensemble manifests

inline constexpr std::string_view kManifestMagic = "ensalign-manifest";

struct ManifestEntry {
  fs::path model;
  std::uint64_t seed = 0;
};

inline std::string WriteManifest(const std::vector<ManifestEntry> &entries) {
  std::string out = std::string(kManifestMagic) + " 1\n";
  for (std::size_t i = 0; i < entries.size(); ++i)
    out += "member " + std::to_string(i) + " " + entries[i].model.generic_string() +
           " seed " + std::to_string(entries[i].seed) + "\n";
  return out;
}

inline std::vector<ManifestEntry> ReadManifest(const fs::path &path) {
  const std::string text = ReadFile(path);
  const auto lines = detail::SplitLines(text);
  if (lines.empty() || !lines[0].starts_with(kManifestMagic))
    throw Error(ErrorCode::kParse, path.string() + ": not an ensemble manifest");
  std::vector<ManifestEntry> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = detail::SplitWhitespace(lines[i]);
    if (f.empty()) continue;
    if (f.size() != 5 || f[0] != "member" || f[3] != "seed")
      throw Error(ErrorCode::kParse,
                  path.string() + ": line " + std::to_string(i + 1) + ": bad member entry");
    fs::path model = f[2];
    if (model.is_relative()) model = path.parent_path() / model;
    out.push_back({model, std::stoull(f[4])});
  }
  if (out.empty()) throw Error(ErrorCode::kParse, path.string() + ": no members");
  return out;
}

inline bool LooksLikeManifest(const fs::path &p) {
  std::ifstream in(p);
  std::string first;
  std::getline(in, first);
  return first.starts_with(kManifestMagic);
}

/// Loads classifiers from a comma list of files or from one manifest.
inline std::vector<FrameClassifier> LoadModels(const std::vector<std::string> &specs) {
  std::vector<fs::path> paths;
  for (const auto &s : specs) {
    if (s.empty()) continue;
    if (!fs::is_regular_file(s))
      throw Error(ErrorCode::kConfig, "--models: '" + s + "' not found");
    if (LooksLikeManifest(s)) {
      for (const auto &e : ReadManifest(s)) paths.push_back(e.model);
    } else {
      paths.emplace_back(s);
    }
  }
  if (paths.empty()) throw Error(ErrorCode::kConfig, "--models lists no classifiers");
  std::vector<FrameClassifier> models;
  for (const auto &p : paths) {
    try {
      models.push_back(ReadClassifier(ReadFile(p)));
    } catch (const Error &e) {
      throw Error(e.code(), p.string() + ": " + e.what());
    }
  }
  for (std::size_t i = 1; i < models.size(); ++i)
    if (!(models[i].inventory == models[0].inventory) || models[i].dim() != models[0].dim())
      throw Error(ErrorCode::kEnsembleMismatch,
                  "model " + paths[i].string() + " has a different inventory or input size");
  return models;
}

/// Reads a probability-matrix file using the class names it declares.
inline LogProbMatrix ReadProbMatrixFile(const fs::path &path) {
  const std::string text = ReadFile(path);
  const auto lines = detail::SplitLines(detail::StripBom(text));
  std::size_t li = 0;
  while (li < lines.size() && detail::SplitWhitespace(lines[li]).empty()) ++li;
  ++li;
  while (li < lines.size() && detail::SplitWhitespace(lines[li]).empty()) ++li;
  if (li >= lines.size()) throw Error(ErrorCode::kParse, path.string() + ": no class names");
  ClassInventory inv(detail::SplitWhitespace(lines[li]));
  try {
    return LoadProbMatrix(text, inv);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// align

struct FileFailure {
  std::string id;
  std::string message;
};

struct BatchSummary {
  std::size_t total = 0;
  std::vector<std::string> succeeded;
  std::vector<FileFailure> failures;
  std::vector<std::string> warnings;

  int exit_code() const { return failures.empty() ? 0 : 1; }
};

/// The aligned result for one recording.
struct FileAlignment {
  std::vector<Alignment> members;
  EnsembleAlignment ensemble;
  std::optional<Alignment> words;
  TextGrid grid;
};

/// Word-level alignment whose word j ends where its last segment ends.
inline Alignment WordAlignment(const EnsembleAlignment &ea,
                               const std::vector<std::string> &tokens,
                               const std::vector<std::size_t> &word_ends) {
  Alignment w;
  w.labels = tokens;
  w.source_id = ea.source_id;
  for (std::size_t e : word_ends) w.end_times_s.push_back(ea.median_s[e - 1]);
  return w;
}

/// Aligns every member's posteriors, aggregates, and renders the TextGrid.
inline FileAlignment AlignEnsemble(const std::vector<LogProbMatrix> &posteriors,
                                   const std::vector<std::string> &labels,
                                   const std::string &source_id, std::size_t rank,
                                   double duration_s, const Transcript *words = nullptr,
                                   const std::vector<std::size_t> *word_ends = nullptr) {
  FileAlignment out;
  for (const auto &p : posteriors) out.members.push_back(Align(p, labels, source_id));
  out.ensemble = Aggregate(out.members, rank);
  if (words != nullptr && word_ends != nullptr)
    out.words = WordAlignment(out.ensemble, words->tokens, *word_ends);
  const double xmax = std::max(duration_s, out.ensemble.median_s.back());
  out.grid = Render(out.ensemble, out.words ? &*out.words : nullptr, 0.0, xmax);
  return out;
}

inline void WriteFileOutputs(const fs::path &out_dir, const std::string &id,
                             const FileAlignment &fa) {
  WriteFileAtomic(out_dir / (id + ".TextGrid"), WriteTextGrid(fa.grid));
  WriteFileAtomic(out_dir / (id + ".ci.csv"), CiTableToCsv(fa.ensemble));
  const fs::path members = out_dir / "members";
  fs::create_directories(members);
  for (std::size_t e = 0; e < fa.members.size(); ++e) {
    char tag[16];
    std::snprintf(tag, sizeof(tag), ".m%02zu", e);
    WriteFileAtomic(members / (id + tag + ".align.csv"), AlignmentToCsv(fa.members[e]));
  }
}

inline BatchSummary RunAlign(const JobConfig &cfg, std::ostream &log) {
  if (cfg.rank < 1) throw Error(ErrorCode::kConfig, "--rank must be >= 1");
  if (cfg.workers < 1) throw Error(ErrorCode::kConfig, "--workers must be >= 1");
  if (cfg.out_dir.empty()) throw Error(ErrorCode::kConfig, "--out-dir is required");
  const bool from_matrices = !cfg.prob_dirs.empty();
  const MfccOptions mfcc = FeatureOptions(cfg);

  std::vector<FrameClassifier> models;
  if (from_matrices) {
    for (const auto &d : cfg.prob_dirs) RequireDir(d, "--prob-dirs");
  } else {
    RequireDir(cfg.audio_dir, "--audio-dir");
    models = LoadModels(cfg.models);
    if (models[0].dim() != static_cast<std::size_t>(3 * mfcc.num_ceps))
      throw Error(ErrorCode::kShapeMismatch, "models expect " +
                                                 std::to_string(models[0].dim()) +
                                                 "-dimensional features");
  }
  RequireDir(cfg.text_dir, "--text-dir");
  Lexicon lexicon;
  if (!cfg.pseudo_lexicon) {
    RequireFile(cfg.dict, "--dict");
    lexicon = ParseDictionary(ReadFile(cfg.dict));
  }
  if (cfg.variant != "first")
    throw Error(ErrorCode::kConfig, "--variant supports only 'first' on the command line");
  fs::create_directories(cfg.out_dir);

  const auto ids = from_matrices ? ListIds(cfg.prob_dirs[0], ".prob")
                                 : ListIds(cfg.audio_dir, ".wav");
  const std::size_t E = from_matrices ? cfg.prob_dirs.size() : models.size();
  BatchSummary summary;
  summary.total = ids.size();
  if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "no input files found");
  if (E < 2 * cfg.rank)
    summary.warnings.push_back("ensemble of " + std::to_string(E) + " member(s) cannot form rank-" +
                               std::to_string(cfg.rank) +
                               " intervals; TextGrids will have no ci tier");

  struct Work {
    std::string id;
    Transcript transcript;
    Expansion expansion;
    std::vector<std::string> labels;
    FeatureMatrix features;
    double duration_s = 0.0;
    std::vector<LogProbMatrix> posteriors;
    std::optional<FileAlignment> result;
    std::string error;
  };
  std::vector<Work> work(ids.size());

  // Stage 1: per file inputs and features.
  ParallelFor(ids.size(), cfg.workers, [&](std::size_t i) {
    Work &w = work[i];
    w.id = ids[i];
    try {
      const fs::path text_path = cfg.text_dir / (w.id + ".txt");
      if (!fs::is_regular_file(text_path))
        throw Error(ErrorCode::kIo, "missing transcript " + text_path.string());
      const std::string text = ReadFile(text_path);
      if (cfg.pseudo_lexicon) {
        const auto segments = detail::SplitWhitespace(text);
        const Lexicon pseudo = BuildPseudoLexicon({{w.id, segments}});
        w.transcript = PseudoTranscript(w.id);
        w.expansion = ExpandTranscriptWithWords(w.transcript, pseudo, VariantPolicy::First());
      } else {
        w.transcript = ParseTranscript(text, w.id);
        if (w.transcript.tokens.empty())
          throw Error(ErrorCode::kEmptyInput, "empty transcript " + text_path.string());
        w.expansion = ExpandTranscriptWithWords(w.transcript, lexicon, VariantPolicy::First());
      }
      w.labels = DisambiguateRepeats(w.expansion.labels);
      if (from_matrices) {
        for (const auto &d : cfg.prob_dirs) w.posteriors.push_back(ReadProbMatrixFile(d / (w.id + ".prob")));
        for (const auto &p : w.posteriors) {
          if (!(p.inventory == w.posteriors[0].inventory) ||
              p.num_frames() != w.posteriors[0].num_frames())
            throw Error(ErrorCode::kEnsembleMismatch,
                        "member matrices disagree in shape or classes");
        }
        w.duration_s = static_cast<double>(w.posteriors[0].num_frames()) *
                       w.posteriors[0].frame_advance_s;
      } else {
        const AudioBuffer audio = ReadWav(cfg.audio_dir / (w.id + ".wav"));
        w.duration_s = audio.duration_s();
        w.features = Mfcc(audio, mfcc);
        w.posteriors.resize(E);
      }
    } catch (const std::exception &e) {
      w.error = e.what();
    }
  });

  // Stage 2: one task per (file, member) scoring.
  if (!from_matrices) {
    ParallelFor(ids.size() * E, cfg.workers, [&](std::size_t task) {
      Work &w = work[task / E];
      if (!w.error.empty()) return;
      try {
        w.posteriors[task % E] = ScoreFrames(models[task % E], w.features);
      } catch (const std::exception &) {
        // Reported after the stage; several members may fail on one file.
        w.posteriors[task % E].values = Matrix();
      }
    });
    for (auto &w : work)
      if (w.error.empty())
        for (const auto &p : w.posteriors)
          if (p.values.empty()) {
            w.error = "scoring failed";
            break;
          }
  }

  // Stage 3: align, aggregate, render, write.
  ParallelFor(ids.size(), cfg.workers, [&](std::size_t i) {
    Work &w = work[i];
    if (!w.error.empty()) return;
    try {
      FileAlignment fa = AlignEnsemble(w.posteriors, w.labels, w.id, cfg.rank, w.duration_s,
                                       &w.transcript, &w.expansion.word_ends);
      WriteFileOutputs(cfg.out_dir, w.id, fa);
      w.result = std::move(fa);
    } catch (const std::exception &e) {
      w.error = e.what();
    }
    w.features = {};
    w.posteriors.clear();
  });

  for (const auto &w : work) {
    if (w.error.empty()) {
      summary.succeeded.push_back(w.id);
      for (const auto &warn : w.result->ensemble.warnings)
        if (warn.find("suppressed") == std::string::npos)
          summary.warnings.push_back(w.id + ": " + warn);
    } else {
      summary.failures.push_back({w.id, w.error});
    }
  }
  for (const auto &warn : summary.warnings) log << "warning: " << warn << "\n";
  log << "aligned " << summary.succeeded.size() << " of " << summary.total << " file(s)\n";
  for (const auto &f : summary.failures) log << "failed: " << f.id << ": " << f.message << "\n";
  return summary;
}

// ---------------------------------------------------------------------------
// evaluate

/// Reference and hypothesis segmentations of one recording.
struct EvalPair {
  std::string id;
  TierSegments ref;
  TierSegments hyp;
};

inline TierSegments LoadSegments(const fs::path &dir, const std::string &id,
                                 const std::string &tier) {
  const fs::path tg_path = dir / (id + ".TextGrid");
  if (fs::is_regular_file(tg_path)) {
    const TextGrid tg = ReadTextGrid(ReadFile(tg_path));
    const IntervalTier *t = tg.FindIntervalTier(tier);
    if (t == nullptr)
      throw Error(ErrorCode::kConfig,
                  tg_path.string() + ": no interval tier named '" + tier + "'");
    return SegmentsOf(*t);
  }
  const fs::path csv_path = dir / (id + ".align.csv");
  if (fs::is_regular_file(csv_path)) {
    const Alignment a = AlignmentFromCsv(ReadFile(csv_path));
    TierSegments s;
    for (const auto &l : a.labels) s.labels.emplace_back(LabelClass(l));
    s.end_times_s = a.end_times_s;
    return s;
  }
  throw Error(ErrorCode::kIo, "no TextGrid or alignment CSV for '" + id + "' in " +
                                  dir.string());
}

/// Appends `row_csv` (one line) to the table at `path`, writing the header
/// first when the file does not exist yet.
inline void AppendTableRow(const fs::path &path, std::string_view header,
                           const std::string &row_line) {
  std::string content;
  if (fs::is_regular_file(path)) {
    content = ReadFile(path);
    const auto lines = detail::SplitLines(content);
    if (lines.empty() || lines[0] != header)
      throw Error(ErrorCode::kConfig,
                  path.string() + " exists with a different header; refusing to append");
    if (!content.empty() && content.back() != '\n') content += '\n';
  } else {
    content = std::string(header) + "\n";
  }
  content += row_line;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteFileAtomic(path, content);
}

struct EvaluateResult {
  ErrorReport report;
  ErrorTableRow row;
  std::vector<FileErrors> files;
  BatchSummary summary;
};

inline EvaluateResult RunEvaluate(const JobConfig &cfg, std::ostream &log) {
  RequireDir(cfg.ref_dir, "--ref-dir");
  RequireDir(cfg.hyp_dir, "--hyp-dir");
  const EvalMethod method = ParseEvalMethod(cfg.method);
  const auto ref_ids = ListIds(cfg.ref_dir, ".TextGrid");
  if (ref_ids.empty())
    throw Error(ErrorCode::kEmptyInput, "empty reference set in " + cfg.ref_dir.string());
  auto hyp_ids = ListIds(cfg.hyp_dir, ".TextGrid");
  for (auto &id : ListIds(cfg.hyp_dir, ".align.csv")) hyp_ids.push_back(id);
  if (hyp_ids.empty())
    throw Error(ErrorCode::kEmptyInput, "empty hypothesis set in " + cfg.hyp_dir.string());

  EvaluateResult res;
  res.summary.total = ref_ids.size();
  std::vector<EvalPair> pairs;
  for (const auto &id : ref_ids) {
    EvalPair p{id, LoadSegments(cfg.ref_dir, id, cfg.tier), {}};
    try {
      p.hyp = LoadSegments(cfg.hyp_dir, id, cfg.tier);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kConfig) throw;
      res.summary.failures.push_back({id, e.what()});
      continue;
    }
    pairs.push_back(std::move(p));
  }
  pairs = ExcludeSingleSegment<EvalPair>(
      std::move(pairs), [](const EvalPair &p) { return p.hyp.labels.size(); },
      [&](const EvalPair &p) {
        log << "note: " << p.id << " has a single segment; excluded from evaluation\n";
      });

  bool any_paired = false, any_dtw = false;
  for (const auto &p : pairs) {
    try {
      auto fe = EvaluateFile({p.ref.end_times_s, p.id}, {p.hyp.end_times_s, p.id}, method);
      (fe.method == EvalMethod::kPaired ? any_paired : any_dtw) = true;
      res.files.push_back(std::move(fe));
      res.summary.succeeded.push_back(p.id);
    } catch (const Error &e) {
      res.summary.failures.push_back({p.id, e.what()});
    }
  }
  res.report = Adjusted(res.files);
  std::string method_name = cfg.method_label;
  if (method_name.empty())
    method_name = any_paired && any_dtw ? "auto" : (any_dtw ? "dtw" : "paired");
  res.row = MakeErrorTableRow(res.report, cfg.data_split, cfg.transcription, method_name);
  if (any_dtw) res.row.dtw_k = "hyp_boundaries";
  const fs::path report = !cfg.report.empty()
                              ? cfg.report
                              : (cfg.out_dir.empty() ? fs::path("evaluation.csv")
                                                     : cfg.out_dir / "evaluation.csv");
  const std::string table = ErrorTableToCsv({res.row});
  AppendTableRow(report, kErrorTableHeader, std::string(detail::SplitLines(table)[1]) + "\n");
  log << "evaluated " << res.files.size() << " file(s), " << res.report.boundary_count
      << " boundaries -> " << report.string() << "\n";
  for (const auto &id : res.report.flagged)
    log << "note: " << id << " has no boundaries left after removing the final one\n";
  for (const auto &f : res.summary.failures) log << "failed: " << f.id << ": " << f.message << "\n";
  return res;
}

// ---------------------------------------------------------------------------
// ci-table

inline WidthTableRow RunCiTable(const JobConfig &cfg, std::ostream &log) {
  const fs::path in = cfg.hyp_dir.empty() ? cfg.out_dir : cfg.hyp_dir;
  RequireDir(in, "--hyp-dir");
  const auto ids = ListIds(in, ".ci.csv");
  if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "no .ci.csv files in " + in.string());
  std::vector<double> widths;
  for (const auto &id : ids)
    for (const auto &row : ReadCiTableCsv(ReadFile(in / (id + ".ci.csv"))))
      if (auto w = row.width_s()) widths.push_back(*w);
  const WidthReport wr = CiWidthReport(widths);
  WidthTableRow row{cfg.data_split, cfg.transcription, wr.mean_ms, wr.median_ms, wr.count};
  const fs::path report = !cfg.report.empty()
                              ? cfg.report
                              : (cfg.out_dir.empty() ? fs::path("ci_widths.csv")
                                                     : cfg.out_dir / "ci_widths.csv");
  const std::string table = WidthTableToCsv({row});
  AppendTableRow(report, kWidthTableHeader, std::string(detail::SplitLines(table)[1]) + "\n");
  log << "summarized " << wr.count << " interval(s) from " << ids.size() << " file(s) -> "
      << report.string() << "\n";
  return row;
}

// ---------------------------------------------------------------------------
// train-ensemble

/// Frames of every <id>.wav in `audio_dir` labeled from the interval tier of
/// <id>.TextGrid in `ref_dir`.  The inventory is the sorted label set.
inline std::pair<LabeledFrames, ClassInventory> CorpusTrainingSet(
    const fs::path &audio_dir, const fs::path &ref_dir, const std::string &tier,
    const MfccOptions &mfcc) {
  struct Item {
    FeatureMatrix f;
    TierSegments s;
  };
  std::vector<Item> items;
  std::set<std::string> names;
  for (const auto &id : ListIds(audio_dir, ".wav")) {
    const fs::path tg_path = ref_dir / (id + ".TextGrid");
    if (!fs::is_regular_file(tg_path)) continue;
    const TextGrid tg = ReadTextGrid(ReadFile(tg_path));
    const IntervalTier *t = tg.FindIntervalTier(tier);
    if (t == nullptr)
      throw Error(ErrorCode::kConfig, tg_path.string() + ": no tier '" + tier + "'");
    Item it{Mfcc(ReadWav(audio_dir / (id + ".wav")), mfcc), SegmentsOf(*t)};
    if (it.s.labels.empty()) continue;
    for (const auto &l : it.s.labels) names.insert(l);
    items.push_back(std::move(it));
  }
  if (items.empty())
    throw Error(ErrorCode::kEmptyInput, "no (wav, TextGrid) training pairs found");
  ClassInventory inv(std::vector<std::string>(names.begin(), names.end()));
  LabeledFrames all;
  for (const auto &it : items) AppendFrames(all, LabelFrames(it.f, it.s.labels, it.s.end_times_s, inv));
  return {std::move(all), std::move(inv)};
}

/// Seed of the synthetic training corpus for a given --seed.
inline std::uint64_t TrainingDataSeed(std::uint64_t seed) { return 1'000'000 + seed * 10'000; }

inline std::vector<ManifestEntry> RunTrainEnsemble(const JobConfig &cfg, std::ostream &log) {
  if (cfg.members < 1) throw Error(ErrorCode::kConfig, "--members must be >= 1");
  if (cfg.workers < 1) throw Error(ErrorCode::kConfig, "--workers must be >= 1");
  if (cfg.out_dir.empty()) throw Error(ErrorCode::kConfig, "--out-dir is required");
  const MfccOptions mfcc = FeatureOptions(cfg);
  LabeledFrames data;
  ClassInventory inventory;
  if (!cfg.audio_dir.empty()) {
    RequireDir(cfg.audio_dir, "--audio-dir");
    RequireDir(cfg.ref_dir, "--ref-dir");
    std::tie(data, inventory) = CorpusTrainingSet(cfg.audio_dir, cfg.ref_dir, cfg.tier, mfcc);
  } else {
    const auto recipes = DefaultRecipes();
    inventory = RecipeInventory(recipes);
    data = SyntheticTrainingSet(TrainingDataSeed(cfg.seed), cfg.synthetic_files, recipes, mfcc);
  }
  TrainOptions opts;
  opts.epochs = cfg.epochs;
  opts.learning_rate = cfg.learning_rate;
  opts.bootstrap = cfg.bootstrap;
  const auto seeds = EnsembleSeeds(cfg.seed * 1000 + 1, cfg.members);
  const auto models = MakeEnsemble(data, inventory, opts, seeds, cfg.workers);
  fs::create_directories(cfg.out_dir);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < models.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "model_%02zu.clf", i);
    WriteFileAtomic(cfg.out_dir / name, WriteClassifier(models[i]));
    entries.push_back({name, seeds[i]});
  }
  WriteFileAtomic(cfg.out_dir / "ensemble.manifest", WriteManifest(entries));
  log << "trained " << models.size() << " classifier(s) on " << data.labels.size()
      << " frames, " << inventory.size() << " classes -> "
      << (cfg.out_dir / "ensemble.manifest").string() << "\n";
  return entries;
}

// ---------------------------------------------------------------------------
// synth: a small synthetic corpus for trying the tool end to end

inline void RunSynth(const JobConfig &cfg, std::size_t files, std::ostream &log) {
  if (cfg.out_dir.empty()) throw Error(ErrorCode::kConfig, "--out-dir is required");
  const auto recipes = DefaultRecipes();
  for (const char *sub : {"audio", "text", "phones", "ref"})
    fs::create_directories(cfg.out_dir / sub);
  std::string dict;
  for (const auto &r : recipes) dict += NormalizeHeadword(r.label) + "  " + r.label + "\n";
  WriteFileAtomic(cfg.out_dir / "dict.txt", dict);
  for (std::size_t i = 0; i < files; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%03zu", i);
    const auto u = GenerateUtterance(cfg.seed * 7919 + i, recipes);
    WriteFileAtomic(cfg.out_dir / "audio" / (std::string(id) + ".wav"), EncodeWav(u.audio));
    std::string words, phones;
    for (const auto &l : u.labels) {
      words += (words.empty() ? "" : " ") + NormalizeHeadword(l);
      phones += (phones.empty() ? "" : " ") + l;
    }
    WriteFileAtomic(cfg.out_dir / "text" / (std::string(id) + ".txt"), words + "\n");
    WriteFileAtomic(cfg.out_dir / "phones" / (std::string(id) + ".txt"), phones + "\n");
    TextGrid tg{0.0, u.audio.duration_s(), {}};
    tg.tiers.emplace_back(detail::TierFromEnds("phones", u.end_times_s, u.labels, 0.0,
                                               u.audio.duration_s()));
    WriteFileAtomic(cfg.out_dir / "ref" / (std::string(id) + ".TextGrid"), WriteTextGrid(tg));
  }
  log << "wrote " << files << " synthetic utterance(s) under " << cfg.out_dir.string() << "\n";
}

}  // namespace ensalign

#endif  // ENSALIGN_PIPELINE_HPP
