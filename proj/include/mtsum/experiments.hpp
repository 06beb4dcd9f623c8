#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mtsum/corpus.hpp"
#include "mtsum/rouge.hpp"
#include "mtsum/trainer.hpp"

namespace mtsum {

struct TaskCombo {
  std::set<TaskId> aux;  // subset of {E,C,P,L}; A is implicit
  std::string name;      // display label, e.g. "A C P" or "ALL"
};

// Presets: "paper-cm" (12 rows), "paper-t5" (7 rows), "all-subsets".
std::vector<TaskCombo> enumerate_combos(ModelMode mode, const std::string& preset);
TaskCombo combo_from_letters(ModelMode mode, const std::string& letters);

struct FoldScore {
  std::string group;
  RougeScore score;
};

struct ExperimentResult {
  TaskCombo combo;
  std::vector<FoldScore> per_fold;
  RougeScore mean;
  double delta_r1 = 0, delta_r2 = 0, delta_rl = 0;  // vs the single-task baseline
  bool improved_r1 = false, improved_r2 = false, improved_rl = false;
};

// One training/evaluation cell; injectable so report logic is testable
// without any training.
using CellEvaluator = std::function<RougeScore(const TaskCombo&, int fold_index)>;

std::vector<ExperimentResult> run_sweep(const FoldPlan& plan,
                                        const std::vector<TaskCombo>& combos,
                                        const CellEvaluator& evaluate);

std::string emit_report_markdown(const std::vector<ExperimentResult>& results);
std::string emit_report_csv(const std::vector<ExperimentResult>& results);
// Per-fold expansion, one row per combo x fold.
std::string emit_report_per_fold_csv(const std::vector<ExperimentResult>& results);

void save_results_json(const std::vector<ExperimentResult>& results, const std::string& path);
std::vector<ExperimentResult> load_results_json(const std::string& path);

struct ExperimentConfig {
  TrainConfig train;
  OptimizerGroupConfig opt;
  EncoderConfig encoder;  // vocab size is filled per fold
  TaskBuilderConfig builder;
  int beam_width = 1;  // test-set decoding
  std::string msrp_path;
};

// The real evaluator: builds the fold's vocabulary and task streams, trains
// a fresh model, restores the best checkpoint, and scores the test set.
CellEvaluator make_training_evaluator(const DatasetManifest& manifest, const FoldPlan& plan,
                                      const ExperimentConfig& config);

// Task streams for one set of documents (shared by the evaluator and the CLI).
TaskStreams build_task_streams(const std::vector<DocumentRecord>& docs,
                               const std::set<TaskId>& tasks, const TaskBuilder& builder,
                               ModelMode mode, uint64_t seed,
                               const std::string& msrp_path = "");

// Vocabulary over the documents' text (plus the text2text answer words).
Vocabulary build_fold_vocab(const std::vector<DocumentRecord>& docs, ModelMode mode,
                            const TaskBuilderConfig& builder_cfg);

}  // namespace mtsum
