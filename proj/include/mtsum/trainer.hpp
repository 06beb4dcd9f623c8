#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mtsum/model.hpp"
#include "mtsum/rouge.hpp"

namespace mtsum {

struct OptimizerGroupConfig {
  double encoder_lr = 5e-4;
  double decoder_lr = 5e-3;
  double heads_lr = 5e-5;
  double single_lr = 5e-4;  // used when single_optimizer is on
  void validate() const;
};

struct TrainConfig {
  int epochs = 85;
  int batch_size = 8;
  std::set<TaskId> tasks = {TaskId::A};
  ModelMode mode = ModelMode::Heads;
  uint64_t seed = 0;
  int max_input_len = 128;
  int decode_max_tokens = 50;
  double clip_norm = 1.0;
  bool single_optimizer = false;
  // fixed order, overridable
  std::vector<TaskId> task_order = {TaskId::A, TaskId::E, TaskId::C, TaskId::P, TaskId::L};
  void validate() const;
};

// Adam with per-parameter step counts; step_subset() leaves every other
// parameter untouched, bitwise.
class Adam {
 public:
  Adam(std::vector<nn::Var> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step_all();
  void step_subset(const std::vector<nn::Var>& subset);

 private:
  void step_one(size_t i);
  std::vector<nn::Var> params_;
  std::vector<Mat> m_, v_;
  std::vector<long> t_;
  std::map<const void*, size_t> index_;
  double lr_, beta1_, beta2_, eps_;
};

struct TaskEpochLog {
  int epoch = 0;
  TaskId task = TaskId::A;
  double mean_loss = 0.0;
  int batches = 0;
};

struct TrainLog {
  std::vector<TaskEpochLog> task_logs;
  std::vector<RougeScore> val_scores;  // one per epoch
  int selected_epoch = 0;              // 1-based; argmax mean F1, first occurrence
};

void save_train_log_csv(const TrainLog& log, const std::string& path);
void save_train_log_json(const TrainLog& log, const std::string& path);

struct ValExample {
  std::vector<int> input;
  std::string reference;
  std::string group;
  std::string doc_id;
};

struct TrainResult {
  std::vector<Mat> best_params;
  TrainLog log;
};

using TaskStreams = std::map<TaskId, std::vector<TaskExample>>;

class Trainer {
 public:
  Trainer(ModelBundle& model, const Vocabulary& vocab, TrainConfig config,
          OptimizerGroupConfig opt_config = {});

  // Tasks one after another in the configured order; one optimizer step of
  // (encoder group + the task's group) per batch.
  std::vector<TaskEpochLog> train_epoch_sequential(const TaskStreams& streams, int epoch);

  // Full loop with per-epoch greedy validation decoding and best-epoch
  // checkpoint selection.
  TrainResult train(const TaskStreams& streams, const std::vector<ValExample>& val);

  // text2text: one optimizer, batches drawn from the shuffled task mixture.
  TrainResult train_mixture(const std::vector<TaskExample>& pool,
                            const std::vector<ValExample>& val);

  RougeScore evaluate(const std::vector<ValExample>& examples);

  // test hooks, called around every optimizer step
  std::function<void(TaskId)> on_before_step;
  std::function<void(TaskId)> on_after_step;

 private:
  ModelBundle& model_;
  const Vocabulary& vocab_;
  TrainConfig cfg_;
  OptimizerGroupConfig opt_cfg_;
  ParamGroups groups_;
  std::unique_ptr<Adam> opt_encoder_, opt_decoder_, opt_heads_, opt_single_;

  double run_batch(TaskId task, const std::vector<TaskExample>& batch);
  void clip_and_step(TaskId task);
  TrainResult train_loop(const TaskStreams& streams, const std::vector<ValExample>& val,
                         bool mixture);
};

}  // namespace mtsum
