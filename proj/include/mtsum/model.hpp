#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mtsum/autograd.hpp"
#include "mtsum/rng.hpp"
#include "mtsum/tasks.hpp"

namespace mtsum {

struct EncoderConfig {
  int layers = 2;
  int hidden = 64;
  int heads = 4;
  int max_len = 128;
  int vocab = 0;
  int ffn_hidden = 0;  // defaults to 2*hidden
  void validate() const;
};

enum class ModelMode { Heads, Text2Text };

struct ParamGroups {
  std::vector<nn::Var> encoder;
  std::vector<nn::Var> decoder;  // abstractive decoder
  std::vector<nn::Var> heads;    // other task modules
  std::vector<nn::Var> all() const;
};

struct BatchLoss {
  nn::Var loss;        // 1x1, mean NLL over supervised positions
  int supervised = 0;  // 0 means "nothing to learn from" (e.g. no masked tokens)
};

// Shared transformer encoder + LSTM attention decoder + task heads.
// In Text2Text mode only the encoder/decoder pair exists and every task is
// trained through the sequence-to-sequence path.
class ModelBundle {
 public:
  ModelBundle(ModelMode mode, EncoderConfig cfg, std::set<TaskId> tasks, uint64_t seed);

  ModelMode mode() const { return mode_; }
  const EncoderConfig& config() const { return cfg_; }
  const std::set<TaskId>& tasks() const { return tasks_; }

  // Mean NLL over the batch's supervised positions for one task.
  BatchLoss forward(nn::Tape* tape, TaskId task, const std::vector<TaskExample>& batch);

  ParamGroups param_groups() const;
  const std::vector<std::pair<std::string, nn::Var>>& named_params() const { return params_; }
  void zero_grads();
  long param_count() const;

  // encoder output, one row per input token
  nn::Var encode(nn::Tape* tape, const std::vector<int>& input_ids);

  struct DecoderState {
    nn::Var enc;       // encoder outputs
    nn::Var enc_proj;  // enc * W_att, cached
    nn::Var h, c;
    bool initialized = false;
  };
  DecoderState decode_init(nn::Tape* tape, const std::vector<int>& input_ids);
  DecoderState decode_init_from(nn::Tape* tape, nn::Var enc);
  // Returns next-token logits (1 x vocab) and advances the state.
  nn::Var decode_step(nn::Tape* tape, DecoderState& state, int prev_token) const;
  // Normalized log-probabilities for inference.
  std::vector<double> decode_step_logprobs(DecoderState& state, int prev_token) const;

  // bit-exact parameter snapshot / restore
  std::vector<Mat> snapshot() const;
  void restore(const std::vector<Mat>& snap);

  void save_checkpoint(const std::string& path, const std::string& vocab_ref = "") const;
  static ModelBundle load_checkpoint(const std::string& path, std::string* vocab_ref = nullptr);

 private:
  ModelMode mode_;
  EncoderConfig cfg_;
  std::set<TaskId> tasks_;

  std::vector<std::pair<std::string, nn::Var>> params_;
  std::vector<std::string> encoder_names_, decoder_names_, head_names_;

  nn::Var param(const std::string& name) const;
  nn::Var add_param(const std::string& name, int rows, int cols, double init_std, Rng& rng,
                    std::vector<std::string>& group);

  void build(uint64_t seed);

  BatchLoss seq2seq_loss(nn::Tape* tape, const std::vector<TaskExample>& batch);
  BatchLoss cls_loss(nn::Tape* tape, const std::vector<TaskExample>& batch, TaskId task);
  BatchLoss concept_loss(nn::Tape* tape, const std::vector<TaskExample>& batch);
  BatchLoss mlm_loss(nn::Tape* tape, const std::vector<TaskExample>& batch);
};

}  // namespace mtsum
