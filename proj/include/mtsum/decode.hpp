#pragma once

#include <memory>
#include <vector>

#include "mtsum/model.hpp"

namespace mtsum {

struct DecodeConfig {
  int beam_width = 5;
  int max_tokens = 50;  // no length normalization
  void validate() const;
};

struct Hypothesis {
  std::vector<int> ids;  // emitted tokens, eos excluded
  double log_prob = 0.0;
  bool finished = false;
};

// Step interface shared by the real model and toy scorers in tests.
// start() yields the log-probabilities of the first token; advance() consumes
// a chosen token and yields the next distribution.
class SequenceScorer {
 public:
  struct State {
    virtual ~State() = default;
  };
  using StatePtr = std::shared_ptr<State>;

  virtual ~SequenceScorer() = default;
  virtual int vocab_size() const = 0;
  virtual int eos_id() const = 0;
  virtual StatePtr start(std::vector<double>& logprobs) const = 0;
  virtual StatePtr advance(const StatePtr& state, int token,
                           std::vector<double>& logprobs) const = 0;
};

// Highest cumulative log-probability finished hypothesis among those
// explored; the top beam_width candidates survive each step and an eos
// inside that window retires its hypothesis. Ties at expansion break toward
// the lowest token id, final ties toward the earliest finish. Deterministic.
Hypothesis beam_search(const SequenceScorer& scorer, const DecodeConfig& config);

Hypothesis greedy(const SequenceScorer& scorer, int max_tokens);

// Adapter over a frozen model snapshot.
class ModelScorer : public SequenceScorer {
 public:
  ModelScorer(ModelBundle& model, std::vector<int> source_ids, int bos_id, int eos_id);
  int vocab_size() const override;
  int eos_id() const override { return eos_; }
  StatePtr start(std::vector<double>& logprobs) const override;
  StatePtr advance(const StatePtr& state, int token,
                   std::vector<double>& logprobs) const override;

 private:
  ModelBundle& model_;
  std::vector<int> source_;
  int bos_, eos_;
};

}  // namespace mtsum
