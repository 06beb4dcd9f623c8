#include "mtsum/decode.hpp"

#include <algorithm>
#include <stdexcept>

namespace mtsum {

void DecodeConfig::validate() const {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
}

namespace {

struct Live {
  std::vector<int> ids;
  double log_prob = 0.0;
  SequenceScorer::StatePtr state;
  std::vector<double> logprobs;  // distribution over the next token
};

struct Finished {
  Hypothesis hyp;
  int step = 0;  // step at which it finished, for tie-breaking
};

void offer_finished(std::vector<Finished>& pool, Hypothesis h, int step) {
  pool.push_back({std::move(h), step});
}

Hypothesis best_of(const std::vector<Finished>& pool) {
  const Finished* best = nullptr;
  for (const auto& f : pool)
    if (!best || f.hyp.log_prob > best->hyp.log_prob ||
        (f.hyp.log_prob == best->hyp.log_prob && f.step < best->step))
      best = &f;
  return best ? best->hyp : Hypothesis{};
}

}  // namespace

Hypothesis beam_search(const SequenceScorer& scorer, const DecodeConfig& config) {
  config.validate();
  const int vocab = scorer.vocab_size();
  const int eos = scorer.eos_id();

  std::vector<Live> live(1);
  live[0].state = scorer.start(live[0].logprobs);
  std::vector<Finished> finished;

  for (int step = 1; step <= config.max_tokens && !live.empty(); ++step) {
    struct Cand {
      double log_prob;
      int token;
      int parent;
    };
    std::vector<Cand> cands;
    cands.reserve(live.size() * vocab);
    for (int p = 0; p < static_cast<int>(live.size()); ++p)
      for (int tok = 0; tok < vocab; ++tok)
        cands.push_back({live[p].log_prob + live[p].logprobs[tok], tok, p});
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (a.token != b.token) return a.token < b.token;
      return a.parent < b.parent;
    });

    // Only the top beam_width candidates survive the step; an eos inside
    // that window retires its hypothesis, everything below is dropped. This
    // keeps beam_width=1 identical to greedy decoding and the explored sets
    // nested as the beam widens.
    if (static_cast<int>(cands.size()) > config.beam_width) cands.resize(config.beam_width);
    std::vector<Live> next;
    for (const auto& c : cands) {
      if (c.token == eos) {
        Hypothesis h;
        h.ids = live[c.parent].ids;
        h.log_prob = c.log_prob;
        h.finished = true;
        offer_finished(finished, std::move(h), step);
        continue;
      }
      Live nl;
      nl.ids = live[c.parent].ids;
      nl.ids.push_back(c.token);
      nl.log_prob = c.log_prob;
      if (step < config.max_tokens)
        nl.state = scorer.advance(live[c.parent].state, c.token, nl.logprobs);
      next.push_back(std::move(nl));
    }
    live = std::move(next);
  }

  // hypotheses cut off at max_tokens count as finished without an eos
  for (auto& l : live) {
    Hypothesis h;
    h.ids = std::move(l.ids);
    h.log_prob = l.log_prob;
    h.finished = true;
    offer_finished(finished, std::move(h), config.max_tokens + 1);
  }
  return best_of(finished);
}

Hypothesis greedy(const SequenceScorer& scorer, int max_tokens) {
  DecodeConfig cfg;
  cfg.max_tokens = max_tokens;
  cfg.validate();
  Hypothesis h;
  std::vector<double> lp;
  auto state = scorer.start(lp);
  for (int step = 1; step <= max_tokens; ++step) {
    int best = 0;
    for (int tok = 1; tok < scorer.vocab_size(); ++tok)
      if (lp[tok] > lp[best]) best = tok;
    h.log_prob += lp[best];
    if (best == scorer.eos_id()) {
      h.finished = true;
      return h;
    }
    h.ids.push_back(best);
    if (step < max_tokens) state = scorer.advance(state, best, lp);
  }
  h.finished = true;
  return h;
}

namespace {

struct ModelState : SequenceScorer::State {
  ModelBundle::DecoderState dec;
};

}  // namespace

ModelScorer::ModelScorer(ModelBundle& model, std::vector<int> source_ids, int bos_id,
                         int eos_id)
    : model_(model), source_(std::move(source_ids)), bos_(bos_id), eos_(eos_id) {}

int ModelScorer::vocab_size() const { return model_.config().vocab; }

SequenceScorer::StatePtr ModelScorer::start(std::vector<double>& logprobs) const {
  auto st = std::make_shared<ModelState>();
  st->dec = model_.decode_init(nullptr, source_);
  logprobs = model_.decode_step_logprobs(st->dec, bos_);
  return st;
}

SequenceScorer::StatePtr ModelScorer::advance(const StatePtr& state, int token,
                                              std::vector<double>& logprobs) const {
  auto st = std::make_shared<ModelState>();
  st->dec = static_cast<const ModelState&>(*state).dec;
  logprobs = model_.decode_step_logprobs(st->dec, token);
  return st;
}

}  // namespace mtsum
