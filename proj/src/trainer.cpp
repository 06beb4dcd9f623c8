#include "mtsum/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"
#include "mtsum/decode.hpp"
#include "mtsum/rng.hpp"

namespace mtsum {

void OptimizerGroupConfig::validate() const {
  if (encoder_lr <= 0 || decoder_lr <= 0 || heads_lr <= 0 || single_lr <= 0)
    throw std::invalid_argument("learning rates must be positive");
}

void TrainConfig::validate() const {
  if (!tasks.count(TaskId::A))
    throw std::invalid_argument("the abstractive task A is mandatory");
  if (mode == ModelMode::Text2Text && tasks.count(TaskId::L))
    throw std::invalid_argument("text2text mode excludes the language modeling task");
  if (epochs < 1 || batch_size < 1) throw std::invalid_argument("epochs and batch_size >= 1");
}

Adam::Adam(std::vector<nn::Var> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (size_t i = 0; i < params_.size(); ++i) {
    m_.emplace_back(params_[i].rows(), params_[i].cols());
    v_.emplace_back(params_[i].rows(), params_[i].cols());
    t_.push_back(0);
    index_[params_[i].val().data()] = i;
  }
}

void Adam::step_one(size_t i) {
  ++t_[i];
  Mat& p = params_[i].val();
  const Mat& g = params_[i].grad();
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_[i]));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_[i]));
  for (size_t k = 0; k < p.size(); ++k) {
    m_[i].data()[k] = beta1_ * m_[i].data()[k] + (1.0 - beta1_) * g.data()[k];
    v_[i].data()[k] = beta2_ * v_[i].data()[k] + (1.0 - beta2_) * g.data()[k] * g.data()[k];
    const double mhat = m_[i].data()[k] / bc1;
    const double vhat = v_[i].data()[k] / bc2;
    p.data()[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

void Adam::step_all() {
  for (size_t i = 0; i < params_.size(); ++i) step_one(i);
}

void Adam::step_subset(const std::vector<nn::Var>& subset) {
  for (const auto& v : subset) {
    auto it = index_.find(v.val().data());
    if (it == index_.end()) throw std::invalid_argument("parameter not managed by this Adam");
    step_one(it->second);
  }
}

Trainer::Trainer(ModelBundle& model, const Vocabulary& vocab, TrainConfig config,
                 OptimizerGroupConfig opt_config)
    : model_(model), vocab_(vocab), cfg_(std::move(config)), opt_cfg_(opt_config) {
  cfg_.validate();
  opt_cfg_.validate();
  groups_ = model_.param_groups();
  if (cfg_.mode == ModelMode::Text2Text || cfg_.single_optimizer) {
    opt_single_ = std::make_unique<Adam>(groups_.all(), opt_cfg_.single_lr);
  } else {
    opt_encoder_ = std::make_unique<Adam>(groups_.encoder, opt_cfg_.encoder_lr);
    opt_decoder_ = std::make_unique<Adam>(groups_.decoder, opt_cfg_.decoder_lr);
    opt_heads_ = std::make_unique<Adam>(groups_.heads, opt_cfg_.heads_lr);
  }
}

void Trainer::clip_and_step(TaskId task) {
  std::vector<nn::Var> active = groups_.encoder;
  if (cfg_.mode == ModelMode::Heads) {
    const auto& extra = task == TaskId::A ? groups_.decoder : groups_.heads;
    active.insert(active.end(), extra.begin(), extra.end());
  }
  if (cfg_.clip_norm > 0) {
    double sq = 0.0;
    for (const auto& v : active)
      for (size_t k = 0; k < v.grad().size(); ++k) sq += v.grad().data()[k] * v.grad().data()[k];
    const double norm = std::sqrt(sq);
    if (norm > cfg_.clip_norm) {
      const double s = cfg_.clip_norm / norm;
      for (auto& v : active)
        for (size_t k = 0; k < v.grad().size(); ++k) v.grad().data()[k] *= s;
    }
  }
  if (on_before_step) on_before_step(task);
  if (opt_single_) {
    opt_single_->step_subset(active);
  } else {
    opt_encoder_->step_all();
    if (task == TaskId::A)
      opt_decoder_->step_all();
    else
      opt_heads_->step_all();
  }
  if (on_after_step) on_after_step(task);
}

double Trainer::run_batch(TaskId task, const std::vector<TaskExample>& batch) {
  model_.zero_grads();
  nn::Tape tape;
  BatchLoss bl = model_.forward(&tape, task, batch);
  const double loss = bl.loss.scalar();
  if (!std::isfinite(loss)) throw std::runtime_error("non-finite training loss");
  if (bl.supervised == 0) return loss;  // nothing to update (e.g. no masked tokens)
  tape.backward(bl.loss);
  clip_and_step(task);
  return loss;
}

std::vector<TaskEpochLog> Trainer::train_epoch_sequential(const TaskStreams& streams,
                                                          int epoch) {
  std::vector<TaskEpochLog> logs;
  for (TaskId task : cfg_.task_order) {
    if (!cfg_.tasks.count(task)) continue;
    auto it = streams.find(task);
    if (it == streams.end() || it->second.empty()) {
      std::cerr << "warning: no examples for task " << task_letter(task) << ", skipping\n";
      continue;
    }
    std::vector<TaskExample> stream = it->second;
    Rng rng(cfg_.seed ^ (static_cast<uint64_t>(epoch) * 0x9e3779b9ULL) ^
            static_cast<uint64_t>(task_letter(task)));
    rng.shuffle(stream);

    TaskEpochLog log;
    log.epoch = epoch;
    log.task = task;
    double loss_sum = 0.0;
    for (size_t b = 0; b < stream.size(); b += cfg_.batch_size) {
      const size_t end = std::min(stream.size(), b + cfg_.batch_size);
      loss_sum += run_batch(task, {stream.begin() + b, stream.begin() + end});
      ++log.batches;
    }
    log.mean_loss = log.batches ? loss_sum / log.batches : 0.0;
    logs.push_back(log);
  }
  return logs;
}

RougeScore Trainer::evaluate(const std::vector<ValExample>& examples) {
  const auto& sp = vocab_.specials();
  std::vector<ScoredPair> pairs(examples.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    ModelScorer scorer(model_, examples[i].input, sp.bos, sp.eos);
    Hypothesis hyp = greedy(scorer, cfg_.decode_max_tokens);
    pairs[i] = {vocab_.decode(hyp.ids), examples[i].reference, examples[i].group};
  }
  return aggregate(pairs).mean;
}

TrainResult Trainer::train_loop(const TaskStreams& streams, const std::vector<ValExample>& val,
                                bool mixture) {
  if (val.empty()) throw std::invalid_argument("validation set is empty");
  TrainResult result;
  double best_metric = -1.0;
  for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    if (mixture) {
      std::vector<TaskExample> pool = streams.at(TaskId::A);
      Rng rng(cfg_.seed ^ (static_cast<uint64_t>(epoch) * 0x9e3779b9ULL));
      rng.shuffle(pool);
      TaskEpochLog log;
      log.epoch = epoch;
      log.task = TaskId::A;
      double loss_sum = 0.0;
      for (size_t b = 0; b < pool.size(); b += cfg_.batch_size) {
        const size_t end = std::min(pool.size(), b + cfg_.batch_size);
        loss_sum += run_batch(TaskId::A, {pool.begin() + b, pool.begin() + end});
        ++log.batches;
      }
      log.mean_loss = log.batches ? loss_sum / log.batches : 0.0;
      result.log.task_logs.push_back(log);
    } else {
      auto logs = train_epoch_sequential(streams, epoch);
      result.log.task_logs.insert(result.log.task_logs.end(), logs.begin(), logs.end());
    }
    const RougeScore score = evaluate(val);
    result.log.val_scores.push_back(score);
    if (score.mean_f1() > best_metric) {  // first occurrence wins ties
      best_metric = score.mean_f1();
      result.log.selected_epoch = epoch;
      result.best_params = model_.snapshot();
    }
  }
  return result;
}

TrainResult Trainer::train(const TaskStreams& streams, const std::vector<ValExample>& val) {
  if (cfg_.mode != ModelMode::Heads)
    throw std::invalid_argument("train() is the heads-mode loop; use train_mixture");
  return train_loop(streams, val, /*mixture=*/false);
}

TrainResult Trainer::train_mixture(const std::vector<TaskExample>& pool,
                                   const std::vector<ValExample>& val) {
  if (cfg_.mode != ModelMode::Text2Text)
    throw std::invalid_argument("train_mixture requires text2text mode");
  for (const auto& ex : pool)
    if (ex.task == TaskId::L)
      throw std::invalid_argument("language modeling example in a text2text mixture");
  TaskStreams streams;
  streams[TaskId::A] = pool;
  return train_loop(streams, val, /*mixture=*/true);
}

void save_train_log_csv(const TrainLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open train log: " + path);
  f << "epoch,task,mean_loss,batches\n";
  for (const auto& e : log.task_logs)
    f << e.epoch << ',' << task_letter(e.task) << ',' << e.mean_loss << ',' << e.batches
      << '\n';
}

void save_train_log_json(const TrainLog& log, const std::string& path) {
  nlohmann::json j;
  j["best_epoch"] = log.selected_epoch;
  auto arr = nlohmann::json::array();
  for (const auto& s : log.val_scores)
    arr.push_back({{"r1_f1", s.r1.f1}, {"r2_f1", s.r2.f1}, {"rl_f1", s.rl.f1}});
  j["val_scores"] = arr;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open train summary: " + path);
  f << j.dump(2) << '\n';
}

}  // namespace mtsum
