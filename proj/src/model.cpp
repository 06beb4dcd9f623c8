#include "mtsum/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mtsum/rng.hpp"

namespace mtsum {

using nn::Tape;
using nn::Var;

void EncoderConfig::validate() const {
  if (hidden % heads != 0)
    throw std::invalid_argument("encoder hidden size must be divisible by attention heads");
  if (max_len < 1) throw std::invalid_argument("encoder max_len must be >= 1");
  if (vocab <= 0) throw std::invalid_argument("encoder vocab size must be positive");
  if (layers < 1) throw std::invalid_argument("encoder needs at least one layer");
}

std::vector<Var> ParamGroups::all() const {
  std::vector<Var> out = encoder;
  out.insert(out.end(), decoder.begin(), decoder.end());
  out.insert(out.end(), heads.begin(), heads.end());
  return out;
}

ModelBundle::ModelBundle(ModelMode mode, EncoderConfig cfg, std::set<TaskId> tasks,
                         uint64_t seed)
    : mode_(mode), cfg_(cfg), tasks_(std::move(tasks)) {
  cfg_.validate();
  if (cfg_.ffn_hidden <= 0) cfg_.ffn_hidden = 2 * cfg_.hidden;
  if (!tasks_.count(TaskId::A))
    throw std::invalid_argument("the abstractive task is always enabled");
  if (mode_ == ModelMode::Text2Text && tasks_.count(TaskId::L))
    throw std::invalid_argument("text2text mode excludes the language modeling task");
  build(seed);
}

Var ModelBundle::add_param(const std::string& name, int rows, int cols, double init_std,
                           Rng& rng, std::vector<std::string>& group) {
  Mat m(rows, cols);
  if (init_std > 0)
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, init_std);
  Var v(std::move(m));
  params_.emplace_back(name, v);
  group.push_back(name);
  return v;
}

void ModelBundle::build(uint64_t seed) {
  Rng rng(seed);
  const int h = cfg_.hidden;
  const double std = 0.08;

  auto& enc_g = encoder_names_;
  add_param("emb", cfg_.vocab, h, std, rng, enc_g);
  add_param("pos", cfg_.max_len, h, std, rng, enc_g);
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    add_param(p + "wq", h, h, std, rng, enc_g);
    add_param(p + "bq", 1, h, 0, rng, enc_g);
    add_param(p + "wk", h, h, std, rng, enc_g);
    add_param(p + "bk", 1, h, 0, rng, enc_g);
    add_param(p + "wv", h, h, std, rng, enc_g);
    add_param(p + "bv", 1, h, 0, rng, enc_g);
    add_param(p + "wo", h, h, std, rng, enc_g);
    add_param(p + "bo", 1, h, 0, rng, enc_g);
    Var g1 = add_param(p + "ln1.g", 1, h, 0, rng, enc_g);
    for (int c = 0; c < h; ++c) g1.val()(0, c) = 1.0;
    add_param(p + "ln1.b", 1, h, 0, rng, enc_g);
    add_param(p + "w1", h, cfg_.ffn_hidden, std, rng, enc_g);
    add_param(p + "b1", 1, cfg_.ffn_hidden, 0, rng, enc_g);
    add_param(p + "w2", cfg_.ffn_hidden, h, std, rng, enc_g);
    add_param(p + "b2", 1, h, 0, rng, enc_g);
    Var g2 = add_param(p + "ln2.g", 1, h, 0, rng, enc_g);
    for (int c = 0; c < h; ++c) g2.val()(0, c) = 1.0;
    add_param(p + "ln2.b", 1, h, 0, rng, enc_g);
  }

  auto& dec_g = decoder_names_;
  add_param("dec.wi", h, h, std, rng, dec_g);
  add_param("dec.bi", 1, h, 0, rng, dec_g);
  add_param("dec.att.we", h, h, std, rng, dec_g);
  add_param("dec.att.ws", h, h, std, rng, dec_g);
  add_param("dec.att.b", 1, h, 0, rng, dec_g);
  add_param("dec.att.v", h, 1, std, rng, dec_g);
  add_param("dec.wx", 2 * h, 4 * h, std, rng, dec_g);
  add_param("dec.wh", h, 4 * h, std, rng, dec_g);
  add_param("dec.b", 1, 4 * h, 0, rng, dec_g);
  add_param("dec.wout", 2 * h, cfg_.vocab, std, rng, dec_g);
  add_param("dec.bout", 1, cfg_.vocab, 0, rng, dec_g);

  if (mode_ == ModelMode::Heads) {
    auto& head_g = head_names_;
    if (tasks_.count(TaskId::E)) {
      add_param("head.e.w", h, 2, std, rng, head_g);
      add_param("head.e.b", 1, 2, 0, rng, head_g);
    }
    if (tasks_.count(TaskId::C)) {
      add_param("head.c.w", h, 2, std, rng, head_g);
      add_param("head.c.b", 1, 2, 0, rng, head_g);
    }
    if (tasks_.count(TaskId::P)) {
      add_param("head.p.w", h, 2, std, rng, head_g);
      add_param("head.p.b", 1, 2, 0, rng, head_g);
    }
    if (tasks_.count(TaskId::L)) {
      // output projection is tied to the input embedding; only a bias here
      add_param("head.l.b", 1, cfg_.vocab, 0, rng, head_g);
    }
  }
}

Var ModelBundle::param(const std::string& name) const {
  for (const auto& [n, v] : params_)
    if (n == name) return v;
  throw std::logic_error("unknown parameter: " + name);
}

ParamGroups ModelBundle::param_groups() const {
  ParamGroups g;
  if (mode_ == ModelMode::Text2Text) {
    for (const auto& [n, v] : params_) g.encoder.push_back(v);
    return g;
  }
  for (const auto& n : encoder_names_) g.encoder.push_back(param(n));
  for (const auto& n : decoder_names_) g.decoder.push_back(param(n));
  for (const auto& n : head_names_) g.heads.push_back(param(n));
  return g;
}

void ModelBundle::zero_grads() {
  for (auto& [n, v] : params_) v.zero_grad();
}

long ModelBundle::param_count() const {
  long n = 0;
  for (const auto& [name, v] : params_) n += static_cast<long>(v.val().size());
  return n;
}

Var ModelBundle::encode(Tape* tape, const std::vector<int>& input_ids) {
  if (input_ids.empty()) throw std::invalid_argument("encode: empty input");
  std::vector<int> ids = input_ids;
  if (static_cast<int>(ids.size()) > cfg_.max_len) ids.resize(cfg_.max_len);
  std::vector<int> positions(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);

  Var x = nn::add(tape, nn::gather_rows(tape, param("emb"), ids),
                  nn::gather_rows(tape, param("pos"), positions));
  const int h = cfg_.hidden;
  const int dk = h / cfg_.heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dk));

  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    Var q = nn::add_rowvec(tape, nn::matmul(tape, x, param(p + "wq")), param(p + "bq"));
    Var k = nn::add_rowvec(tape, nn::matmul(tape, x, param(p + "wk")), param(p + "bk"));
    Var v = nn::add_rowvec(tape, nn::matmul(tape, x, param(p + "wv")), param(p + "bv"));
    Var heads_cat;
    for (int hd = 0; hd < cfg_.heads; ++hd) {
      Var qi = nn::slice_cols(tape, q, hd * dk, (hd + 1) * dk);
      Var ki = nn::slice_cols(tape, k, hd * dk, (hd + 1) * dk);
      Var vi = nn::slice_cols(tape, v, hd * dk, (hd + 1) * dk);
      Var scores = nn::scale(tape, nn::matmul(tape, qi, ki, false, true), att_scale);
      Var att = nn::matmul(tape, nn::softmax_rows(tape, scores), vi);
      heads_cat = hd == 0 ? att : nn::concat_cols(tape, heads_cat, att);
    }
    Var attn_out =
        nn::add_rowvec(tape, nn::matmul(tape, heads_cat, param(p + "wo")), param(p + "bo"));
    x = nn::layer_norm_rows(tape, nn::add(tape, x, attn_out), param(p + "ln1.g"),
                            param(p + "ln1.b"));
    Var f1 = nn::gelu(
        tape, nn::add_rowvec(tape, nn::matmul(tape, x, param(p + "w1")), param(p + "b1")));
    Var f2 = nn::add_rowvec(tape, nn::matmul(tape, f1, param(p + "w2")), param(p + "b2"));
    x = nn::layer_norm_rows(tape, nn::add(tape, x, f2), param(p + "ln2.g"), param(p + "ln2.b"));
  }
  return x;
}

ModelBundle::DecoderState ModelBundle::decode_init_from(Tape* tape, Var enc) {
  DecoderState st;
  st.enc = enc;
  st.enc_proj = nn::matmul(tape, enc, param("dec.att.we"));
  st.h = nn::tanh_op(
      tape, nn::add_rowvec(tape, nn::matmul(tape, nn::mean_rows(tape, enc), param("dec.wi")),
                           param("dec.bi")));
  st.c = Var(Mat(1, cfg_.hidden));
  st.initialized = true;
  return st;
}

ModelBundle::DecoderState ModelBundle::decode_init(Tape* tape,
                                                   const std::vector<int>& input_ids) {
  return decode_init_from(tape, encode(tape, input_ids));
}

Var ModelBundle::decode_step(Tape* tape, DecoderState& st, int prev_token) const {
  if (!st.initialized) throw std::logic_error("decode_step: uninitialized state");
  const int h = cfg_.hidden;
  Var e = nn::gather_rows(tape, param("emb"), {prev_token});

  // additive attention against the cached encoder projection
  Var s_proj = nn::add_rowvec(tape, nn::matmul(tape, st.h, param("dec.att.ws")),
                              param("dec.att.b"));
  Var u = nn::tanh_op(tape, nn::add_rowvec(tape, st.enc_proj, s_proj));
  Var scores = nn::transpose(tape, nn::matmul(tape, u, param("dec.att.v")));
  Var alpha = nn::softmax_rows(tape, scores);
  Var ctx = nn::matmul(tape, alpha, st.enc);

  Var x = nn::concat_cols(tape, e, ctx);
  Var gates = nn::add_rowvec(
      tape,
      nn::add(tape, nn::matmul(tape, x, param("dec.wx")), nn::matmul(tape, st.h, param("dec.wh"))),
      param("dec.b"));
  Var gi = nn::sigmoid(tape, nn::slice_cols(tape, gates, 0, h));
  Var gf = nn::sigmoid(tape, nn::slice_cols(tape, gates, h, 2 * h));
  Var go = nn::sigmoid(tape, nn::slice_cols(tape, gates, 2 * h, 3 * h));
  Var gg = nn::tanh_op(tape, nn::slice_cols(tape, gates, 3 * h, 4 * h));
  st.c = nn::add(tape, nn::mul(tape, gf, st.c), nn::mul(tape, gi, gg));
  st.h = nn::mul(tape, go, nn::tanh_op(tape, st.c));

  Var feat = nn::concat_cols(tape, st.h, ctx);
  return nn::add_rowvec(tape, nn::matmul(tape, feat, param("dec.wout")), param("dec.bout"));
}

std::vector<double> ModelBundle::decode_step_logprobs(DecoderState& st, int prev_token) const {
  Var logits = decode_step(nullptr, st, prev_token);
  Var lp = nn::log_softmax_rows(nullptr, logits);
  std::vector<double> out(lp.cols());
  for (int c = 0; c < lp.cols(); ++c) out[c] = lp.val()(0, c);
  return out;
}

BatchLoss ModelBundle::seq2seq_loss(Tape* tape, const std::vector<TaskExample>& batch) {
  Var total;
  int count = 0;
  for (const auto& ex : batch) {
    if (ex.target_tokens.size() < 2)
      throw std::invalid_argument("seq2seq example needs bos + eos targets");
    DecoderState st = decode_init(tape, ex.input);
    for (size_t t = 0; t + 1 < ex.target_tokens.size(); ++t) {
      Var logits = decode_step(tape, st, ex.target_tokens[t]);
      Var nll = nn::nll_sum_rows(tape, logits, {ex.target_tokens[t + 1]});
      total = total.defined() ? nn::add(tape, total, nll) : nll;
      ++count;
    }
  }
  return {count > 0 ? nn::scale(tape, total, 1.0 / count) : Var(Mat(1, 1)), count};
}

BatchLoss ModelBundle::cls_loss(Tape* tape, const std::vector<TaskExample>& batch,
                                TaskId task) {
  const std::string p = task == TaskId::E ? "head.e." : "head.p.";
  Var total;
  int count = 0;
  for (const auto& ex : batch) {
    if (ex.label != 0 && ex.label != 1)
      throw std::invalid_argument("classification example needs a 0/1 label");
    Var enc = encode(tape, ex.input);
    Var cls = nn::gather_rows(tape, enc, {0});
    Var logits = nn::add_rowvec(tape, nn::matmul(tape, cls, param(p + "w")), param(p + "b"));
    Var nll = nn::nll_sum_rows(tape, logits, {ex.label});
    total = total.defined() ? nn::add(tape, total, nll) : nll;
    ++count;
  }
  return {count > 0 ? nn::scale(tape, total, 1.0 / count) : Var(Mat(1, 1)), count};
}

BatchLoss ModelBundle::concept_loss(Tape* tape, const std::vector<TaskExample>& batch) {
  Var total;
  int count = 0;
  for (const auto& ex : batch) {
    if (ex.token_labels.size() != ex.input.size())
      throw std::invalid_argument("concept example needs one label per input token");
    Var enc = encode(tape, ex.input);
    Var logits =
        nn::add_rowvec(tape, nn::matmul(tape, enc, param("head.c.w")), param("head.c.b"));
    Var nll = nn::nll_sum_rows(tape, logits, ex.token_labels);
    total = total.defined() ? nn::add(tape, total, nll) : nll;
    count += static_cast<int>(ex.token_labels.size());
  }
  return {count > 0 ? nn::scale(tape, total, 1.0 / count) : Var(Mat(1, 1)), count};
}

BatchLoss ModelBundle::mlm_loss(Tape* tape, const std::vector<TaskExample>& batch) {
  Var total;
  int count = 0;
  for (const auto& ex : batch) {
    if (ex.masked_positions.empty()) continue;
    for (int pos : ex.masked_positions)
      if (pos < 0 || pos >= static_cast<int>(ex.input.size()))
        throw std::invalid_argument("masked position out of range");
    Var enc = encode(tape, ex.input);
    Var hidden = nn::gather_rows(tape, enc, ex.masked_positions);
    // output projection tied to the input embedding
    Var logits = nn::add_rowvec(tape, nn::matmul(tape, hidden, param("emb"), false, true),
                                param("head.l.b"));
    Var nll = nn::nll_sum_rows(tape, logits, ex.masked_originals);
    total = total.defined() ? nn::add(tape, total, nll) : nll;
    count += static_cast<int>(ex.masked_positions.size());
  }
  // zero masked positions: loss defined as 0, no update
  return {count > 0 ? nn::scale(tape, total, 1.0 / count) : Var(Mat(1, 1)), count};
}

BatchLoss ModelBundle::forward(Tape* tape, TaskId task, const std::vector<TaskExample>& batch) {
  if (!tasks_.count(task))
    throw std::invalid_argument(std::string("task ") + task_letter(task) +
                                " is not enabled on this model");
  if (mode_ == ModelMode::Text2Text) {
    if (task == TaskId::L)
      throw std::invalid_argument("text2text mode has no language modeling task");
    return seq2seq_loss(tape, batch);
  }
  switch (task) {
    case TaskId::A: return seq2seq_loss(tape, batch);
    case TaskId::E:
    case TaskId::P: return cls_loss(tape, batch, task);
    case TaskId::C: return concept_loss(tape, batch);
    case TaskId::L: return mlm_loss(tape, batch);
  }
  throw std::logic_error("unreachable");
}

std::vector<Mat> ModelBundle::snapshot() const {
  std::vector<Mat> out;
  for (const auto& [n, v] : params_) out.push_back(v.val());
  return out;
}

void ModelBundle::restore(const std::vector<Mat>& snap) {
  if (snap.size() != params_.size()) throw std::invalid_argument("snapshot size mismatch");
  for (size_t i = 0; i < snap.size(); ++i) params_[i].second.val() = snap[i];
}

namespace {

void write_u32(std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); }
void write_str(std::ofstream& f, const std::string& s) {
  write_u32(f, static_cast<uint32_t>(s.size()));
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}
uint32_t read_u32(std::ifstream& f) {
  uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
std::string read_str(std::ifstream& f) {
  std::string s(read_u32(f), '\0');
  f.read(s.data(), static_cast<std::streamsize>(s.size()));
  return s;
}

constexpr uint32_t kMagic = 0x4d545343;  // "MTSC"

}  // namespace

void ModelBundle::save_checkpoint(const std::string& path, const std::string& vocab_ref) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  write_u32(f, kMagic);
  write_u32(f, 1);  // version
  write_u32(f, mode_ == ModelMode::Heads ? 0 : 1);
  std::string task_str;
  for (TaskId t : tasks_) task_str.push_back(task_letter(t));
  write_str(f, task_str);
  write_str(f, vocab_ref);
  write_u32(f, static_cast<uint32_t>(cfg_.layers));
  write_u32(f, static_cast<uint32_t>(cfg_.hidden));
  write_u32(f, static_cast<uint32_t>(cfg_.heads));
  write_u32(f, static_cast<uint32_t>(cfg_.max_len));
  write_u32(f, static_cast<uint32_t>(cfg_.vocab));
  write_u32(f, static_cast<uint32_t>(cfg_.ffn_hidden));
  write_u32(f, static_cast<uint32_t>(params_.size()));
  for (const auto& [name, v] : params_) {
    write_str(f, name);
    write_u32(f, static_cast<uint32_t>(v.val().rows()));
    write_u32(f, static_cast<uint32_t>(v.val().cols()));
    f.write(reinterpret_cast<const char*>(v.val().data()),
            static_cast<std::streamsize>(v.val().size() * sizeof(double)));
  }
}

ModelBundle ModelBundle::load_checkpoint(const std::string& path, std::string* vocab_ref) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  if (read_u32(f) != kMagic) throw std::runtime_error("not a checkpoint file: " + path);
  if (read_u32(f) != 1) throw std::runtime_error("unsupported checkpoint version");
  const ModelMode mode = read_u32(f) == 0 ? ModelMode::Heads : ModelMode::Text2Text;
  std::set<TaskId> tasks;
  for (char c : read_str(f)) tasks.insert(task_from_letter(c));
  const std::string vref = read_str(f);
  if (vocab_ref) *vocab_ref = vref;
  EncoderConfig cfg;
  cfg.layers = static_cast<int>(read_u32(f));
  cfg.hidden = static_cast<int>(read_u32(f));
  cfg.heads = static_cast<int>(read_u32(f));
  cfg.max_len = static_cast<int>(read_u32(f));
  cfg.vocab = static_cast<int>(read_u32(f));
  cfg.ffn_hidden = static_cast<int>(read_u32(f));
  ModelBundle model(mode, cfg, tasks, /*seed=*/0);
  const uint32_t n = read_u32(f);
  if (n != model.params_.size()) throw std::runtime_error("checkpoint parameter count mismatch");
  for (uint32_t i = 0; i < n; ++i) {
    const std::string name = read_str(f);
    if (name != model.params_[i].first)
      throw std::runtime_error("checkpoint parameter order mismatch at " + name);
    const int rows = static_cast<int>(read_u32(f));
    const int cols = static_cast<int>(read_u32(f));
    Mat m(rows, cols);
    f.read(reinterpret_cast<char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
    model.params_[i].second.val() = std::move(m);
  }
  if (!f) throw std::runtime_error("truncated checkpoint: " + path);
  return model;
}

}  // namespace mtsum
