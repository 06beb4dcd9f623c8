#include "mtsum/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mtsum/rng.hpp"
#include "mtsum/rouge.hpp"

namespace mtsum {

char task_letter(TaskId t) { return static_cast<char>(t); }

TaskId task_from_letter(char c) {
  switch (c) {
    case 'A': return TaskId::A;
    case 'E': return TaskId::E;
    case 'C': return TaskId::C;
    case 'P': return TaskId::P;
    case 'L': return TaskId::L;
    default: throw std::invalid_argument(std::string("unknown task letter: ") + c);
  }
}

void MaskingPolicy::validate() const {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(mask_prob) || !in01(replace_mask) || !in01(replace_random) || !in01(keep))
    throw std::invalid_argument("masking policy values must lie in [0,1]");
  if (std::abs(replace_mask + replace_random + keep - 1.0) > 1e-9)
    throw std::invalid_argument("masking replacement shares must sum to 1");
}

namespace {

std::vector<std::string> doc_tokens(const DocumentRecord& doc) {
  std::vector<std::string> toks;
  for (const auto& s : doc.sentences) {
    auto st = basic_tokens(s);
    toks.insert(toks.end(), st.begin(), st.end());
  }
  return toks;
}

std::string join_sentences(const std::vector<std::string>& sentences,
                           const std::set<int>& which) {
  std::string out;
  for (int i : which) {
    if (!out.empty()) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

}  // namespace

TaskExample TaskBuilder::build_abstractive(const DocumentRecord& doc) const {
  TaskExample ex;
  ex.task = TaskId::A;
  ex.doc_id = doc.doc_id;
  const auto& sp = vocab_.specials();
  ex.input.push_back(sp.cls);
  for (size_t i = 0; i < doc.sentences.size() && ex.input.size() < cfg_.max_input_len; ++i) {
    if (i > 0) ex.input.push_back(sp.sep);
    for (const auto& tok : basic_tokens(doc.sentences[i])) {
      if (ex.input.size() >= cfg_.max_input_len) break;
      ex.input.push_back(vocab_.token_to_id(tok));
    }
  }
  if (ex.input.size() > cfg_.max_input_len) ex.input.resize(cfg_.max_input_len);

  ex.target_tokens.push_back(sp.bos);
  auto ref = basic_tokens(doc.abstractive_ref);
  if (ref.size() > cfg_.max_summary_len) ref.resize(cfg_.max_summary_len);
  for (const auto& tok : ref) ex.target_tokens.push_back(vocab_.token_to_id(tok));
  ex.target_tokens.push_back(sp.eos);
  return ex;
}

std::vector<int> TaskBuilder::doc_ids_truncated(const DocumentRecord& doc,
                                                size_t budget) const {
  std::vector<int> ids;
  for (const auto& tok : doc_tokens(doc)) {
    if (ids.size() >= budget) break;
    ids.push_back(vocab_.token_to_id(tok));
  }
  return ids;
}

std::vector<int> TaskBuilder::pair_input(const std::vector<std::string>& left_tokens,
                                         const std::vector<std::string>& right_tokens) const {
  const auto& sp = vocab_.specials();
  std::vector<int> ids;
  ids.push_back(sp.cls);
  // keep at least half the budget for the right side
  const size_t right_budget = std::min(right_tokens.size(), cfg_.max_input_len / 2);
  const size_t left_budget = cfg_.max_input_len >= right_budget + 2
                                 ? cfg_.max_input_len - right_budget - 2
                                 : 0;
  for (size_t i = 0; i < left_tokens.size() && i < left_budget; ++i)
    ids.push_back(vocab_.token_to_id(left_tokens[i]));
  ids.push_back(sp.sep);
  for (size_t i = 0; i < right_budget; ++i) ids.push_back(vocab_.token_to_id(right_tokens[i]));
  return ids;
}

std::set<int> TaskBuilder::oracle_extractive_labels(const DocumentRecord& doc,
                                                    int max_selected) const {
  std::set<int> selected;
  const int n = static_cast<int>(doc.sentences.size());
  double best_score = 0.0;
  while (static_cast<int>(selected.size()) < max_selected) {
    std::vector<double> scores(n, -1.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < n; ++i) {
      if (selected.count(i)) continue;
      auto trial = selected;
      trial.insert(i);
      scores[i] = rouge_all(join_sentences(doc.sentences, trial), doc.abstractive_ref).mean_f1();
    }
    int best_i = -1;
    for (int i = 0; i < n; ++i)
      if (scores[i] > best_score && (best_i < 0 || scores[i] > scores[best_i])) best_i = i;
    if (best_i < 0) break;
    best_score = scores[best_i];
    selected.insert(best_i);
  }
  return selected;
}

std::vector<TaskExample> TaskBuilder::build_extractive(const DocumentRecord& doc,
                                                       bool allow_oracle) const {
  std::set<int> positive;
  if (doc.extractive_ref) {
    std::set<std::string> refs;
    for (const auto& s : *doc.extractive_ref) refs.insert(normalize_text(s));
    for (size_t i = 0; i < doc.sentences.size(); ++i)
      if (refs.count(normalize_text(doc.sentences[i]))) positive.insert(static_cast<int>(i));
  } else if (allow_oracle) {
    positive = oracle_extractive_labels(doc, cfg_.oracle_max_selected);
  } else {
    throw DataError("document " + doc.doc_id +
                    " has no extractive_ref and the oracle is disabled");
  }

  const auto dtoks = doc_tokens(doc);
  std::vector<TaskExample> out;
  for (size_t i = 0; i < doc.sentences.size(); ++i) {
    TaskExample ex;
    ex.task = TaskId::E;
    ex.doc_id = doc.doc_id;
    ex.input = pair_input(dtoks, basic_tokens(doc.sentences[i]));
    ex.label = positive.count(static_cast<int>(i)) ? 1 : 0;
    out.push_back(std::move(ex));
  }
  return out;
}

std::map<std::string, ConceptLabeling> tfidf_rank(const std::vector<DocumentRecord>& corpus,
                                                  int ngram_max, int top_k) {
  if (corpus.empty()) throw std::invalid_argument("tfidf_rank: empty corpus");
  // term -> document frequency; n-grams never cross sentence boundaries
  auto terms_of = [&](const DocumentRecord& doc) {
    std::map<std::string, int> tf;
    for (const auto& sent : doc.sentences) {
      const auto toks = basic_tokens(sent);
      for (int n = 1; n <= ngram_max; ++n)
        for (size_t i = 0; i + n <= toks.size(); ++i) {
          std::string term = toks[i];
          for (int k = 1; k < n; ++k) term += " " + toks[i + k];
          ++tf[term];
        }
    }
    return tf;
  };

  std::vector<std::map<std::string, int>> tfs;
  std::map<std::string, int> df;
  for (const auto& doc : corpus) {
    tfs.push_back(terms_of(doc));
    for (const auto& [term, n] : tfs.back()) ++df[term];
  }
  const double n_docs = static_cast<double>(corpus.size());

  std::map<std::string, ConceptLabeling> out;
  for (size_t d = 0; d < corpus.size(); ++d) {
    struct Row {
      std::string term;
      double score;
      int tf;
    };
    std::vector<Row> rows;
    for (const auto& [term, tf] : tfs[d])
      rows.push_back({term, tf * std::log(n_docs / df.at(term)), tf});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.tf != b.tf) return a.tf > b.tf;  // degenerate idf=0 case keeps tf order
      return a.term < b.term;
    });
    ConceptLabeling lab;
    lab.doc_id = corpus[d].doc_id;
    for (const auto& row : rows) {
      if (static_cast<int>(lab.concepts.size()) >= top_k) break;
      lab.concepts.emplace_back(row.term, row.score);
    }
    out[lab.doc_id] = std::move(lab);
  }
  return out;
}

TaskExample TaskBuilder::build_concept(const DocumentRecord& doc,
                                       const ConceptLabeling& labeling) const {
  if (labeling.doc_id != doc.doc_id)
    throw std::invalid_argument("concept labeling belongs to document " + labeling.doc_id +
                                ", not " + doc.doc_id);
  const auto dtoks = doc_tokens(doc);
  TaskExample ex;
  ex.task = TaskId::C;
  ex.doc_id = doc.doc_id;
  const auto& sp = vocab_.specials();
  ex.input.push_back(sp.cls);
  const size_t budget = cfg_.max_input_len - 1;
  const size_t n = std::min(dtoks.size(), budget);
  for (size_t i = 0; i < n; ++i) ex.input.push_back(vocab_.token_to_id(dtoks[i]));
  ex.token_labels.assign(ex.input.size(), 0);

  for (const auto& [term, weight] : labeling.concepts) {
    const auto ttoks = basic_tokens(term);
    if (ttoks.empty()) continue;
    for (size_t i = 0; i + ttoks.size() <= n; ++i) {
      bool match = true;
      for (size_t k = 0; k < ttoks.size(); ++k)
        if (dtoks[i + k] != ttoks[k]) {
          match = false;
          break;
        }
      if (match)
        for (size_t k = 0; k < ttoks.size(); ++k) ex.token_labels[1 + i + k] = 1;
    }
  }
  return ex;
}

std::vector<TaskExample> TaskBuilder::build_paraphrase(
    const std::vector<DocumentRecord>& summ_corpus,
    const std::vector<std::tuple<std::string, std::string, int>>& msrp, double negative_ratio,
    uint64_t seed) const {
  std::vector<TaskExample> out;
  for (const auto& [s1, s2, label] : msrp) {
    TaskExample ex;
    ex.task = TaskId::P;
    ex.input = pair_input(basic_tokens(s1), basic_tokens(s2));
    ex.label = label;
    out.push_back(std::move(ex));
  }
  const int negatives = static_cast<int>(std::lround(negative_ratio));
  if (negatives > 0 && summ_corpus.size() < 2)
    throw DataError("paraphrase negative sampling needs at least 2 records");
  Rng rng(seed);
  for (size_t i = 0; i < summ_corpus.size(); ++i) {
    const auto& doc = summ_corpus[i];
    const auto dtoks = doc_tokens(doc);
    TaskExample pos;
    pos.task = TaskId::P;
    pos.doc_id = doc.doc_id;
    pos.input = pair_input(dtoks, basic_tokens(doc.abstractive_ref));
    pos.label = 1;
    out.push_back(std::move(pos));
    for (int k = 0; k < negatives; ++k) {
      size_t j = rng.next_below(summ_corpus.size() - 1);
      if (j >= i) ++j;  // never this record's own summary
      TaskExample neg;
      neg.task = TaskId::P;
      neg.doc_id = doc.doc_id;
      neg.input = pair_input(dtoks, basic_tokens(summ_corpus[j].abstractive_ref));
      neg.label = 0;
      out.push_back(std::move(neg));
    }
  }
  return out;
}

TaskExample TaskBuilder::build_mlm(const std::string& text, const MaskingPolicy& policy,
                                   uint64_t seed) const {
  policy.validate();
  TaskExample ex;
  ex.task = TaskId::L;
  ex.input = vocab_.encode(text, cfg_.max_input_len).ids;
  Rng rng(seed);
  const int n_regular = vocab_.size() - SpecialTokens::count;
  for (size_t i = 0; i < ex.input.size(); ++i) {
    if (!rng.bernoulli(policy.mask_prob)) continue;
    ex.masked_positions.push_back(static_cast<int>(i));
    ex.masked_originals.push_back(ex.input[i]);
    const double r = rng.next_double();
    if (r < policy.replace_mask) {
      ex.input[i] = vocab_.specials().mask;
    } else if (r < policy.replace_mask + policy.replace_random && n_regular > 0) {
      ex.input[i] = SpecialTokens::count + static_cast<int>(rng.next_below(n_regular));
    }  // else keep unchanged
  }
  return ex;
}

namespace {

std::vector<int> encode_target(const Vocabulary& vocab, const std::string& text,
                               size_t max_len) {
  std::vector<int> ids;
  ids.push_back(vocab.specials().bos);
  auto toks = basic_tokens(text);
  if (toks.size() > max_len) toks.resize(max_len);
  for (const auto& tok : toks) ids.push_back(vocab.token_to_id(tok));
  ids.push_back(vocab.specials().eos);
  return ids;
}

}  // namespace

TaskExample TaskBuilder::t2t_abstractive(const DocumentRecord& doc) const {
  TaskExample ex;
  ex.task = TaskId::A;
  ex.doc_id = doc.doc_id;
  for (const auto& tok : basic_tokens(cfg_.prefixes.abstractive))
    ex.input.push_back(vocab_.token_to_id(tok));
  for (int id : doc_ids_truncated(doc, cfg_.max_input_len - ex.input.size()))
    ex.input.push_back(id);
  ex.target_tokens = encode_target(vocab_, doc.abstractive_ref, cfg_.max_summary_len);
  return ex;
}

std::vector<TaskExample> TaskBuilder::t2t_extractive(const DocumentRecord& doc,
                                                     bool allow_oracle) const {
  auto heads = build_extractive(doc, allow_oracle);
  const auto dtoks = doc_tokens(doc);
  std::vector<TaskExample> out;
  const auto prefix = basic_tokens(cfg_.prefixes.extractive);
  for (size_t i = 0; i < doc.sentences.size(); ++i) {
    TaskExample ex;
    ex.task = TaskId::E;
    ex.doc_id = doc.doc_id;
    for (const auto& tok : prefix) ex.input.push_back(vocab_.token_to_id(tok));
    auto body = pair_input(dtoks, basic_tokens(doc.sentences[i]));
    ex.input.insert(ex.input.end(), body.begin() + 1, body.end());  // drop the CLS
    if (ex.input.size() > cfg_.max_input_len) ex.input.resize(cfg_.max_input_len);
    ex.target_tokens = encode_target(vocab_, heads[i].label ? "yes" : "no", 4);
    out.push_back(std::move(ex));
  }
  return out;
}

TaskExample TaskBuilder::t2t_concept(const DocumentRecord& doc,
                                     const ConceptLabeling& labeling) const {
  if (labeling.doc_id != doc.doc_id)
    throw std::invalid_argument("concept labeling belongs to a different document");
  TaskExample ex;
  ex.task = TaskId::C;
  ex.doc_id = doc.doc_id;
  for (const auto& tok : basic_tokens(cfg_.prefixes.concepts))
    ex.input.push_back(vocab_.token_to_id(tok));
  for (int id : doc_ids_truncated(doc, cfg_.max_input_len - ex.input.size()))
    ex.input.push_back(id);
  std::string target;
  for (const auto& [term, weight] : labeling.concepts) {
    if (!target.empty()) target += ", ";
    target += term;
  }
  ex.target_tokens = encode_target(vocab_, target, cfg_.max_summary_len);
  return ex;
}

TaskExample TaskBuilder::t2t_paraphrase(const std::string& sent1, const std::string& sent2,
                                        int label) const {
  TaskExample ex;
  ex.task = TaskId::P;
  for (const auto& tok : basic_tokens(cfg_.prefixes.paraphrase))
    ex.input.push_back(vocab_.token_to_id(tok));
  auto body = pair_input(basic_tokens(sent1), basic_tokens(sent2));
  ex.input.insert(ex.input.end(), body.begin() + 1, body.end());
  if (ex.input.size() > cfg_.max_input_len) ex.input.resize(cfg_.max_input_len);
  ex.label = label;
  ex.target_tokens = encode_target(vocab_, label ? "yes" : "no", 4);
  return ex;
}

std::vector<std::tuple<std::string, std::string, int>> load_paraphrase_tsv(
    const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open paraphrase TSV: " + path);
  std::vector<std::tuple<std::string, std::string, int>> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string label, s1, s2;
    if (!std::getline(ss, label, '\t') || !std::getline(ss, s1, '\t') ||
        !std::getline(ss, s2))
      throw DataError("paraphrase TSV line " + std::to_string(line_no) +
                      ": expected label<TAB>sent1<TAB>sent2");
    out.emplace_back(s1, s2, std::stoi(label));
  }
  return out;
}

void save_concept_labelings(const std::map<std::string, ConceptLabeling>& labelings,
                            const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open concept output: " + path);
  for (const auto& [doc_id, lab] : labelings) {
    nlohmann::json j;
    j["doc_id"] = doc_id;
    auto arr = nlohmann::json::array();
    for (const auto& [term, weight] : lab.concepts)
      arr.push_back({{"term", term}, {"weight", weight}});
    j["concepts"] = arr;
    f << j.dump() << '\n';
  }
}

}  // namespace mtsum
