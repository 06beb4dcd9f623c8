#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mtsum/corpus.hpp"
#include "mtsum/tokenizer.hpp"

namespace mtsum {

enum class TaskId : char { A = 'A', E = 'E', C = 'C', P = 'P', L = 'L' };

char task_letter(TaskId t);
TaskId task_from_letter(char c);

struct TaskExample {
  TaskId task = TaskId::A;
  std::string doc_id;
  std::vector<int> input;           // token ids, already serialized for the task
  std::vector<int> target_tokens;   // A and text2text targets
  int label = -1;                   // E, P
  std::vector<int> token_labels;    // C: one 0/1 label per input token
  std::vector<int> masked_positions;  // L
  std::vector<int> masked_originals;  // L, aligned with masked_positions
};

struct MaskingPolicy {
  double mask_prob = 0.15;
  double replace_mask = 0.80;
  double replace_random = 0.10;
  double keep = 0.10;
  void validate() const;
};

struct ConceptLabeling {
  std::string doc_id;
  std::vector<std::pair<std::string, double>> concepts;  // (term, tf-idf), non-increasing
};

struct Text2TextPrefixes {
  std::string abstractive = "summarize:";
  std::string extractive = "extract:";
  std::string concepts = "concepts:";
  std::string paraphrase = "paraphrase:";
};

struct TaskBuilderConfig {
  size_t max_input_len = 128;
  size_t max_summary_len = 50;   // target token cap, excluding bos/eos
  int tfidf_ngram_max = 2;
  int tfidf_top_k = 10;
  int oracle_max_selected = 5;
  double paraphrase_negative_ratio = 1.0;
  MaskingPolicy masking;
  Text2TextPrefixes prefixes;
};

class TaskBuilder {
 public:
  TaskBuilder(const Vocabulary& vocab, TaskBuilderConfig config = {})
      : vocab_(vocab), cfg_(std::move(config)) {}

  const TaskBuilderConfig& config() const { return cfg_; }

  // [CLS] sentences joined with [SEP]; target = [BOS] reference [EOS].
  TaskExample build_abstractive(const DocumentRecord& doc) const;

  // One example per sentence: [CLS] document words [SEP] sentence words.
  // Labels come from extractive_ref (normalized string match) or, when
  // absent and allow_oracle, from the greedy ROUGE oracle.
  std::vector<TaskExample> build_extractive(const DocumentRecord& doc,
                                            bool allow_oracle = true) const;

  // Greedy: repeatedly add the sentence that most increases mean(R1,R2,RL)
  // F1 vs. abstractive_ref; stop on no improvement or max_selected.
  std::set<int> oracle_extractive_labels(const DocumentRecord& doc, int max_selected) const;

  TaskExample build_concept(const DocumentRecord& doc, const ConceptLabeling& labeling) const;

  std::vector<TaskExample> build_paraphrase(
      const std::vector<DocumentRecord>& summ_corpus,
      const std::vector<std::tuple<std::string, std::string, int>>& msrp,
      double negative_ratio, uint64_t seed) const;

  TaskExample build_mlm(const std::string& text, const MaskingPolicy& policy,
                        uint64_t seed) const;

  // text2text serializations; TaskId::L is rejected.
  TaskExample t2t_abstractive(const DocumentRecord& doc) const;
  std::vector<TaskExample> t2t_extractive(const DocumentRecord& doc,
                                          bool allow_oracle = true) const;
  TaskExample t2t_concept(const DocumentRecord& doc, const ConceptLabeling& labeling) const;
  TaskExample t2t_paraphrase(const std::string& sent1, const std::string& sent2,
                             int label) const;

 private:
  const Vocabulary& vocab_;
  TaskBuilderConfig cfg_;

  std::vector<int> doc_ids_truncated(const DocumentRecord& doc, size_t budget) const;
  std::vector<int> pair_input(const std::vector<std::string>& left_tokens,
                              const std::vector<std::string>& right_tokens) const;
};

// tf = in-document term frequency, idf = ln(N/df); unigrams and n-grams up
// to ngram_max; ranking by tf*idf, ties lexicographic.
std::map<std::string, ConceptLabeling> tfidf_rank(const std::vector<DocumentRecord>& corpus,
                                                  int ngram_max, int top_k);

// MSRP-style TSV: label<TAB>sent1<TAB>sent2
std::vector<std::tuple<std::string, std::string, int>> load_paraphrase_tsv(
    const std::string& path);

void save_concept_labelings(const std::map<std::string, ConceptLabeling>& labelings,
                            const std::string& path);

}  // namespace mtsum
