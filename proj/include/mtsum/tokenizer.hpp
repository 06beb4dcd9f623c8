#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace mtsum {

// Lowercase and split on anything that is not alphanumeric. The same stream
// feeds the vocabulary, the task builders, and the ROUGE scorer.
std::vector<std::string> basic_tokens(const std::string& text);

// Lowercased, single-space-joined token stream; used for sentence matching.
std::string normalize_text(const std::string& text);

struct SpecialTokens {
  int pad = 0;
  int unk = 1;
  int cls = 2;
  int sep = 3;
  int mask = 4;
  int bos = 5;
  int eos = 6;
  static constexpr int count = 7;
  static const char* name(int id);
};

struct TokenSequence {
  std::vector<int> ids;
  bool truncated = false;
  size_t length() const { return ids.size(); }
};

class Vocabulary {
 public:
  Vocabulary();

  // Lowercased whitespace/punctuation tokens with frequency >= min_count.
  // Ids are assigned by descending frequency, ties lexicographic.
  static Vocabulary build(const std::vector<std::string>& corpus, int min_count = 1);

  int size() const { return static_cast<int>(id_to_token_.size()); }
  const SpecialTokens& specials() const { return specials_; }

  int token_to_id(const std::string& token) const;
  const std::string& id_to_token(int id) const;
  bool is_special(int id) const { return id < SpecialTokens::count; }

  TokenSequence encode(const std::string& text, size_t max_len) const;
  std::vector<int> encode_tokens(const std::vector<std::string>& tokens) const;
  // Joins with single spaces; special ids are skipped when skip_specials.
  std::string decode(const std::vector<int>& ids, bool skip_specials = true) const;

  // One token per line, line number = id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  SpecialTokens specials_;
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  void add_token(const std::string& token);
};

}  // namespace mtsum
