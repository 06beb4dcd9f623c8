#include "mtsum/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace mtsum {

std::vector<std::string> basic_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string normalize_text(const std::string& text) {
  const auto toks = basic_tokens(text);
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out += toks[i];
  }
  return out;
}

const char* SpecialTokens::name(int id) {
  switch (id) {
    case 0: return "[PAD]";
    case 1: return "[UNK]";
    case 2: return "[CLS]";
    case 3: return "[SEP]";
    case 4: return "[MASK]";
    case 5: return "[BOS]";
    case 6: return "[EOS]";
    default: return "";
  }
}

Vocabulary::Vocabulary() {
  for (int i = 0; i < SpecialTokens::count; ++i) {
    id_to_token_.emplace_back(SpecialTokens::name(i));
    token_to_id_[id_to_token_.back()] = i;
  }
}

void Vocabulary::add_token(const std::string& token) {
  if (token_to_id_.count(token)) return;
  token_to_id_[token] = static_cast<int>(id_to_token_.size());
  id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus, int min_count) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::map<std::string, long> freq;
  for (const auto& text : corpus)
    for (const auto& tok : basic_tokens(text)) ++freq[tok];

  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, n] : freq)
    if (n >= min_count) kept.emplace_back(tok, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (const auto& [tok, n] : kept) v.add_token(tok);
  return v;
}

int Vocabulary::token_to_id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? specials_.unk : it->second;
}

const std::string& Vocabulary::id_to_token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
  return id_to_token_[id];
}

TokenSequence Vocabulary::encode(const std::string& text, size_t max_len) const {
  TokenSequence seq;
  for (const auto& tok : basic_tokens(text)) {
    if (seq.ids.size() >= max_len) {
      seq.truncated = true;
      break;
    }
    seq.ids.push_back(token_to_id(tok));
  }
  return seq;
}

std::vector<int> Vocabulary::encode_tokens(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) ids.push_back(token_to_id(tok));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids, bool skip_specials) const {
  std::string out;
  for (int id : ids) {
    if (skip_specials && is_special(id)) continue;
    if (!out.empty()) out.push_back(' ');
    out += id_to_token(id);
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open vocabulary file for writing: " + path);
  for (const auto& tok : id_to_token_) f << tok << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open vocabulary file: " + path);
  Vocabulary v;
  std::string line;
  int id = 0;
  while (std::getline(f, line)) {
    if (id >= SpecialTokens::count) v.add_token(line);
    else if (line != SpecialTokens::name(id))
      throw std::runtime_error("vocabulary file does not start with the reserved tokens");
    ++id;
  }
  return v;
}

}  // namespace mtsum
