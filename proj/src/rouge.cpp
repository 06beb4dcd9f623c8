#include "mtsum/rouge.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mtsum/tokenizer.hpp"

namespace mtsum {

namespace {

Prf prf(double overlap, double cand_total, double ref_total) {
  Prf s;
  s.precision = cand_total > 0 ? overlap / cand_total : 0.0;
  s.recall = ref_total > 0 ? overlap / ref_total : 0.0;
  const double pr = s.precision + s.recall;
  s.f1 = pr > 0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  return s;
}

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks,
                                                     int n) {
  std::map<std::vector<std::string>, int> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (size_t i = 0; i + n <= toks.size(); ++i)
    ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

Prf rouge_n(const std::string& candidate, const std::string& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto cand = basic_tokens(candidate);
  const auto ref = basic_tokens(reference);
  const auto cand_counts = ngram_counts(cand, n);
  const auto ref_counts = ngram_counts(ref, n);
  double overlap = 0, cand_total = 0, ref_total = 0;
  for (const auto& [g, c] : cand_counts) cand_total += c;
  for (const auto& [g, c] : ref_counts) ref_total += c;
  for (const auto& [g, c] : cand_counts) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  return prf(overlap, cand_total, ref_total);
}

Prf rouge_l(const std::string& candidate, const std::string& reference) {
  const auto cand = basic_tokens(candidate);
  const auto ref = basic_tokens(reference);
  const double lcs = lcs_length(cand, ref);
  return prf(lcs, static_cast<double>(cand.size()), static_cast<double>(ref.size()));
}

RougeScore rouge_all(const std::string& candidate, const std::string& reference) {
  RougeScore s;
  s.r1 = rouge_n(candidate, reference, 1);
  s.r2 = rouge_n(candidate, reference, 2);
  s.rl = rouge_l(candidate, reference);
  return s;
}

namespace {

RougeScore mean_scores(const std::vector<RougeScore>& scores) {
  RougeScore m;
  if (scores.empty()) return m;
  auto acc = [&](Prf RougeScore::*field) {
    Prf out;
    for (const auto& s : scores) {
      out.precision += (s.*field).precision;
      out.recall += (s.*field).recall;
      out.f1 += (s.*field).f1;
    }
    const double n = static_cast<double>(scores.size());
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
    return out;
  };
  m.r1 = acc(&RougeScore::r1);
  m.r2 = acc(&RougeScore::r2);
  m.rl = acc(&RougeScore::rl);
  return m;
}

}  // namespace

AggregateScore aggregate(const std::vector<ScoredPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("aggregate: empty input");
  std::vector<RougeScore> scores(pairs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < static_cast<int>(pairs.size()); ++i)
    scores[i] = rouge_all(pairs[i].candidate, pairs[i].reference);

  AggregateScore out;
  std::map<std::string, std::vector<RougeScore>> by_group;
  for (size_t i = 0; i < pairs.size(); ++i) by_group[pairs[i].group].push_back(scores[i]);
  std::vector<RougeScore> group_means;
  for (const auto& [group, gs] : by_group) {
    out.per_group[group] = mean_scores(gs);
    group_means.push_back(out.per_group[group]);
  }
  out.mean = mean_scores(group_means);
  return out;
}

RougeScore mean_of_groups(const std::vector<RougeScore>& group_scores) {
  return mean_scores(group_scores);
}

}  // namespace mtsum
