#pragma once

#include <map>
#include <string>
#include <vector>

namespace mtsum {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RougeScore {
  Prf r1, r2, rl;
  double mean_f1() const { return (r1.f1 + r2.f1 + rl.f1) / 3.0; }
};

// Clipped n-gram overlap over the lowercased whitespace/punctuation token
// stream; no stemming. Empty sides score zero.
Prf rouge_n(const std::string& candidate, const std::string& reference, int n);

// Summary-level LCS over the full token sequences.
Prf rouge_l(const std::string& candidate, const std::string& reference);

RougeScore rouge_all(const std::string& candidate, const std::string& reference);

struct ScoredPair {
  std::string candidate;
  std::string reference;
  std::string group;  // optional grouping key
};

struct AggregateScore {
  std::map<std::string, RougeScore> per_group;
  RougeScore mean;  // arithmetic mean of the per-group scores
};

// Per-document scores averaged within each group, then group means averaged
// for the headline number. Pairs are scored in parallel when OpenMP is on.
AggregateScore aggregate(const std::vector<ScoredPair>& pairs);

// Mean of already-computed per-group scores (e.g. published per-course rows).
RougeScore mean_of_groups(const std::vector<RougeScore>& group_scores);

}  // namespace mtsum
