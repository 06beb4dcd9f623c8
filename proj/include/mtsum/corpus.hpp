#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtsum {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DocumentRecord {
  std::string doc_id;
  std::string group;                 // course name for CM, split name otherwise
  std::string split;                 // "train" | "val" | "test"
  std::vector<std::string> sentences;
  std::string abstractive_ref;
  std::optional<std::vector<std::string>> extractive_ref;
};

struct SplitCounts {
  int train = 0, val = 0, test = 0;
};

struct DatasetManifest {
  std::string name;
  std::vector<DocumentRecord> records;
  std::map<std::string, SplitCounts> declared_counts;

  std::vector<std::string> groups() const;  // first-appearance order
  int count(const std::string& group, const std::string& split) const;
};

struct Fold {
  std::string test_group;
  std::vector<int> train_ids;  // indices into manifest.records
  std::vector<int> val_ids;
  std::vector<int> test_ids;
};

struct FoldPlan {
  std::vector<Fold> folds;
};

// JSONL, one DocumentRecord per line. Malformed lines report their number.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// One fold per group; test = held-out group, remaining records split 90/10
// train/val by document (seeded shuffle) unless declared_counts give exact
// validation sizes.
FoldPlan make_leave_one_out_folds(const DatasetManifest& manifest, uint64_t seed = 0);

// Uniform sample without replacement per split; deterministic given seed.
DatasetManifest subsample_fixed(const DatasetManifest& manifest, int train_n, int val_n,
                                int test_n, uint64_t seed);

}  // namespace mtsum
