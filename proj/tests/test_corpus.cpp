#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "mtsum/corpus.hpp"

using namespace mtsum;

namespace {

const std::string kCmFixture = std::string(MTSUM_DATA_DIR) + "/cm_fixture.jsonl";

DatasetManifest tiny_manifest() {
  DatasetManifest m;
  const char* groups[] = {"g1", "g2"};
  const char* splits[] = {"train", "val", "test"};
  int k = 0;
  for (const char* g : groups)
    for (const char* s : splits)
      for (int i = 0; i < 4; ++i) {
        DocumentRecord r;
        r.doc_id = "d" + std::to_string(k++);
        r.group = g;
        r.split = s;
        r.sentences = {"a sentence here", "another one"};
        r.abstractive_ref = "a reference";
        m.records.push_back(r);
      }
  return m;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("manifest save/load round-trip preserves every field") {
  DatasetManifest m = tiny_manifest();
  m.records[0].extractive_ref = std::vector<std::string>{"a sentence here"};
  m.name = "round-trip";
  m.declared_counts["g1"] = {4, 4, 4};
  m.declared_counts["g2"] = {4, 4, 4};
  const std::string path = "manifest_rt.jsonl";
  save_manifest(m, path);
  DatasetManifest back = load_manifest(path);
  std::remove(path.c_str());
  CHECK(back.name == "round-trip");
  REQUIRE(back.records.size() == m.records.size());
  for (size_t i = 0; i < m.records.size(); ++i) {
    CHECK(back.records[i].doc_id == m.records[i].doc_id);
    CHECK(back.records[i].group == m.records[i].group);
    CHECK(back.records[i].split == m.records[i].split);
    CHECK(back.records[i].sentences == m.records[i].sentences);
    CHECK(back.records[i].abstractive_ref == m.records[i].abstractive_ref);
    CHECK(back.records[i].extractive_ref == m.records[i].extractive_ref);
  }
  CHECK(back.declared_counts.at("g1").train == 4);
}

TEST_CASE("malformed manifests report the offending line") {
  const std::string path = "manifest_bad.jsonl";
  const std::string good =
      R"({"doc_id":"d1","group":"g","split":"train","sentences":["s"],"abstractive_ref":"r"})";

  write_lines(path, {good, "{not json"});
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("line 2"), DataError);

  write_lines(path, {good, R"({"group":"g","split":"train","sentences":["s"],"abstractive_ref":"r"})"});
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("doc_id"), DataError);

  write_lines(path, {R"({"doc_id":"d","group":"g","split":"dev","sentences":["s"],"abstractive_ref":"r"})"});
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("split"), DataError);

  write_lines(path, {R"({"doc_id":"d","group":"g","split":"train","sentences":[],"abstractive_ref":"r"})"});
  CHECK_THROWS_AS(load_manifest(path), DataError);

  write_lines(path, {R"({"doc_id":"d","group":"g","split":"train","sentences":["s"],"abstractive_ref":""})"});
  CHECK_THROWS_AS(load_manifest(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("declared counts are validated against the records") {
  DatasetManifest m = tiny_manifest();
  m.declared_counts["g1"] = {99, 0, 0};
  const std::string path = "manifest_counts.jsonl";
  save_manifest(m, path);
  CHECK_THROWS_AS(load_manifest(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("leave-one-out folds partition the corpus") {
  DatasetManifest m = tiny_manifest();
  FoldPlan plan = make_leave_one_out_folds(m, 123);
  REQUIRE(plan.folds.size() == 2);
  for (const auto& fold : plan.folds) {
    std::set<int> seen;
    for (int i : fold.train_ids) seen.insert(i);
    for (int i : fold.val_ids) seen.insert(i);
    for (int i : fold.test_ids) seen.insert(i);
    // disjoint and exhaustive
    CHECK(seen.size() == fold.train_ids.size() + fold.val_ids.size() + fold.test_ids.size());
    CHECK(seen.size() == m.records.size());
    for (int i : fold.test_ids) CHECK(m.records[i].group == fold.test_group);
    for (int i : fold.train_ids) CHECK(m.records[i].group != fold.test_group);
    // 10% of 12-record pool rounds to 1
    CHECK(fold.val_ids.size() == 1);
  }
  // same seed -> same folds; different seed -> (almost surely) different val picks
  FoldPlan again = make_leave_one_out_folds(m, 123);
  CHECK(again.folds[0].val_ids == plan.folds[0].val_ids);
  CHECK(again.folds[0].train_ids == plan.folds[0].train_ids);
}

TEST_CASE("single-group manifest cannot be folded") {
  DatasetManifest m = tiny_manifest();
  for (auto& r : m.records) r.group = "only";
  CHECK_THROWS_AS(make_leave_one_out_folds(m, 0), DataError);
}

TEST_CASE("course-style fixture reproduces the published fold sizes") {
  DatasetManifest m = load_manifest(kCmFixture);
  REQUIRE(m.records.size() == 370);
  CHECK(m.groups() == std::vector<std::string>{"CS", "ENGR", "S2015", "S2016"});
  FoldPlan plan = make_leave_one_out_folds(m, 0);
  REQUIRE(plan.folds.size() == 4);
  struct Want {
    const char* group;
    size_t train, val, test;
  };
  const Want wants[] = {
      {"CS", 209, 23, 138}, {"ENGR", 286, 32, 52}, {"S2015", 254, 28, 88}, {"S2016", 250, 28, 92}};
  for (const auto& w : wants) {
    auto it = std::find_if(plan.folds.begin(), plan.folds.end(),
                           [&](const Fold& f) { return f.test_group == w.group; });
    REQUIRE(it != plan.folds.end());
    CHECK(it->train_ids.size() == w.train);
    CHECK(it->val_ids.size() == w.val);
    CHECK(it->test_ids.size() == w.test);
  }
}

TEST_CASE("subsample_fixed is deterministic and draws a subset per split") {
  DatasetManifest m = tiny_manifest();
  DatasetManifest a = subsample_fixed(m, 3, 2, 1, 42);
  DatasetManifest b = subsample_fixed(m, 3, 2, 1, 42);
  REQUIRE(a.records.size() == 6);
  for (size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].doc_id == b.records[i].doc_id);
  int train = 0, val = 0, test = 0;
  std::set<std::string> all_ids;
  for (const auto& r : m.records) all_ids.insert(r.doc_id);
  for (const auto& r : a.records) {
    CHECK(all_ids.count(r.doc_id) == 1);
    if (r.split == "train") ++train;
    if (r.split == "val") ++val;
    if (r.split == "test") ++test;
  }
  CHECK(train == 3);
  CHECK(val == 2);
  CHECK(test == 1);
  CHECK_THROWS_AS(subsample_fixed(m, 100, 0, 0, 0), DataError);
}
