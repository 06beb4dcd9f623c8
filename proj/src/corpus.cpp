#include "mtsum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "mtsum/rng.hpp"

namespace mtsum {

using nlohmann::json;

std::vector<std::string> DatasetManifest::groups() const {
  std::vector<std::string> out;
  for (const auto& r : records)
    if (std::find(out.begin(), out.end(), r.group) == out.end()) out.push_back(r.group);
  return out;
}

int DatasetManifest::count(const std::string& group, const std::string& split) const {
  int n = 0;
  for (const auto& r : records)
    if (r.group == group && r.split == split) ++n;
  return n;
}

namespace {

DocumentRecord parse_record(const json& j, size_t line_no) {
  auto require = [&](const char* field) -> const json& {
    if (!j.contains(field))
      throw DataError("line " + std::to_string(line_no) + ": missing required field \"" +
                      field + "\"");
    return j.at(field);
  };
  DocumentRecord r;
  r.doc_id = require("doc_id").get<std::string>();
  r.group = require("group").get<std::string>();
  r.split = require("split").get<std::string>();
  if (r.split != "train" && r.split != "val" && r.split != "test")
    throw DataError("line " + std::to_string(line_no) + ": invalid split \"" + r.split + "\"");
  r.sentences = require("sentences").get<std::vector<std::string>>();
  if (r.sentences.empty())
    throw DataError("line " + std::to_string(line_no) + ": empty sentence list");
  r.abstractive_ref = require("abstractive_ref").get<std::string>();
  if (r.abstractive_ref.empty())
    throw DataError("line " + std::to_string(line_no) + ": empty abstractive_ref");
  if (j.contains("extractive_ref")) {
    auto ext = j.at("extractive_ref").get<std::vector<std::string>>();
    for (const auto& s : ext)
      if (s.empty())
        throw DataError("line " + std::to_string(line_no) + ": empty extractive_ref entry");
    r.extractive_ref = std::move(ext);
  }
  return r;
}

void check_declared_counts(const DatasetManifest& m) {
  for (const auto& [group, c] : m.declared_counts) {
    const SplitCounts actual{m.count(group, "train"), m.count(group, "val"),
                             m.count(group, "test")};
    if (actual.train != c.train || actual.val != c.val || actual.test != c.test)
      throw DataError("declared counts for group \"" + group +
                      "\" do not match actual records");
  }
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open manifest: " + path);
  DatasetManifest m;
  m.name = path;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (j.contains("declared_counts") && !j.contains("doc_id")) {
      // optional header line
      if (j.contains("name")) m.name = j.at("name").get<std::string>();
      for (const auto& [group, counts] : j.at("declared_counts").items())
        m.declared_counts[group] = SplitCounts{counts.at(0).get<int>(), counts.at(1).get<int>(),
                                               counts.at(2).get<int>()};
      continue;
    }
    m.records.push_back(parse_record(j, line_no));
    // Amazon/Yelp-style groups are expected to carry 8 reviews; fixtures may not.
    const auto& r = m.records.back();
    if (m.name.find("amazon") != std::string::npos && r.sentences.size() != 8)
      std::cerr << "warning: record " << r.doc_id << " has " << r.sentences.size()
                << " sentences, expected 8 reviews\n";
  }
  check_declared_counts(m);
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // LF line endings everywhere
  if (!f) throw DataError("cannot open manifest for writing: " + path);
  if (!manifest.declared_counts.empty()) {
    json header;
    header["name"] = manifest.name;
    json counts = json::object();
    for (const auto& [group, c] : manifest.declared_counts)
      counts[group] = json::array({c.train, c.val, c.test});
    header["declared_counts"] = counts;
    f << header.dump() << '\n';
  }
  for (const auto& r : manifest.records) {
    json j;
    j["doc_id"] = r.doc_id;
    j["group"] = r.group;
    j["split"] = r.split;
    j["sentences"] = r.sentences;
    j["abstractive_ref"] = r.abstractive_ref;
    if (r.extractive_ref) j["extractive_ref"] = *r.extractive_ref;
    f << j.dump() << '\n';
  }
}

FoldPlan make_leave_one_out_folds(const DatasetManifest& manifest, uint64_t seed) {
  const auto groups = manifest.groups();
  if (groups.size() < 2)
    throw DataError("leave-one-out folds require at least 2 groups, got " +
                    std::to_string(groups.size()));
  FoldPlan plan;
  for (const auto& held_out : groups) {
    Fold fold;
    fold.test_group = held_out;
    std::vector<int> pool;
    for (int i = 0; i < static_cast<int>(manifest.records.size()); ++i) {
      if (manifest.records[i].group == held_out)
        fold.test_ids.push_back(i);
      else
        pool.push_back(i);
    }
    int val_n;
    auto it = manifest.declared_counts.find(held_out);
    if (it != manifest.declared_counts.end())
      val_n = it->second.val;
    else
      val_n = static_cast<int>(std::lround(0.1 * static_cast<double>(pool.size())));
    Rng rng(seed ^ std::hash<std::string>{}(held_out));
    rng.shuffle(pool);
    fold.val_ids.assign(pool.begin(), pool.begin() + val_n);
    fold.train_ids.assign(pool.begin() + val_n, pool.end());
    std::sort(fold.val_ids.begin(), fold.val_ids.end());
    std::sort(fold.train_ids.begin(), fold.train_ids.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

DatasetManifest subsample_fixed(const DatasetManifest& manifest, int train_n, int val_n,
                                int test_n, uint64_t seed) {
  DatasetManifest out;
  out.name = manifest.name + "-subsample";
  const std::pair<std::string, int> wanted[] = {
      {"train", train_n}, {"val", val_n}, {"test", test_n}};
  Rng rng(seed);
  for (const auto& [split, n] : wanted) {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(manifest.records.size()); ++i)
      if (manifest.records[i].split == split) ids.push_back(i);
    if (static_cast<int>(ids.size()) < n)
      throw DataError("subsample: requested " + std::to_string(n) + " " + split +
                      " records but only " + std::to_string(ids.size()) + " available");
    rng.shuffle(ids);
    ids.resize(n);
    std::sort(ids.begin(), ids.end());
    for (int i : ids) out.records.push_back(manifest.records[i]);
  }
  return out;
}

}  // namespace mtsum
