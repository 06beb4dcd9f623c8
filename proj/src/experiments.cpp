#include "mtsum/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "mtsum/decode.hpp"

namespace mtsum {

namespace {

TaskCombo make_combo(ModelMode mode, const std::string& letters) {
  const std::set<TaskId> full = mode == ModelMode::Heads
                                    ? std::set<TaskId>{TaskId::E, TaskId::C, TaskId::P, TaskId::L}
                                    : std::set<TaskId>{TaskId::E, TaskId::C, TaskId::P};
  TaskCombo combo;
  for (char c : letters) {
    if (c == ' ' || c == 'A') continue;
    const TaskId t = task_from_letter(c);
    if (t == TaskId::L && mode == ModelMode::Text2Text)
      throw std::invalid_argument("text2text combos cannot include L");
    combo.aux.insert(t);
  }
  if (combo.aux.empty())
    combo.name = mode == ModelMode::Heads ? "Single task (A)" : "Single Task (A)";
  else if (combo.aux == full)
    combo.name = "ALL";
  else {
    combo.name = "A";
    for (char c : letters)
      if (c != ' ' && c != 'A') combo.name += std::string(" ") + c;
  }
  return combo;
}

}  // namespace

TaskCombo combo_from_letters(ModelMode mode, const std::string& letters) {
  return make_combo(mode, letters);
}

std::vector<TaskCombo> enumerate_combos(ModelMode mode, const std::string& preset) {
  std::vector<TaskCombo> out;
  if (preset == "paper-cm") {
    if (mode != ModelMode::Heads)
      throw std::invalid_argument("preset paper-cm is a heads-mode table");
    for (const char* row : {"", "C", "E", "P", "L", "E L", "E P", "E C", "C P", "L P", "L C",
                            "E C P L"})
      out.push_back(make_combo(mode, row));
    return out;
  }
  if (preset == "paper-t5") {
    if (mode != ModelMode::Text2Text)
      throw std::invalid_argument("preset paper-t5 is a text2text table");
    for (const char* row : {"", "E", "C", "P", "C P", "E C", "E C P"})
      out.push_back(make_combo(mode, row));
    return out;
  }
  if (preset == "all-subsets") {
    std::vector<TaskId> pool = {TaskId::E, TaskId::C, TaskId::P};
    if (mode == ModelMode::Heads) pool.push_back(TaskId::L);
    const size_t n = pool.size();
    for (size_t bits = 0; bits < (size_t{1} << n); ++bits) {
      std::string letters;
      for (size_t i = 0; i < n; ++i)
        if (bits & (size_t{1} << i)) letters += std::string(" ") + task_letter(pool[i]);
      out.push_back(make_combo(mode, letters));
    }
    return out;
  }
  throw std::invalid_argument("unknown preset: " + preset);
}

std::vector<ExperimentResult> run_sweep(const FoldPlan& plan,
                                        const std::vector<TaskCombo>& combos,
                                        const CellEvaluator& evaluate) {
  const TaskCombo* baseline = nullptr;
  for (const auto& c : combos)
    if (c.aux.empty()) baseline = &c;
  if (!baseline)
    throw std::invalid_argument("the single-task baseline combo must be in the sweep");

  std::vector<ExperimentResult> results;
  for (const auto& combo : combos) {
    ExperimentResult r;
    r.combo = combo;
    std::vector<RougeScore> fold_scores;
    for (size_t f = 0; f < plan.folds.size(); ++f) {
      RougeScore s = evaluate(combo, static_cast<int>(f));
      r.per_fold.push_back({plan.folds[f].test_group, s});
      fold_scores.push_back(s);
    }
    r.mean = mean_of_groups(fold_scores);
    results.push_back(std::move(r));
  }

  const ExperimentResult* base = nullptr;
  for (const auto& r : results)
    if (r.combo.aux.empty()) base = &r;
  for (auto& r : results) {
    r.delta_r1 = r.mean.r1.f1 - base->mean.r1.f1;
    r.delta_r2 = r.mean.r2.f1 - base->mean.r2.f1;
    r.delta_rl = r.mean.rl.f1 - base->mean.rl.f1;
    r.improved_r1 = r.delta_r1 > 0;
    r.improved_r2 = r.delta_r2 > 0;
    r.improved_rl = r.delta_rl > 0;
  }
  return results;
}

namespace {

std::string fmt(double f1) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", f1 * 100.0);
  return buf;
}

struct ColumnMax {
  double r1 = -1, r2 = -1, rl = -1;
};

ColumnMax column_max(const std::vector<ExperimentResult>& results) {
  ColumnMax m;
  for (const auto& r : results) {
    m.r1 = std::max(m.r1, r.mean.r1.f1);
    m.r2 = std::max(m.r2, r.mean.r2.f1);
    m.rl = std::max(m.rl, r.mean.rl.f1);
  }
  return m;
}

// improved cells get a trailing '*', column maxima '^'
std::string cell(double f1, bool improved, bool best) {
  std::string s = fmt(f1);
  if (improved) s += '*';
  if (best) s += '^';
  return s;
}

}  // namespace

std::string emit_report_markdown(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw std::invalid_argument("emit_report: empty results");
  const ColumnMax mx = column_max(results);
  std::string out;
  out += "| Tasks | R1 | R2 | RL | AVG |\n";
  out += "|---|---|---|---|---|\n";
  for (const auto& r : results) {
    out += "| " + r.combo.name;
    out += " | " + cell(r.mean.r1.f1, r.improved_r1, r.mean.r1.f1 == mx.r1);
    out += " | " + cell(r.mean.r2.f1, r.improved_r2, r.mean.r2.f1 == mx.r2);
    out += " | " + cell(r.mean.rl.f1, r.improved_rl, r.mean.rl.f1 == mx.rl);
    out += " | " + fmt(r.mean.mean_f1());
    out += " |\n";
  }
  out += "\n`*` improved over the single-task baseline; `^` column maximum; ";
  out += "AVG = mean of R1/R2/RL F1.\n";
  return out;
}

std::string emit_report_csv(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw std::invalid_argument("emit_report: empty results");
  const ColumnMax mx = column_max(results);
  std::string out = "tasks,r1_f1,r2_f1,rl_f1,avg_f1,r1_improved,r2_improved,rl_improved,"
                    "r1_best,r2_best,rl_best\n";
  for (const auto& r : results) {
    out += '"' + r.combo.name + '"';
    out += ',' + fmt(r.mean.r1.f1) + ',' + fmt(r.mean.r2.f1) + ',' + fmt(r.mean.rl.f1);
    out += ',' + fmt(r.mean.mean_f1());
    out += std::string(",") + (r.improved_r1 ? "1" : "0") + ',' + (r.improved_r2 ? "1" : "0") +
           ',' + (r.improved_rl ? "1" : "0");
    out += std::string(",") + (r.mean.r1.f1 == mx.r1 ? "1" : "0") + ',' +
           (r.mean.r2.f1 == mx.r2 ? "1" : "0") + ',' + (r.mean.rl.f1 == mx.rl ? "1" : "0");
    out += '\n';
  }
  return out;
}

std::string emit_report_per_fold_csv(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw std::invalid_argument("emit_report: empty results");
  std::string out = "tasks,group,r1_f1,r2_f1,rl_f1,avg_f1\n";
  for (const auto& r : results)
    for (const auto& f : r.per_fold) {
      out += '"' + r.combo.name + "\"," + f.group;
      out += ',' + fmt(f.score.r1.f1) + ',' + fmt(f.score.r2.f1) + ',' + fmt(f.score.rl.f1);
      out += ',' + fmt(f.score.mean_f1()) + '\n';
    }
  return out;
}

void save_results_json(const std::vector<ExperimentResult>& results, const std::string& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json j;
    j["tasks"] = r.combo.name;
    j["mean"] = {{"r1_f1", r.mean.r1.f1}, {"r2_f1", r.mean.r2.f1}, {"rl_f1", r.mean.rl.f1}};
    j["delta"] = {{"r1", r.delta_r1}, {"r2", r.delta_r2}, {"rl", r.delta_rl}};
    j["improved"] = {{"r1", r.improved_r1}, {"r2", r.improved_r2}, {"rl", r.improved_rl}};
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : r.per_fold)
      folds.push_back({{"group", f.group},
                       {"r1_f1", f.score.r1.f1},
                       {"r2_f1", f.score.r2.f1},
                       {"rl_f1", f.score.rl.f1}});
    j["per_fold"] = folds;
    arr.push_back(j);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open results file: " + path);
  f << arr.dump(2) << '\n';
}

std::vector<ExperimentResult> load_results_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open results file: " + path);
  nlohmann::json arr;
  try {
    f >> arr;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed results file " + path + ": " + e.what());
  }
  std::vector<ExperimentResult> out;
  for (const auto& j : arr) {
    ExperimentResult r;
    r.combo.name = j.at("tasks").get<std::string>();
    for (char c : r.combo.name)
      if (c == 'E' || c == 'C' || c == 'P' || c == 'L') r.combo.aux.insert(task_from_letter(c));
    if (r.combo.name == "ALL")
      r.combo.aux = {TaskId::E, TaskId::C, TaskId::P, TaskId::L};
    r.mean.r1.f1 = j.at("mean").at("r1_f1").get<double>();
    r.mean.r2.f1 = j.at("mean").at("r2_f1").get<double>();
    r.mean.rl.f1 = j.at("mean").at("rl_f1").get<double>();
    r.delta_r1 = j.at("delta").at("r1").get<double>();
    r.delta_r2 = j.at("delta").at("r2").get<double>();
    r.delta_rl = j.at("delta").at("rl").get<double>();
    r.improved_r1 = j.at("improved").at("r1").get<bool>();
    r.improved_r2 = j.at("improved").at("r2").get<bool>();
    r.improved_rl = j.at("improved").at("rl").get<bool>();
    for (const auto& fj : j.at("per_fold")) {
      FoldScore fs;
      fs.group = fj.at("group").get<std::string>();
      fs.score.r1.f1 = fj.at("r1_f1").get<double>();
      fs.score.r2.f1 = fj.at("r2_f1").get<double>();
      fs.score.rl.f1 = fj.at("rl_f1").get<double>();
      r.per_fold.push_back(fs);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Vocabulary build_fold_vocab(const std::vector<DocumentRecord>& docs, ModelMode mode,
                            const TaskBuilderConfig& builder_cfg) {
  std::vector<std::string> texts;
  for (const auto& d : docs) {
    for (const auto& s : d.sentences) texts.push_back(s);
    texts.push_back(d.abstractive_ref);
  }
  if (mode == ModelMode::Text2Text) {
    texts.push_back("yes no");
    texts.push_back(builder_cfg.prefixes.abstractive + " " + builder_cfg.prefixes.extractive +
                    " " + builder_cfg.prefixes.concepts + " " + builder_cfg.prefixes.paraphrase);
  }
  return Vocabulary::build(texts, 1);
}

TaskStreams build_task_streams(const std::vector<DocumentRecord>& docs,
                               const std::set<TaskId>& tasks, const TaskBuilder& builder,
                               ModelMode mode, uint64_t seed, const std::string& msrp_path) {
  TaskStreams streams;
  std::vector<std::tuple<std::string, std::string, int>> msrp;
  if (!msrp_path.empty()) msrp = load_paraphrase_tsv(msrp_path);

  std::map<std::string, ConceptLabeling> labelings;
  if (tasks.count(TaskId::C))
    labelings = tfidf_rank(docs, builder.config().tfidf_ngram_max, builder.config().tfidf_top_k);

  if (mode == ModelMode::Heads) {
    for (const auto& doc : docs) {
      streams[TaskId::A].push_back(builder.build_abstractive(doc));
      if (tasks.count(TaskId::E)) {
        auto exs = builder.build_extractive(doc);
        streams[TaskId::E].insert(streams[TaskId::E].end(), exs.begin(), exs.end());
      }
      if (tasks.count(TaskId::C))
        streams[TaskId::C].push_back(builder.build_concept(doc, labelings.at(doc.doc_id)));
      if (tasks.count(TaskId::L)) {
        std::string text;
        for (const auto& s : doc.sentences) text += s + " ";
        streams[TaskId::L].push_back(builder.build_mlm(
            text, builder.config().masking, seed ^ std::hash<std::string>{}(doc.doc_id)));
      }
    }
    if (tasks.count(TaskId::P))
      streams[TaskId::P] = builder.build_paraphrase(
          docs, msrp, builder.config().paraphrase_negative_ratio, seed ^ 0x70ULL);
    return streams;
  }

  // text2text: everything lands in one mixture pool keyed by TaskId::A
  auto& pool = streams[TaskId::A];
  for (const auto& doc : docs) {
    pool.push_back(builder.t2t_abstractive(doc));
    if (tasks.count(TaskId::E)) {
      auto exs = builder.t2t_extractive(doc);
      pool.insert(pool.end(), exs.begin(), exs.end());
    }
    if (tasks.count(TaskId::C))
      pool.push_back(builder.t2t_concept(doc, labelings.at(doc.doc_id)));
  }
  if (tasks.count(TaskId::P)) {
    for (const auto& [s1, s2, label] : msrp) pool.push_back(builder.t2t_paraphrase(s1, s2, label));
    Rng rng(seed ^ 0x70ULL);
    for (size_t i = 0; i < docs.size(); ++i) {
      std::string doc_text;
      for (const auto& s : docs[i].sentences) doc_text += s + " ";
      pool.push_back(builder.t2t_paraphrase(doc_text, docs[i].abstractive_ref, 1));
      if (docs.size() > 1) {
        size_t j = rng.next_below(docs.size() - 1);
        if (j >= i) ++j;
        pool.push_back(builder.t2t_paraphrase(doc_text, docs[j].abstractive_ref, 0));
      }
    }
  }
  return streams;
}

CellEvaluator make_training_evaluator(const DatasetManifest& manifest, const FoldPlan& plan,
                                      const ExperimentConfig& config) {
  return [&manifest, &plan, config](const TaskCombo& combo, int fold_index) -> RougeScore {
    const Fold& fold = plan.folds.at(fold_index);
    auto records_of = [&](const std::vector<int>& ids) {
      std::vector<DocumentRecord> out;
      for (int i : ids) out.push_back(manifest.records[i]);
      return out;
    };
    const auto train_docs = records_of(fold.train_ids);
    const auto val_docs = records_of(fold.val_ids);
    const auto test_docs = records_of(fold.test_ids);

    const ModelMode mode = config.train.mode;
    Vocabulary vocab = build_fold_vocab(train_docs, mode, config.builder);

    TaskBuilder builder(vocab, config.builder);
    std::set<TaskId> tasks = combo.aux;
    tasks.insert(TaskId::A);

    TrainConfig tc = config.train;
    tc.tasks = tasks;
    const auto streams =
        build_task_streams(train_docs, tasks, builder, mode, tc.seed, config.msrp_path);

    std::vector<ValExample> val;
    for (const auto& doc : val_docs) {
      const auto ex = mode == ModelMode::Heads ? builder.build_abstractive(doc)
                                               : builder.t2t_abstractive(doc);
      val.push_back({ex.input, doc.abstractive_ref, doc.group, doc.doc_id});
    }

    EncoderConfig ec = config.encoder;
    ec.vocab = vocab.size();
    ec.max_len = std::max(ec.max_len, config.train.max_input_len);
    ModelBundle model(mode, ec, tasks, tc.seed);
    Trainer trainer(model, vocab, tc, config.opt);
    TrainResult result = mode == ModelMode::Heads ? trainer.train(streams, val)
                                                  : trainer.train_mixture(streams.at(TaskId::A), val);
    model.restore(result.best_params);

    const auto& sp = vocab.specials();
    std::vector<ScoredPair> pairs;
    DecodeConfig dc;
    dc.beam_width = config.beam_width;
    dc.max_tokens = config.train.decode_max_tokens;
    for (const auto& doc : test_docs) {
      const auto ex = mode == ModelMode::Heads ? builder.build_abstractive(doc)
                                               : builder.t2t_abstractive(doc);
      ModelScorer scorer(model, ex.input, sp.bos, sp.eos);
      Hypothesis hyp = dc.beam_width == 1 ? greedy(scorer, dc.max_tokens)
                                          : beam_search(scorer, dc);
      pairs.push_back({vocab.decode(hyp.ids), doc.abstractive_ref, doc.group});
    }
    return aggregate(pairs).mean;
  };
}

}  // namespace mtsum
