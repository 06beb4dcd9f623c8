// Command line front end: prepare / train / sweep / score / report.
// Exit codes: 0 success, 1 configuration error, 2 data error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtsum/decode.hpp"
#include "mtsum/experiments.hpp"

namespace fs = std::filesystem;
using namespace mtsum;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value config file; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    try {
      if (key == "epochs") cfg.train.epochs = std::stoi(value);
      else if (key == "batch_size") cfg.train.batch_size = std::stoi(value);
      else if (key == "seed") cfg.train.seed = std::stoull(value);
      else if (key == "max_input_len") {
        cfg.train.max_input_len = std::stoi(value);
        cfg.builder.max_input_len = std::stoul(value);
      } else if (key == "max_summary_len") cfg.builder.max_summary_len = std::stoul(value);
      else if (key == "decode_max_tokens") cfg.train.decode_max_tokens = std::stoi(value);
      else if (key == "beam_width") cfg.beam_width = std::stoi(value);
      else if (key == "clip_norm") cfg.train.clip_norm = std::stod(value);
      else if (key == "single_optimizer") cfg.train.single_optimizer = value == "1" || value == "true";
      else if (key == "encoder_lr") cfg.opt.encoder_lr = std::stod(value);
      else if (key == "decoder_lr") cfg.opt.decoder_lr = std::stod(value);
      else if (key == "heads_lr") cfg.opt.heads_lr = std::stod(value);
      else if (key == "single_lr") cfg.opt.single_lr = std::stod(value);
      else if (key == "layers") cfg.encoder.layers = std::stoi(value);
      else if (key == "hidden") cfg.encoder.hidden = std::stoi(value);
      else if (key == "attention_heads") cfg.encoder.heads = std::stoi(value);
      else if (key == "ffn_hidden") cfg.encoder.ffn_hidden = std::stoi(value);
      else if (key == "tfidf_top_k") cfg.builder.tfidf_top_k = std::stoi(value);
      else if (key == "tfidf_ngram_max") cfg.builder.tfidf_ngram_max = std::stoi(value);
      else if (key == "negative_ratio") cfg.builder.paraphrase_negative_ratio = std::stod(value);
      else if (key == "mask_prob") cfg.builder.masking.mask_prob = std::stod(value);
      else if (key == "oracle_max_selected") cfg.builder.oracle_max_selected = std::stoi(value);
      else if (key == "msrp") cfg.msrp_path = value;
      else if (key == "prefix_abstractive") cfg.builder.prefixes.abstractive = value;
      else if (key == "prefix_extractive") cfg.builder.prefixes.extractive = value;
      else if (key == "prefix_concept") cfg.builder.prefixes.concepts = value;
      else if (key == "prefix_paraphrase") cfg.builder.prefixes.paraphrase = value;
      else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value for config key " + key + ": " + value);
    }
  }
}

ModelMode parse_mode(const std::string& mode) {
  if (mode == "heads") return ModelMode::Heads;
  if (mode == "text2text") return ModelMode::Text2Text;
  throw ConfigError("mode must be 'heads' or 'text2text', got: " + mode);
}

std::set<TaskId> parse_tasks(const std::string& letters) {
  std::set<TaskId> tasks = {TaskId::A};
  for (char c : letters)
    if (c != ' ' && c != 'A') tasks.insert(task_from_letter(c));
  return tasks;
}

FoldPlan plan_for(const DatasetManifest& manifest, uint64_t seed) {
  if (manifest.groups().size() >= 2) return make_leave_one_out_folds(manifest, seed);
  // single-group data falls back to the records' own split fields
  Fold fold;
  fold.test_group = manifest.groups().empty() ? "" : manifest.groups()[0];
  for (int i = 0; i < static_cast<int>(manifest.records.size()); ++i) {
    const auto& split = manifest.records[i].split;
    if (split == "train") fold.train_ids.push_back(i);
    else if (split == "val") fold.val_ids.push_back(i);
    else fold.test_ids.push_back(i);
  }
  FoldPlan plan;
  plan.folds.push_back(std::move(fold));
  return plan;
}

int cmd_prepare(const std::string& manifest_path, const std::string& out_dir,
                const std::string& tasks_str, const std::string& mode_str,
                const ExperimentConfig& cfg) {
  const auto manifest = load_manifest(manifest_path);
  const ModelMode mode = parse_mode(mode_str);
  const auto tasks = parse_tasks(tasks_str);
  fs::create_directories(out_dir);

  Vocabulary vocab = build_fold_vocab(manifest.records, mode, cfg.builder);
  vocab.save(out_dir + "/vocab.txt");
  TaskBuilder builder(vocab, cfg.builder);
  const auto streams = build_task_streams(manifest.records, tasks, builder, mode,
                                          cfg.train.seed, cfg.msrp_path);
  if (tasks.count(TaskId::C)) {
    const auto labelings =
        tfidf_rank(manifest.records, cfg.builder.tfidf_ngram_max, cfg.builder.tfidf_top_k);
    save_concept_labelings(labelings, out_dir + "/concepts.jsonl");
  }
  nlohmann::json counts;
  for (const auto& [task, exs] : streams)
    counts[std::string(1, task_letter(task))] = exs.size();
  std::ofstream(out_dir + "/prepare_summary.json") << counts.dump(2) << '\n';
  std::cout << "vocab size " << vocab.size() << ", example counts " << counts.dump() << '\n';
  return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& out_dir,
              const std::string& tasks_str, const std::string& mode_str, int fold_index,
              ExperimentConfig cfg) {
  const auto manifest = load_manifest(manifest_path);
  const ModelMode mode = parse_mode(mode_str);
  cfg.train.mode = mode;
  cfg.train.tasks = parse_tasks(tasks_str);
  if (mode == ModelMode::Text2Text && cfg.train.tasks.count(TaskId::L))
    throw ConfigError("text2text mode excludes task L");
  fs::create_directories(out_dir);

  const FoldPlan plan = plan_for(manifest, cfg.train.seed);
  if (fold_index < 0 || fold_index >= static_cast<int>(plan.folds.size()))
    throw ConfigError("fold index out of range (have " + std::to_string(plan.folds.size()) +
                      " folds)");
  const Fold& fold = plan.folds[fold_index];

  std::vector<DocumentRecord> train_docs, val_docs;
  for (int i : fold.train_ids) train_docs.push_back(manifest.records[i]);
  for (int i : fold.val_ids) val_docs.push_back(manifest.records[i]);

  Vocabulary vocab = build_fold_vocab(train_docs, mode, cfg.builder);
  vocab.save(out_dir + "/vocab.txt");
  TaskBuilder builder(vocab, cfg.builder);
  const auto streams = build_task_streams(train_docs, cfg.train.tasks, builder, mode,
                                          cfg.train.seed, cfg.msrp_path);
  std::vector<ValExample> val;
  for (const auto& doc : val_docs) {
    const auto ex = mode == ModelMode::Heads ? builder.build_abstractive(doc)
                                             : builder.t2t_abstractive(doc);
    val.push_back({ex.input, doc.abstractive_ref, doc.group, doc.doc_id});
  }

  EncoderConfig ec = cfg.encoder;
  ec.vocab = vocab.size();
  ec.max_len = std::max(ec.max_len, cfg.train.max_input_len);
  ModelBundle model(mode, ec, cfg.train.tasks, cfg.train.seed);
  Trainer trainer(model, vocab, cfg.train, cfg.opt);
  TrainResult result = mode == ModelMode::Heads
                           ? trainer.train(streams, val)
                           : trainer.train_mixture(streams.at(TaskId::A), val);
  model.restore(result.best_params);
  model.save_checkpoint(out_dir + "/model.ckpt", out_dir + "/vocab.txt");
  save_train_log_csv(result.log, out_dir + "/train_log.csv");
  save_train_log_json(result.log, out_dir + "/train_summary.json");
  std::cout << "best epoch " << result.log.selected_epoch << ", val mean F1 "
            << result.log.val_scores[result.log.selected_epoch - 1].mean_f1() << '\n';
  return 0;
}

int cmd_sweep(const std::string& manifest_path, const std::string& out_dir,
              const std::string& preset, const std::string& mode_str, ExperimentConfig cfg) {
  const auto manifest = load_manifest(manifest_path);
  const ModelMode mode = parse_mode(mode_str);
  cfg.train.mode = mode;
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/cells");

  const FoldPlan plan = plan_for(manifest, cfg.train.seed);
  const auto combos = enumerate_combos(mode, preset);
  const auto evaluator = make_training_evaluator(manifest, plan, cfg);
  // wrap the evaluator to persist one JSON per (combo, fold) cell
  CellEvaluator logging = [&](const TaskCombo& combo, int fold) {
    RougeScore s = evaluator(combo, fold);
    nlohmann::json j = {{"tasks", combo.name},
                        {"group", plan.folds[fold].test_group},
                        {"r1_f1", s.r1.f1},
                        {"r2_f1", s.r2.f1},
                        {"rl_f1", s.rl.f1}};
    std::string name = combo.name;
    for (auto& c : name)
      if (c == ' ' || c == '(' || c == ')') c = '_';
    std::ofstream(out_dir + "/cells/" + name + "." + plan.folds[fold].test_group + ".json")
        << j.dump(2) << '\n';
    return s;
  };
  const auto results = run_sweep(plan, combos, logging);
  save_results_json(results, out_dir + "/results.json");
  std::ofstream(out_dir + "/report.md", std::ios::binary) << emit_report_markdown(results);
  std::ofstream(out_dir + "/report.csv", std::ios::binary) << emit_report_csv(results);
  std::ofstream(out_dir + "/per_fold.csv", std::ios::binary)
      << emit_report_per_fold_csv(results);
  std::cout << emit_report_markdown(results);
  return 0;
}

int cmd_score(const std::string& candidates_path, const std::string& manifest_path) {
  const auto manifest = load_manifest(manifest_path);
  std::map<std::string, const DocumentRecord*> by_id;
  for (const auto& r : manifest.records) by_id[r.doc_id] = &r;

  std::ifstream f(candidates_path);
  if (!f) throw DataError("cannot open candidates: " + candidates_path);
  std::vector<ScoredPair> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("candidates line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string doc_id = j.at("doc_id").get<std::string>();
    auto it = by_id.find(doc_id);
    if (it == by_id.end()) throw DataError("unknown doc_id in candidates: " + doc_id);
    pairs.push_back({j.at("summary").get<std::string>(), it->second->abstractive_ref,
                     it->second->group});
  }
  const auto agg = aggregate(pairs);
  std::cout << "group,r1_f1,r2_f1,rl_f1\n";
  for (const auto& [group, s] : agg.per_group)
    std::cout << group << ',' << s.r1.f1 << ',' << s.r2.f1 << ',' << s.rl.f1 << '\n';
  std::cout << "MEAN," << agg.mean.r1.f1 << ',' << agg.mean.r2.f1 << ',' << agg.mean.rl.f1
            << '\n';
  return 0;
}

int cmd_report(const std::string& results_path, const std::string& format) {
  const auto results = load_results_json(results_path);
  if (format == "md") std::cout << emit_report_markdown(results);
  else if (format == "csv") std::cout << emit_report_csv(results);
  else if (format == "per-fold") std::cout << emit_report_per_fold_csv(results);
  else throw ConfigError("format must be md, csv, or per-fold");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multitask low-resource summarization framework"};
  app.require_subcommand(1);

  std::string manifest, out_dir = "out", tasks = "A", mode = "heads", config_path;
  std::string preset = "paper-cm", candidates, results_path, format = "md";
  int fold_index = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key=value config file");
  };

  auto* prepare = app.add_subcommand("prepare", "build task datasets from a manifest");
  prepare->add_option("--manifest", manifest, "JSONL manifest")->required();
  prepare->add_option("--out", out_dir, "output directory");
  prepare->add_option("--tasks", tasks, "task letters, e.g. AECP");
  prepare->add_option("--mode", mode, "heads | text2text");
  add_common(prepare);

  auto* train = app.add_subcommand("train", "train one task combination");
  train->add_option("--manifest", manifest, "JSONL manifest")->required();
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--tasks", tasks, "task letters, e.g. ACP");
  train->add_option("--mode", mode, "heads | text2text");
  train->add_option("--fold", fold_index, "fold index (leave-one-out)");
  add_common(train);

  auto* sweep = app.add_subcommand("sweep", "run a task-combination sweep");
  sweep->add_option("--manifest", manifest, "JSONL manifest")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--preset", preset, "paper-cm | paper-t5 | all-subsets");
  sweep->add_option("--mode", mode, "heads | text2text");
  add_common(sweep);

  auto* score = app.add_subcommand("score", "ROUGE-score decoded summaries");
  score->add_option("--candidates", candidates, "JSONL of {doc_id, summary}")->required();
  score->add_option("--manifest", manifest, "JSONL manifest with references")->required();

  auto* report = app.add_subcommand("report", "format tables from a results file");
  report->add_option("--results", results_path, "results.json from a sweep")->required();
  report->add_option("--format", format, "md | csv | per-fold");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) apply_config(cfg, read_config_file(config_path));
    if (prepare->parsed()) return cmd_prepare(manifest, out_dir, tasks, mode, cfg);
    if (train->parsed()) return cmd_train(manifest, out_dir, tasks, mode, fold_index, cfg);
    if (sweep->parsed()) return cmd_sweep(manifest, out_dir, preset, mode, cfg);
    if (score->parsed()) return cmd_score(candidates, manifest);
    if (report->parsed()) return cmd_report(results_path, format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
