#include "oto/harness/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "oto/classifier/model.hpp"
#include "oto/core/hash.hpp"
#include "oto/dataset/image.hpp"
#include "oto/dataset/preprocess.hpp"
#include "oto/generator/trainer.hpp"
#include "oto/metrics/classification.hpp"
#include "oto/metrics/human.hpp"
#include "oto/metrics/io.hpp"

namespace oto::harness {

namespace {

using nlohmann::json;

void emit(const Logger& log, const std::string& line) {
  if (log) log(line);
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

void write_json(const fs_path& path, const json& j) { write_file_bytes(path, j.dump(2) + "\n"); }

bool is_image_file(const fs_path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs_path> sorted_entries(const fs_path& dir) {
  std::vector<fs_path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void require_fresh(const fs_path& out_dir, const char* file) {
  if (std::filesystem::exists(out_dir / file)) {
    throw AlreadyExists((out_dir / file).string() + " exists; choose a fresh --out directory");
  }
  std::filesystem::create_directories(out_dir);
}

classifier::LabeledTensors select(const classifier::LabeledTensors& all,
                                  const std::unordered_map<std::string, std::size_t>& index,
                                  const DatasetManifest& part) {
  classifier::LabeledTensors out;
  for (const auto& r : part.records) {
    const auto i = index.at(r.id);
    out.images.push_back(all.images[i]);
    out.labels.push_back(all.labels[i]);
  }
  return out;
}

metrics::PRF score_classifier(const classifier::ClassifierModel& model, const classifier::LabeledTensors& train,
                              const classifier::LabeledTensors& test, classifier::LossMode mode, int knn_k) {
  const auto codes = classifier::predict_codes(model, train, test.images, mode, knn_k);
  return metrics::precision_recall_f1(metrics::confusion(codes, test.labels));
}

classifier::EpochCallback classifier_logger(const Logger& log, const std::string& prefix) {
  if (!log) return {};
  return [log, prefix](const classifier::EpochRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%sepoch %d  triplet %.5f  ce %.5f  total %.5f  val_macro_f1 %.4f",
                  prefix.c_str(), r.epoch, r.triplet_loss, r.ce_loss, r.total_loss, r.val_macro_f1);
    log(buf);
  };
}

RunRecord train_classification(const RunConfig& config, const DatasetManifest& manifest, const fs_path& out_dir,
                               const Logger& log) {
  const auto parts = stratified_split(manifest, {config.split_ratios, config.seed(), true});
  emit(log, "split " + std::to_string(parts.train.size()) + "/" + std::to_string(parts.val.size()) + "/" +
                std::to_string(parts.test.size()));
  const auto train = classifier::load_classifier_tensors(parts.train);
  const auto val = classifier::load_classifier_tensors(parts.val);
  const auto test = classifier::load_classifier_tensors(parts.test);
  const auto result = classifier::train_classifier(train, val, config.classifier, classifier_logger(log, ""));

  RunRecord rec;
  rec.config = config.to_json();
  rec.input_hash = input_hash(config, manifest);
  rec.history_path = out_dir / "history.csv";
  rec.checkpoint_path = out_dir / "checkpoint";
  classifier::write_history_csv(rec.history_path, result.history);
  result.model.save(rec.checkpoint_path);
  rec.report.classification =
      score_classifier(result.model, train, test, config.classifier.loss, config.classifier.knn_k);
  emit(log, "best epoch " + std::to_string(result.best_epoch) + ", test macro F1 " +
                fmt("%.4f", rec.report.classification->macro.f1));
  return rec;
}

RunRecord train_generation(const RunConfig& config, const DatasetManifest& manifest, const fs_path& out_dir,
                           const Logger& log) {
  const auto parts = stratified_split(manifest, {config.split_ratios, config.seed(), true});
  emit(log, "split " + std::to_string(parts.train.size()) + "/" + std::to_string(parts.val.size()) + "/" +
                std::to_string(parts.test.size()));
  const auto train = generator::load_generator_examples(parts.train);
  const auto val = generator::load_generator_examples(parts.val);
  const auto test = generator::load_generator_examples(parts.test);
  generator::GeneratorEpochCallback cb;
  if (log) {
    cb = [&log](const generator::GeneratorEpochRecord& r) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "epoch %d  train_ce %.5f  val_ce %.5f", r.epoch, r.train_loss, r.val_loss);
      log(buf);
    };
  }
  const auto result = generator::train_generator(train, val, config.generator, cb);

  RunRecord rec;
  rec.config = config.to_json();
  rec.input_hash = input_hash(config, manifest);
  rec.history_path = out_dir / "history.csv";
  rec.checkpoint_path = out_dir / "checkpoint";
  generator::write_history_csv(rec.history_path, result.history);
  result.model.save(rec.checkpoint_path);

  std::vector<metrics::TextRecord> hyps, refs;
  std::vector<metrics::SummaryPair> pairs;
  for (const auto& e : test) {
    const auto h = result.model.generate(e.image, e.label, config.decode);
    hyps.push_back({e.id, h});
    refs.push_back({e.id, e.summary});
    pairs.push_back({e.id, h, e.summary});
  }
  metrics::write_text_records(out_dir / "test_hypotheses.tsv", hyps);
  metrics::write_text_records(out_dir / "test_references.tsv", refs);
  const auto embedder = generator_token_embedder(result.model);
  rec.report.summarization = metrics::SummarizationScores{
      metrics::bleu(pairs), metrics::rouge_l_corpus(pairs), metrics::embed_f1_corpus(pairs, embedder),
      static_cast<long>(pairs.size())};
  emit(log, "best epoch " + std::to_string(result.best_epoch) + ", test ROUGE-L " +
                fmt("%.4f", rec.report.summarization->rouge_l));
  return rec;
}

json scores_json(const metrics::ClassScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

DatasetManifest cmd_ingest(const fs_path& image_root, const fs_path& summaries, const fs_path& out_dir,
                           const std::string& source) {
  if (!std::filesystem::is_directory(image_root)) throw IoError("not a directory: " + image_root.string());
  std::map<std::string, std::string> summary_of;
  for (auto& r : metrics::read_text_records(summaries)) summary_of.emplace(r.id, std::move(r.text));
  std::vector<ImageRecord> records;
  for (const auto& dir : sorted_entries(image_root)) {
    if (!std::filesystem::is_directory(dir)) continue;
    const auto label = parse_label(dir.filename().string());
    if (!label) throw ValidationError("directory '" + dir.filename().string() + "' is not a class name");
    for (const auto& file : sorted_entries(dir)) {
      if (!is_image_file(file)) continue;
      ImageRecord r;
      r.id = file.stem().string();
      auto it = summary_of.find(r.id);
      if (it == summary_of.end()) throw ValidationError("image '" + r.id + "' has no summary");
      r.image_path = std::filesystem::absolute(file);
      r.label = *label;
      r.summary = it->second;
      r.source = source;
      records.push_back(std::move(r));
    }
  }
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "manifest.json";
  save_manifest(DatasetManifest::from_records(std::move(records)), path);
  return load_manifest(path);
}

DedupResult cmd_dedup(const fs_path& image_dir, int hamming_threshold, const fs_path& out_dir) {
  if (hamming_threshold < 0 || hamming_threshold > 64) throw InvalidArgument("threshold must be within 0..64");
  auto result = dedup_scan(image_dir, hamming_threshold);
  json j = {{"threshold", hamming_threshold}, {"pairs", json::array()}, {"failures", json::array()}};
  for (const auto& p : result.pairs) {
    j["pairs"].push_back({{"first", p.first.string()}, {"second", p.second.string()}, {"distance", p.distance}});
  }
  for (const auto& f : result.failures) j["failures"].push_back({{"path", f.path.string()}, {"error", f.message}});
  std::filesystem::create_directories(out_dir);
  write_json(out_dir / "duplicates.json", j);
  return result;
}

SplitParts cmd_split(const fs_path& manifest, const SplitSpec& spec, const fs_path& out_dir) {
  auto parts = stratified_split(load_manifest(manifest), spec);
  std::filesystem::create_directories(out_dir);
  save_manifest(parts.train, out_dir / "train.json");
  save_manifest(parts.val, out_dir / "val.json");
  save_manifest(parts.test, out_dir / "test.json");
  return parts;
}

std::vector<Fold> cmd_folds(const fs_path& manifest, int k, std::uint64_t seed, const fs_path& out_dir) {
  auto folds = make_folds(load_manifest(manifest), k, seed);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto dir = out_dir / ("fold" + std::to_string(i + 1));
    std::filesystem::create_directories(dir);
    save_manifest(folds[i].train, dir / "train.json");
    save_manifest(folds[i].test, dir / "test.json");
  }
  return folds;
}

RunRecord cmd_train(const RunConfig& config, const fs_path& out_dir, const Logger& log) {
  config.validate();
  if (config.manifest.empty()) throw ConfigError("field 'manifest' is required");
  require_fresh(out_dir, "run.json");
  const auto manifest = load_manifest(config.manifest);
  write_json(out_dir / "config.json", config.to_json());
  RunRecord rec = config.task == Task::Classification ? train_classification(config, manifest, out_dir, log)
                                                      : train_generation(config, manifest, out_dir, log);
  metrics::write_report(out_dir / "report.json", rec.report);
  write_run_record(out_dir / "run.json", rec);
  return rec;
}

json cmd_train_grid(const json& base, const fs_path& base_dir, const std::vector<GridAxis>& axes,
                    const fs_path& out_dir, const Logger& log) {
  require_fresh(out_dir, "grid.json");
  const auto points = expand_grid(base, axes);
  std::vector<RunConfig> configs;
  for (const auto& p : points) configs.push_back(parse_run_config(p, base_dir));
  json out = {{"axes", json::array()}, {"runs", json::array()}};
  for (const auto& a : axes) out["axes"].push_back({{"key", a.key}, {"values", a.values}});
  for (std::size_t i = 0; i < configs.size(); ++i) {
    json overrides = json::object();
    for (const auto& a : axes) overrides[a.key] = points[i].at(a.key);
    const auto dir = out_dir / ("run_" + std::to_string(i + 1));
    emit(log, "grid point " + std::to_string(i + 1) + "/" + std::to_string(configs.size()) + " " + overrides.dump());
    const auto rec = cmd_train(configs[i], dir, log);
    out["runs"].push_back({{"run", dir.filename().string()}, {"overrides", overrides},
                           {"report", metrics::to_json(rec.report)}});
  }
  write_json(out_dir / "grid.json", out);
  return out;
}

json CrossValReport::to_json() const {
  json rows = json::array();
  for (std::size_t i = 0; i < folds.size(); ++i) {
    auto r = scores_json(folds[i]);
    r["fold"] = static_cast<int>(i + 1);
    rows.push_back(r);
  }
  return {{"k", static_cast<int>(folds.size())}, {"folds", rows}, {"average", scores_json(average)}};
}

CrossValReport aggregate_folds(std::vector<metrics::ClassScores> folds) {
  CrossValReport out;
  out.folds = std::move(folds);
  if (out.folds.empty()) return out;
  for (const auto& f : out.folds) {
    out.average.precision += f.precision;
    out.average.recall += f.recall;
    out.average.f1 += f.f1;
  }
  const double n = static_cast<double>(out.folds.size());
  out.average.precision /= n;
  out.average.recall /= n;
  out.average.f1 /= n;
  return out;
}

CrossValReport cmd_crossval(const RunConfig& config, int k, const fs_path& out_dir, const Logger& log) {
  config.validate();
  if (config.task != Task::Classification) throw ConfigError("crossval supports task classification only");
  if (k < 2) throw ConfigError("k must be >= 2, got " + std::to_string(k));
  if (config.manifest.empty()) throw ConfigError("field 'manifest' is required");
  require_fresh(out_dir, "crossval.json");
  const auto manifest = load_manifest(config.manifest);
  const auto folds = make_folds(manifest, k, config.seed());
  const auto all = classifier::load_classifier_tensors(manifest);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < manifest.size(); ++i) index.emplace(manifest.records[i].id, i);
  const double val_fraction = config.split_ratios[1] / (config.split_ratios[0] + config.split_ratios[1]);

  std::vector<metrics::ClassScores> rows;
  for (int f = 0; f < k; ++f) {
    const auto& fold = folds[static_cast<std::size_t>(f)];
    const auto [fit, held] = holdout_split(fold.train, val_fraction, config.seed());
    const auto train = select(all, index, fit);
    const auto val = select(all, index, held);
    const auto test = select(all, index, fold.test);
    const std::string prefix = "fold " + std::to_string(f + 1) + ": ";
    emit(log, prefix + "train " + std::to_string(train.size()) + ", val " + std::to_string(val.size()) + ", test " +
                  std::to_string(test.size()));
    const auto result = classifier::train_classifier(train, val, config.classifier, classifier_logger(log, prefix));
    const auto dir = out_dir / ("fold" + std::to_string(f + 1));
    std::filesystem::create_directories(dir);
    classifier::write_history_csv(dir / "history.csv", result.history);
    rows.push_back(score_classifier(result.model, train, test, config.classifier.loss, config.classifier.knn_k).macro);
    emit(log, prefix + "test macro F1 " + fmt("%.4f", rows.back().f1));
  }
  auto report = aggregate_folds(std::move(rows));
  auto j = report.to_json();
  j["config"] = config.to_json();
  j["input_hash"] = input_hash(config, manifest);
  write_json(out_dir / "crossval.json", j);
  return report;
}

metrics::MetricsReport cmd_eval_classifier(const fs_path& checkpoint, const fs_path& manifest,
                                           const std::optional<fs_path>& knn_train, int knn_k) {
  const auto model = classifier::ClassifierModel::load(checkpoint);
  const auto data = classifier::load_classifier_tensors(load_manifest(manifest));
  classifier::LabeledTensors reference;
  auto mode = classifier::LossMode::Combined;
  if (knn_train) {
    reference = classifier::load_classifier_tensors(load_manifest(*knn_train));
    mode = classifier::LossMode::Triplet;
  }
  metrics::MetricsReport report;
  report.classification = score_classifier(model, reference, data, mode, knn_k);
  return report;
}

metrics::TokenEmbedder generator_token_embedder(const generator::GeneratorModel& model) {
  const Mat<float>& table = model.params().value(model.params().handle("embed.weight"));
  const auto* vocab = &model.vocab();
  return [table, vocab](const std::string& token) -> Eigen::VectorXd {
    return table.row(vocab->id(token)).cast<double>().transpose();
  };
}

metrics::MetricsReport cmd_eval_summaries(const EvalSummariesInputs& in) {
  const auto refs = metrics::read_text_records(in.references);
  const auto pairs = metrics::pair_records(metrics::read_text_records(in.hypotheses), refs);
  std::vector<metrics::SummaryPair> second;
  if (in.second_hypotheses) second = metrics::pair_records(metrics::read_text_records(*in.second_hypotheses), refs);

  metrics::TokenEmbedder embedder;
  std::optional<generator::GeneratorModel> gen;
  if (in.generator_checkpoint) {
    gen = generator::GeneratorModel::load(*in.generator_checkpoint);
    embedder = generator_token_embedder(*gen);
  } else {
    std::vector<std::string> texts;
    for (const auto& set : {std::cref(pairs), std::cref(second)}) {
      for (const auto& p : set.get()) {
        texts.push_back(p.hypothesis);
        texts.push_back(p.reference);
      }
    }
    embedder = metrics::one_hot_embedder(texts);
  }

  metrics::MetricsReport report;
  report.summarization = metrics::SummarizationScores{metrics::bleu(pairs), metrics::rouge_l_corpus(pairs),
                                                      metrics::embed_f1_corpus(pairs, embedder),
                                                      static_cast<long>(pairs.size())};
  if (in.second_hypotheses) {
    const double r1 = report.summarization->rouge_l;
    const double r2 = metrics::rouge_l_corpus(second);
    report.significance.push_back(
        {"rouge_l", metrics::two_proportion_z(r1, r2, static_cast<long>(pairs.size()), static_cast<long>(second.size()))});
  }
  if (in.ratings || in.faithfulness) {
    if (!in.ratings) throw InvalidArgument("a faithfulness file needs a ratings file");
    metrics::HumanRatings h;
    h.ratings = metrics::read_ratings_csv(*in.ratings);
    if (in.faithfulness) h.faithfulness = metrics::read_faithfulness_csv(*in.faithfulness);
    report.human = metrics::aggregate_human_ratings(h);
  }
  return report;
}

json PipelineResult::to_json() const {
  json probs = json::object();
  for (auto l : kAllLabels) probs[std::string(label_name(l))] = probabilities(code(l));
  return {{"predicted_label", std::string(label_name(predicted))},
          {"label", std::string(label_name(label))},
          {"probabilities", probs},
          {"prompt", prompt},
          {"summary", summary}};
}

PipelineResult cmd_pipeline(const fs_path& image, const fs_path& classifier_checkpoint,
                            const fs_path& generator_checkpoint, std::optional<ClassLabel> label_override,
                            const generator::DecodeConfig& decode) {
  decode.validate();
  const auto cls = classifier::ClassifierModel::load(classifier_checkpoint);
  const auto gen = generator::GeneratorModel::load(generator_checkpoint);
  const auto pixels = read_image(image);
  const auto pred = cls.classify(preprocess_image(pixels, PreprocessMode::Classifier).data);
  PipelineResult out;
  out.predicted = pred.label();
  out.label = label_override.value_or(out.predicted);
  out.probabilities = pred.probabilities;
  out.prompt = generator::render_prompt(out.label, gen.prompt_template());
  out.summary = gen.generate(preprocess_image(pixels, PreprocessMode::Generator).data, out.label, decode);
  return out;
}

namespace {

struct ReportTables {
  std::vector<std::string> classification, summarization, significance, human;
};

std::string num(double v) { return fmt("%.4f", v); }

void add_metrics(ReportTables& t, const std::string& source, const json& r) {
  if (r.contains("classification")) {
    const auto& m = r["classification"]["macro"];
    t.classification.push_back("| " + source + " | " + num(m["precision"]) + " | " + num(m["recall"]) + " | " +
                               num(m["f1"]) + " |");
  }
  if (r.contains("summarization")) {
    const auto& s = r["summarization"];
    t.summarization.push_back("| " + source + " | " + num(s["bleu"]) + " | " + num(s["rouge_l"]) + " | " +
                              num(s["embed_f1"]) + " | " + std::to_string(s["pairs"].get<long>()) + " |");
  }
  if (r.contains("significance")) {
    for (const auto& s : r["significance"]) {
      t.significance.push_back("| " + source + " | " + s["name"].get<std::string>() + " | " + num(s["p1"]) + " | " +
                               num(s["p2"]) + " | " + fmt("%.3f", s["z"]) + " | " + fmt("%.3g", s["p_two_tailed"]) +
                               " |");
    }
  }
  if (r.contains("human")) {
    const auto& h = r["human"];
    const std::string faith =
        h.contains("faithfulness_percent") ? fmt("%.1f%%", h["faithfulness_percent"].get<double>()) : "-";
    t.human.push_back("| " + source + " | " + fmt("%.2f", h["mean_rating"]) + " | " + faith + " |");
  }
}

void section(std::ostringstream& os, const char* title, const char* header, const char* rule,
             const std::vector<std::string>& rows) {
  if (rows.empty()) return;
  os << "## " << title << "\n\n" << header << "\n" << rule << "\n";
  for (const auto& r : rows) os << r << "\n";
  os << "\n";
}

}  // namespace

std::string cmd_report(const std::vector<fs_path>& inputs) {
  if (inputs.empty()) throw InvalidArgument("report needs at least one input file");
  ReportTables t;
  for (const auto& path : inputs) {
    const auto j = read_json_file(path);
    const std::string source = path.parent_path().filename().empty() ? path.filename().string()
                                                                      : path.parent_path().filename().string();
    if (j.contains("folds") && j.contains("average")) {
      for (const auto& f : j["folds"]) {
        t.classification.push_back("| " + source + " fold " + std::to_string(f["fold"].get<int>()) + " | " +
                                   num(f["precision"]) + " | " + num(f["recall"]) + " | " + num(f["f1"]) + " |");
      }
      const auto& a = j["average"];
      t.classification.push_back("| " + source + " average | " + num(a["precision"]) + " | " + num(a["recall"]) +
                                 " | " + num(a["f1"]) + " |");
    } else if (j.contains("report")) {
      add_metrics(t, source, j["report"]);
    } else if (j.is_object()) {
      add_metrics(t, source, j);
    } else {
      throw ParseError(path.string() + ": not a report document");
    }
  }
  std::ostringstream os;
  section(os, "Classification", "| model | precision | recall | F1 |", "|---|---|---|---|", t.classification);
  section(os, "Summarization", "| model | BLEU | ROUGE-L | embed-F1 | pairs |", "|---|---|---|---|---|",
          t.summarization);
  section(os, "Significance", "| model | metric | p1 | p2 | z | p (two-tailed) |", "|---|---|---|---|---|---|",
          t.significance);
  section(os, "Human evaluation", "| model | mean rating | faithfulness |", "|---|---|---|", t.human);
  return os.str();
}

}  // namespace oto::harness
