#include <gtest/gtest.h>

#include <sys/wait.h>

#include <sstream>

#include "oto/core/hash.hpp"
#include "oto/harness/commands.hpp"
#include "oto/harness/config.hpp"
#include "oto/harness/gradcheck.hpp"
#include "oto/harness/run_record.hpp"
#include "oto/metrics/io.hpp"
#include "support.hpp"

using namespace oto;
using namespace oto::harness;
using nlohmann::json;

namespace {

json tiny_classification(const std::filesystem::path& manifest) {
  return {{"task", "classification"}, {"manifest", manifest.string()}, {"epochs", 2},     {"batch_size", 8},
          {"stem_channels", 4},       {"widths", {4, 4, 8, 8}},        {"blocks_per_stage", 1}, {"embedding_dim", 8},
          {"seed", 5}, {"split_ratios", {0.6, 0.2, 0.2}}};
}

json tiny_generation(const std::filesystem::path& manifest) {
  return {{"task", "generation"}, {"manifest", manifest.string()}, {"epochs", 2},   {"batch_size", 4},
          {"learning_rate", 3e-3}, {"image_widths", {4, 4, 4}},    {"image_dim", 16}, {"d_model", 16},
          {"heads", 2},           {"ff_dim", 32},                   {"encoder_layers", 1}, {"decoder_layers", 1},
          {"max_length", 24},     {"seed", 5}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OTO_CLI) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error(const json& doc) {
  try {
    parse_run_config(doc).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsPerTask) {
  const auto c = RunConfig::defaults(Task::Classification);
  EXPECT_EQ(c.split_ratios, (std::array<double, 3>{0.70, 0.15, 0.15}));
  EXPECT_EQ(c.classifier.epochs, 100);
  EXPECT_EQ(c.classifier.batch_size, 32);
  EXPECT_EQ(c.classifier.learning_rate, 1e-3);
  EXPECT_EQ(c.classifier.margin, 0.2);
  const auto g = RunConfig::defaults(Task::Generation);
  EXPECT_EQ(g.split_ratios, (std::array<double, 3>{0.60, 0.20, 0.20}));
  EXPECT_EQ(g.generator.epochs, 50);
  EXPECT_EQ(g.generator.batch_size, 8);
  EXPECT_EQ(g.generator.learning_rate, 3e-5);
  EXPECT_EQ(parse_run_config(json{{"task", "generation"}}).split_ratios, g.split_ratios);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error({{"task", "classification"}, {"split_ratios", {0.7, 0.3, 0.1}}}).find("split_ratios"),
            std::string::npos);
  EXPECT_NE(config_error({{"task", "classification"}, {"epoch", 3}}).find("epoch"), std::string::npos);
  EXPECT_NE(config_error({{"task", "classification"}, {"d_model", 8}}).find("d_model"), std::string::npos);
  EXPECT_NE(config_error({{"task", "classification"}, {"batch_size", -1}}).find("batch_size"), std::string::npos);
  EXPECT_NE(config_error({{"task", "regression"}}).find("task"), std::string::npos);
  EXPECT_THROW(parse_run_config_text("{oops"), ConfigError);
}

TEST(Config, RoundTripThroughJson) {
  auto doc = tiny_generation("/data/m.json");
  const auto c = parse_run_config(doc);
  EXPECT_EQ(c.generator.model.d_model, 16);
  EXPECT_EQ(c.decode.max_length, 24);
  const auto again = parse_run_config(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(Config, RelativeManifestResolvedAgainstConfigDir) {
  const auto c = parse_run_config(json{{"task", "classification"}, {"manifest", "data/m.json"}}, "/cfg");
  EXPECT_EQ(c.manifest, std::filesystem::path("/cfg/data/m.json"));
}

TEST(Grid, CartesianExpansion) {
  const auto a = parse_grid_axis("learning_rate=0.001,0.0001");
  EXPECT_EQ(a.key, "learning_rate");
  ASSERT_EQ(a.values.size(), 2u);
  EXPECT_EQ(a.values[1], 0.0001);
  const auto b = parse_grid_axis("loss=combined,cross_entropy");
  EXPECT_EQ(b.values[0], "combined");
  const auto runs = expand_grid({{"task", "classification"}}, {a, b});
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(runs[0]["learning_rate"], 0.001);
  EXPECT_EQ(runs[0]["loss"], "combined");
  EXPECT_EQ(runs[1]["loss"], "cross_entropy");
  EXPECT_EQ(runs[2]["learning_rate"], 0.0001);
  EXPECT_THROW(parse_grid_axis("novalues"), ConfigError);
}

TEST(Crossval, AverageIsMeanAndOrderStable) {
  std::vector<metrics::ClassScores> rows{{0.9, 0.8, 0.85}, {1.0, 0.7, 0.82}, {0.6, 0.95, 0.74}, {0.8, 0.8, 0.8}};
  const auto a = aggregate_folds(rows);
  EXPECT_NEAR(a.average.precision, (0.9 + 1.0 + 0.6 + 0.8) / 4, 1e-9);
  EXPECT_NEAR(a.average.f1, (0.85 + 0.82 + 0.74 + 0.8) / 4, 1e-9);
  std::reverse(rows.begin(), rows.end());
  const auto b = aggregate_folds(rows);
  EXPECT_NEAR(a.average.recall, b.average.recall, 1e-12);
  const auto j = aggregate_folds({{1, 1, 1}, {0, 0, 0}}).to_json();
  EXPECT_EQ(j["k"], 2);
  EXPECT_EQ(j["folds"].size(), 2u);
  EXPECT_EQ(j["average"]["f1"], 0.5);
}

TEST(Gradcheck, AllRowsPassAndDeterministic) {
  const auto rows = run_gradchecks();
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(all_pass(rows));
  for (const auto& r : rows) EXPECT_LT(r.max_rel_error, 1e-4) << r.loss;
  std::ostringstream a, b;
  print_gradcheck_table(a, rows, 1e-4);
  print_gradcheck_table(b, run_gradchecks(), 1e-4);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Gradcheck, BrokenGradientFails) {
  GradCheckSettings s;
  s.fault_scale = 1.01;
  const auto rows = run_gradchecks(s);
  EXPECT_FALSE(all_pass(rows));
  for (const auto& r : rows) EXPECT_FALSE(r.pass) << r.loss;
}

TEST(EvalSummaries, FixtureReproducesOracle) {
  EvalSummariesInputs in;
  in.hypotheses = test::fixture("hyps.tsv");
  in.references = test::fixture("refs.tsv");
  const auto r = cmd_eval_summaries(in);
  const auto o = test::fixture_json("summaries_oracle.json");
  ASSERT_TRUE(r.summarization.has_value());
  EXPECT_NEAR(r.summarization->bleu, o["bleu"].get<double>(), 1e-12);
  EXPECT_NEAR(r.summarization->rouge_l, o["rouge_l"].get<double>(), 1e-12);
  EXPECT_NEAR(r.summarization->embed_f1, o["embed_f1_one_hot"].get<double>(), 1e-12);
  EXPECT_EQ(r.summarization->pairs, o["pairs"].get<long>());
  EXPECT_EQ(metrics::render_report(r), metrics::render_report(cmd_eval_summaries(in)));
}

TEST(EvalSummaries, IdenticalTextsScoreOne) {
  test::TempDir dir;
  auto records = metrics::read_text_records(test::fixture("refs.tsv"));
  records.pop_back();
  metrics::write_text_records(dir / "same.tsv", records);
  EvalSummariesInputs in;
  in.hypotheses = dir / "same.tsv";
  in.references = dir / "same.tsv";
  const auto r = cmd_eval_summaries(in);
  EXPECT_NEAR(r.summarization->bleu, 1.0, 1e-12);
  EXPECT_NEAR(r.summarization->rouge_l, 1.0, 1e-12);
  EXPECT_NEAR(r.summarization->embed_f1, 1.0, 1e-12);
}

TEST(EvalSummaries, SegmentShorterThanMaxOrderCapsBleu) {
  // a 3-token segment contributes an unmatched 4-gram slot
  EvalSummariesInputs in;
  in.hypotheses = test::fixture("refs.tsv");
  in.references = test::fixture("refs.tsv");
  const auto r = cmd_eval_summaries(in);
  EXPECT_LT(r.summarization->bleu, 1.0);
  EXPECT_GT(r.summarization->bleu, 0.99);
  EXPECT_NEAR(r.summarization->rouge_l, 1.0, 1e-12);
}

TEST(EvalSummaries, SignificanceAndHumanRatings) {
  EvalSummariesInputs in;
  in.hypotheses = test::fixture("hyps.tsv");
  in.references = test::fixture("refs.tsv");
  in.second_hypotheses = test::fixture("hyps2.tsv");
  in.ratings = test::fixture("ratings.csv");
  in.faithfulness = test::fixture("faithfulness.csv");
  const auto r = cmd_eval_summaries(in);
  ASSERT_EQ(r.significance.size(), 1u);
  EXPECT_EQ(r.significance[0].name, "rouge_l");
  EXPECT_EQ(r.significance[0].result.n1, 4);
  ASSERT_TRUE(r.human.has_value());
  EXPECT_NEAR(r.human->mean_rating, 2.4, 1e-12);
  EXPECT_NEAR(*r.human->faithfulness_percent, 92.0, 1e-12);
}

TEST(EvalSummaries, MissingReferenceListsIds) {
  EvalSummariesInputs in;
  in.hypotheses = test::fixture("refs.tsv");
  in.references = test::fixture("hyps.tsv");
  try {
    cmd_eval_summaries(in);
    FAIL();
  } catch (const MissingReference& e) {
    EXPECT_NE(std::string(e.what()).find("s5"), std::string::npos);
  }
}

TEST(Commands, IngestSplitFolds) {
  test::TempDir dir;
  const auto m = test::write_tiny_dataset(dir / "synth", 7, 24);
  std::vector<metrics::TextRecord> summaries;
  for (const auto& r : m.records) {
    const auto dst = dir / "raw" / std::string(label_name(r.label)) / r.image_path.filename().string();
    std::filesystem::create_directories(dst.parent_path());
    std::filesystem::copy_file(r.image_path, dst);
    summaries.push_back({r.id, r.summary});
  }
  metrics::write_text_records(dir / "summaries.tsv", summaries);
  const auto ingested = cmd_ingest(dir / "raw", dir / "summaries.tsv", dir / "ingest");
  EXPECT_EQ(ingested.size(), 35u);
  for (auto l : kAllLabels) EXPECT_EQ(ingested.count(l), 7u);

  const auto parts = cmd_split(dir / "ingest" / "manifest.json", SplitSpec{}, dir / "split");
  EXPECT_EQ(parts.train.size() + parts.val.size() + parts.test.size(), 35u);
  EXPECT_EQ(load_manifest(dir / "split" / "test.json").records, parts.test.records);
  const auto folds = cmd_folds(dir / "ingest" / "manifest.json", 3, 1, dir / "folds");
  EXPECT_EQ(folds.size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir / "folds" / "fold3" / "test.json"));

  const auto dup = cmd_dedup(dir / "raw" / "Normal", 0, dir / "dedup");
  EXPECT_TRUE(dup.pairs.empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "dedup" / "duplicates.json"));
}

TEST(Commands, TrainClassifierRecordAndDeterminism) {
  test::TempDir dir;
  test::write_tiny_dataset(dir / "data", 5);
  const auto cfg = parse_run_config(tiny_classification(dir / "data" / "manifest.json"));
  const auto rec = cmd_train(cfg, dir / "a");
  cmd_train(cfg, dir / "b");
  EXPECT_TRUE(rec.report.classification.has_value());
  EXPECT_EQ(test::slurp(dir / "a" / "history.csv"), test::slurp(dir / "b" / "history.csv"));
  EXPECT_EQ(git_blob_hash(test::slurp(dir / "a" / "report.json")), git_blob_hash(test::slurp(dir / "b" / "report.json")));
  std::istringstream lines(test::slurp(dir / "a" / "history.csv"));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 1 + 2);
  const auto run = read_json_file(dir / "a" / "run.json");
  EXPECT_EQ(run["input_hash"], rec.input_hash);
  EXPECT_EQ(rec.input_hash.size(), 40u);
  EXPECT_THROW(cmd_train(cfg, dir / "a"), AlreadyExists);

  const auto eval = cmd_eval_classifier(dir / "a" / "checkpoint", dir / "data" / "manifest.json");
  EXPECT_TRUE(eval.classification.has_value());
  EXPECT_NE(cmd_report({dir / "a" / "run.json"}).find("Classification"), std::string::npos);
}

TEST(Commands, TrainGeneratorWritesTestSummaries) {
  test::TempDir dir;
  test::write_tiny_dataset(dir / "data", 5);
  const auto cfg = parse_run_config(tiny_generation(dir / "data" / "manifest.json"));
  const auto rec = cmd_train(cfg, dir / "g");
  ASSERT_TRUE(rec.report.summarization.has_value());
  EXPECT_EQ(rec.report.summarization->pairs, 5);
  EXPECT_EQ(metrics::read_text_records(dir / "g" / "test_hypotheses.tsv").size(), 5u);
}

TEST(Commands, GridWritesOneRunPerCombination) {
  test::TempDir dir;
  test::write_tiny_dataset(dir / "data", 5, 24);
  auto base = tiny_classification(dir / "data" / "manifest.json");
  base["epochs"] = 1;
  const auto grid = cmd_train_grid(base, dir.path(), {parse_grid_axis("margin=0.2,0.5")}, dir / "grid");
  EXPECT_EQ(grid["runs"].size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "grid" / "run_2" / "run.json"));
}

TEST(Commands, CrossvalSmall) {
  test::TempDir dir;
  test::write_tiny_dataset(dir / "data", 10, 24);
  auto doc = tiny_classification(dir / "data" / "manifest.json");
  doc["epochs"] = 1;
  const auto cfg = parse_run_config(doc);
  const auto r = cmd_crossval(cfg, 2, dir / "cv");
  ASSERT_EQ(r.folds.size(), 2u);
  EXPECT_NEAR(r.average.f1, (r.folds[0].f1 + r.folds[1].f1) / 2, 1e-9);
  const auto j = read_json_file(dir / "cv" / "crossval.json");
  EXPECT_EQ(j["folds"].size(), 2u);
  EXPECT_NE(cmd_report({dir / "cv" / "crossval.json"}).find("fold"), std::string::npos);
  auto gen = parse_run_config(tiny_generation(dir / "data" / "manifest.json"));
  EXPECT_THROW(cmd_crossval(gen, 2, dir / "cv2"), ConfigError);
}

TEST(Commands, PipelineContract) {
  const auto& m = test::tiny_models();
  const auto r = cmd_pipeline(m.sample_png, m.classifier, m.generator, std::nullopt, generator::DecodeConfig::greedy(40));
  EXPECT_NEAR(r.probabilities.sum(), 1.0, 1e-6);
  EXPECT_EQ(r.label, r.predicted);
  EXPECT_FALSE(r.summary.empty());
  const auto forced =
      cmd_pipeline(m.sample_png, m.classifier, m.generator, ClassLabel::Normal, generator::DecodeConfig::greedy(40));
  EXPECT_NE(forced.prompt.find("Normal"), std::string::npos);
  EXPECT_EQ(forced.to_json()["label"], "Normal");
  test::TempDir dir;
  write_file_bytes(dir / "bad.png", "not a png");
  EXPECT_THROW(cmd_pipeline(dir / "bad.png", m.classifier, m.generator), DecodeError);
}

TEST(Cli, ExitCodes) {
  test::TempDir dir;
  EXPECT_EQ(run_cli("gradcheck"), 0);
  EXPECT_EQ(run_cli("gradcheck --fault-scale 1.01"), 2);
  EXPECT_EQ(run_cli("no-such-verb"), 1);
  write_file_bytes(dir / "bad.json", R"({"task": "classification", "split_ratios": [0.7, 0.3, 0.1]})");
  EXPECT_EQ(run_cli("train --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 1);
  EXPECT_EQ(run_cli("eval-summaries --hyps " + test::fixture("hyps.tsv").string() + " --refs " +
                    test::fixture("refs.tsv").string()),
            0);
  const auto& m = test::tiny_models();
  write_file_bytes(dir / "bad.png", "garbage");
  EXPECT_EQ(run_cli("pipeline --image " + (dir / "bad.png").string() + " --classifier " + m.classifier.string() +
                    " --generator " + m.generator.string()),
            1);
  EXPECT_EQ(run_cli("pipeline --image " + m.sample_png.string() + " --classifier " + (dir / "none").string() +
                    " --generator " + m.generator.string()),
            2);
  EXPECT_EQ(run_cli("serve --port 0 --classifier " + (dir / "none").string() + " --generator " + m.generator.string()),
            2);
}
