#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oto/core/error.hpp"
#include "oto/core/hash.hpp"
#include "oto/harness/commands.hpp"
#include "oto/harness/gradcheck.hpp"
#include "oto/metrics/report.hpp"
#include "oto/service/service.hpp"

namespace fs = std::filesystem;
using namespace oto;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

oto::service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

harness::Logger stderr_logger(bool quiet) {
  if (quiet) return {};
  return [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
}

std::optional<ClassLabel> parse_label_option(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto l = parse_label(s);
  if (!l) throw ValidationError("unknown label '" + s + "'");
  return l;
}

void print_report(const metrics::MetricsReport& report, const fs::path& out, const char* file) {
  const auto text = metrics::render_report(report);
  if (!out.empty()) write_file_bytes(out / file, text);
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Otoscopic image classification and summary generation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress lines on stderr");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build and validate a manifest from class directories");
  fs::path ingest_images, ingest_summaries, ingest_out;
  std::string ingest_source = "ingest";
  ingest->add_option("--images", ingest_images, "Root with one sub-directory per class")->required();
  ingest->add_option("--summaries", ingest_summaries, "id<TAB>summary file")->required();
  ingest->add_option("--source", ingest_source, "Origin string stored on each record");
  ingest->add_option("--out", ingest_out, "Output directory")->required();

  // dedup
  auto* dedup = app.add_subcommand("dedup", "Report near-duplicate images by difference hash");
  fs::path dedup_images, dedup_out;
  int dedup_threshold = kDefaultDedupThreshold;
  dedup->add_option("--images", dedup_images, "Image directory")->required();
  dedup->add_option("--threshold", dedup_threshold, "Maximum Hamming distance")->capture_default_str();
  dedup->add_option("--out", dedup_out, "Output directory")->required();

  // split
  auto* split = app.add_subcommand("split", "Stratified train/val/test split of a manifest");
  fs::path split_manifest, split_out;
  std::vector<double> split_ratios{0.70, 0.15, 0.15};
  std::uint64_t split_seed = 0;
  split->add_option("--manifest", split_manifest, "Manifest JSON")->required();
  split->add_option("--ratios", split_ratios, "Train, val and test fractions")->expected(3)->delimiter(',')
      ->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split->add_option("--out", split_out, "Output directory")->required();

  // folds
  auto* folds = app.add_subcommand("folds", "Stratified k-fold partition of a manifest");
  fs::path folds_manifest, folds_out;
  int folds_k = 5;
  std::uint64_t folds_seed = 0;
  folds->add_option("--manifest", folds_manifest, "Manifest JSON")->required();
  folds->add_option("-k,--k", folds_k, "Number of folds")->capture_default_str();
  folds->add_option("--seed", folds_seed, "Shuffle seed")->capture_default_str();
  folds->add_option("--out", folds_out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a classifier or generator from a run config");
  fs::path train_config, train_out;
  std::vector<std::string> train_grid;
  train->add_option("--config", train_config, "Run config JSON")->required();
  train->add_option("--grid", train_grid, "key=v1,v2 axis; repeatable for a cartesian grid");
  train->add_option("--out", train_out, "Output directory")->required();

  // crossval
  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation of the classifier");
  fs::path cv_config, cv_out;
  int cv_k = 0;
  crossval->add_option("--config", cv_config, "Run config JSON")->required();
  crossval->add_option("-k,--k", cv_k, "Number of folds (default: the config's folds)");
  crossval->add_option("--out", cv_out, "Output directory")->required();

  // eval-classifier
  auto* eval_cls = app.add_subcommand("eval-classifier", "Macro precision/recall/F1 of a classifier checkpoint");
  fs::path ec_checkpoint, ec_manifest, ec_out;
  std::optional<fs::path> ec_knn_train;
  int ec_k = 5;
  eval_cls->add_option("--checkpoint", ec_checkpoint, "Classifier checkpoint directory")->required();
  eval_cls->add_option("--manifest", ec_manifest, "Manifest to score")->required();
  eval_cls->add_option("--knn-train", ec_knn_train, "Score k-NN over this manifest's embeddings instead of the head");
  eval_cls->add_option("--knn-k", ec_k, "Neighbours for --knn-train")->capture_default_str();
  eval_cls->add_option("--out", ec_out, "Output directory");

  // eval-summaries
  auto* eval_sum = app.add_subcommand("eval-summaries", "Score hypothesis summaries against references");
  harness::EvalSummariesInputs es;
  fs::path es_out;
  eval_sum->add_option("--hyps", es.hypotheses, "id<TAB>text hypotheses")->required();
  eval_sum->add_option("--refs", es.references, "id<TAB>text references")->required();
  eval_sum->add_option("--hyps2", es.second_hypotheses, "Second system for the ROUGE-L z-test");
  eval_sum->add_option("--ratings", es.ratings, "CSV sample_id,annotator_id,rating");
  eval_sum->add_option("--faithfulness", es.faithfulness, "CSV sample_id,error_free");
  eval_sum->add_option("--generator", es.generator_checkpoint, "Generator checkpoint whose token table embeds tokens");
  eval_sum->add_option("--out", es_out, "Output directory");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Classify one image, then generate its summary");
  fs::path pl_image, pl_cls, pl_gen, pl_out;
  std::string pl_label;
  generator::DecodeConfig pl_decode;
  pipeline->add_option("--image", pl_image, "PNG or JPEG file")->required();
  pipeline->add_option("--classifier", pl_cls, "Classifier checkpoint directory")->required();
  pipeline->add_option("--generator", pl_gen, "Generator checkpoint directory")->required();
  pipeline->add_option("--label", pl_label, "Force this class into the prompt");
  pipeline->add_option("--beam-width", pl_decode.beam_width, "1 = greedy")->capture_default_str();
  pipeline->add_option("--max-length", pl_decode.max_length, "Token limit including EOS")->capture_default_str();
  pipeline->add_option("--length-penalty", pl_decode.length_penalty, "Beam length exponent")->capture_default_str();
  pipeline->add_option("--out", pl_out, "Output directory");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every training loss");
  harness::GradCheckSettings gc;
  fs::path gc_out;
  gradcheck->add_option("--fault-scale", gc.fault_scale, "Scale analytic gradients (negative control)")
      ->group("");
  gradcheck->add_option("--out", gc_out, "Output directory");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP inference service");
  service::ServiceConfig sc;
  serve->add_option("--classifier", sc.classifier_checkpoint, "Classifier checkpoint directory")->required();
  serve->add_option("--generator", sc.generator_checkpoint, "Generator checkpoint directory")->required();
  serve->add_option("--host", sc.host, "Bind address")->capture_default_str();
  serve->add_option("--port", sc.port, "Port (0 = any free port)")->capture_default_str();
  serve->add_option("--max-body", sc.max_body_bytes, "Request body limit in bytes")->capture_default_str();
  serve->add_option("--timeout", sc.timeout_seconds, "Read/write timeout in seconds")->capture_default_str();
  serve->add_option("--beam-width", sc.decode.beam_width, "1 = greedy")->capture_default_str();
  serve->add_option("--max-length", sc.decode.max_length, "Token limit including EOS")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Render run, report and crossval JSON files as tables");
  std::vector<fs::path> rp_inputs;
  fs::path rp_out;
  report->add_option("inputs", rp_inputs, "run.json, report.json or crossval.json files")->required();
  report->add_option("--out", rp_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const auto log = stderr_logger(quiet);
  try {
    if (*ingest) {
      const auto m = harness::cmd_ingest(ingest_images, ingest_summaries, ingest_out, ingest_source);
      std::cout << "manifest " << (ingest_out / "manifest.json").string() << ": " << m.size() << " records\n";
      for (auto l : kAllLabels) std::cout << "  " << label_name(l) << " " << m.count(l) << "\n";
    } else if (*dedup) {
      const auto r = harness::cmd_dedup(dedup_images, dedup_threshold, dedup_out);
      for (const auto& p : r.pairs) std::cout << p.distance << "\t" << p.first.string() << "\t" << p.second.string() << "\n";
      for (const auto& f : r.failures) std::cerr << "skipped " << f.path.string() << ": " << f.message << "\n";
      std::cout << r.pairs.size() << " pair(s) within distance " << dedup_threshold << "\n";
    } else if (*split) {
      SplitSpec spec;
      spec.ratios = {split_ratios[0], split_ratios[1], split_ratios[2]};
      spec.seed = split_seed;
      const auto p = harness::cmd_split(split_manifest, spec, split_out);
      std::cout << "train " << p.train.size() << ", val " << p.val.size() << ", test " << p.test.size() << "\n";
    } else if (*folds) {
      const auto f = harness::cmd_folds(folds_manifest, folds_k, folds_seed, folds_out);
      for (std::size_t i = 0; i < f.size(); ++i) {
        std::cout << "fold " << i + 1 << ": train " << f[i].train.size() << ", test " << f[i].test.size() << "\n";
      }
    } else if (*train) {
      if (train_grid.empty()) {
        const auto rec = harness::cmd_train(harness::load_run_config(train_config), train_out, log);
        std::cout << metrics::render_report(rec.report);
      } else {
        std::vector<harness::GridAxis> axes;
        for (const auto& g : train_grid) axes.push_back(harness::parse_grid_axis(g));
        const auto base = harness::read_json_file(train_config);
        std::cout << harness::cmd_train_grid(base, train_config.parent_path(), axes, train_out, log).dump(2) << "\n";
      }
    } else if (*crossval) {
      const auto cfg = harness::load_run_config(cv_config);
      const auto r = harness::cmd_crossval(cfg, cv_k > 0 ? cv_k : cfg.folds, cv_out, log);
      std::cout << harness::cmd_report({cv_out / "crossval.json"});
    } else if (*eval_cls) {
      print_report(harness::cmd_eval_classifier(ec_checkpoint, ec_manifest, ec_knn_train, ec_k), ec_out,
                   "report.json");
    } else if (*eval_sum) {
      print_report(harness::cmd_eval_summaries(es), es_out, "report.json");
    } else if (*pipeline) {
      const auto r = harness::cmd_pipeline(pl_image, pl_cls, pl_gen, parse_label_option(pl_label), pl_decode);
      const auto text = r.to_json().dump(2) + "\n";
      if (!pl_out.empty()) write_file_bytes(pl_out / "pipeline.json", text);
      std::cout << text;
    } else if (*gradcheck) {
      const auto rows = harness::run_gradchecks(gc);
      std::ostringstream table;
      harness::print_gradcheck_table(table, rows, gc.tolerance);
      if (!gc_out.empty()) write_file_bytes(gc_out / "gradcheck.txt", table.str());
      std::cout << table.str();
      return harness::all_pass(rows) ? 0 : kExitRuntime;
    } else if (*serve) {
      const service::InferenceService svc(sc);
      service::HttpServer server(svc);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << sc.host << ":" << port << "\n";
      server.listen();
      g_server = nullptr;
    } else if (*report) {
      const auto text = harness::cmd_report(rp_inputs);
      if (!rp_out.empty()) write_file_bytes(rp_out / "report.md", text);
      std::cout << text;
    }
  } catch (const oto::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
