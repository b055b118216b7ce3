#include "support.hpp"

#include <cstdlib>
#include <memory>

#include "oto/classifier/trainer.hpp"
#include "oto/core/hash.hpp"
#include "oto/dataset/synthetic.hpp"
#include "oto/generator/trainer.hpp"

namespace oto::test {

fs::path fixture(const std::string& name) { return fs::path(OTO_FIXTURE_DIR) / name; }

nlohmann::json fixture_json(const std::string& name) { return nlohmann::json::parse(read_file_bytes(fixture(name))); }

std::string slurp(const fs::path& path) { return read_file_bytes(path); }

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "oto-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw IoError("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

DatasetManifest fake_manifest(int per_class, const std::string& prefix) {
  std::vector<ImageRecord> records;
  for (auto label : kAllLabels) {
    for (int i = 0; i < per_class; ++i) {
      ImageRecord r;
      r.id = prefix + std::to_string(code(label)) + "_" + std::to_string(i);
      r.image_path = "/nonexistent/" + r.id + ".png";
      r.label = label;
      r.summary = "summary";
      r.source = "test";
      records.push_back(std::move(r));
    }
  }
  return DatasetManifest::from_records(std::move(records));
}

DatasetManifest write_tiny_dataset(const fs::path& dir, int per_class, int size, std::uint64_t seed) {
  SyntheticOptions opt;
  opt.per_class = per_class;
  opt.image_size = size;
  opt.seed = seed;
  return make_synthetic_dataset(dir, opt);
}

classifier::ResNetConfig tiny_resnet() {
  classifier::ResNetConfig c;
  c.stem_channels = 4;
  c.widths = {4, 4, 8, 8};
  c.blocks_per_stage = 1;
  c.embedding_dim = 8;
  return c;
}

generator::GeneratorConfig tiny_generator() {
  generator::GeneratorConfig c;
  c.image_widths = {4, 4, 4};
  c.image_dim = 16;
  c.d_model = 16;
  c.heads = 2;
  c.ff_dim = 32;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  return c;
}

namespace {

struct TinyModelStore {
  TempDir dir;
  TinyModels models;

  TinyModelStore() {
    const auto manifest = write_tiny_dataset(dir / "data", 4);
    models.manifest = dir / "data" / "manifest.json";
    models.sample_png = manifest.records.front().image_path;

    classifier::ClassifierTrainConfig cc;
    cc.epochs = 3;
    cc.batch_size = 8;
    cc.model = tiny_resnet();
    const auto tensors = classifier::load_classifier_tensors(manifest);
    classifier::train_classifier(tensors, {}, cc).model.save(dir / "classifier");
    models.classifier = dir / "classifier";

    generator::GeneratorTrainConfig gc;
    gc.epochs = 15;
    gc.batch_size = 4;
    gc.learning_rate = 3e-3;
    gc.model = tiny_generator();
    const auto examples = generator::load_generator_examples(manifest);
    generator::train_generator(examples, {}, gc).model.save(dir / "generator");
    models.generator = dir / "generator";
  }
};

}  // namespace

const TinyModels& tiny_models() {
  static const auto store = std::make_unique<TinyModelStore>();
  return store->models;
}

}  // namespace oto::test
