#include "oto/harness/config.hpp"

#include <functional>
#include <map>

#include "oto/core/hash.hpp"
#include "oto/core/text.hpp"
#include "oto/dataset/split.hpp"

namespace oto::harness {

namespace {

using nlohmann::json;

enum class Scope { Both, Classification, Generation };

struct Key {
  Scope scope;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

template <class T>
T typed(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
      if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "' has the wrong type: " + v.dump());
  }
}

int& ep(RunConfig& c) { return c.task == Task::Classification ? c.classifier.epochs : c.generator.epochs; }
int& bs(RunConfig& c) { return c.task == Task::Classification ? c.classifier.batch_size : c.generator.batch_size; }
double& lr(RunConfig& c) {
  return c.task == Task::Classification ? c.classifier.learning_rate : c.generator.learning_rate;
}
std::uint64_t& sd(RunConfig& c) { return c.task == Task::Classification ? c.classifier.seed : c.generator.seed; }

#define OTO_KEY(scope, name, type, expr) \
  {#name, {Scope::scope, [](RunConfig& c, const json& v) { expr = typed<type>(v, #name); }, [](const RunConfig& c) { return json(expr); }}}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = {
      {"task", {Scope::Both, [](RunConfig&, const json&) {}, [](const RunConfig& c) { return json(to_string(c.task)); }}},
      {"manifest",
       {Scope::Both, [](RunConfig& c, const json& v) { c.manifest = typed<std::string>(v, "manifest"); },
        [](const RunConfig& c) { return json(c.manifest.string()); }}},
      {"split_ratios",
       {Scope::Both,
        [](RunConfig& c, const json& v) {
          if (!v.is_array() || v.size() != 3) throw ConfigError("field 'split_ratios' must be an array of 3 numbers");
          for (int i = 0; i < 3; ++i) c.split_ratios[i] = typed<double>(v[i], "split_ratios");
        },
        [](const RunConfig& c) { return json(c.split_ratios); }}},
      {"epochs",
       {Scope::Both, [](RunConfig& c, const json& v) { ep(c) = typed<int>(v, "epochs"); },
        [](const RunConfig& c) { return json(c.epochs()); }}},
      {"batch_size",
       {Scope::Both, [](RunConfig& c, const json& v) { bs(c) = typed<int>(v, "batch_size"); },
        [](const RunConfig& c) { return json(bs(const_cast<RunConfig&>(c))); }}},
      {"learning_rate",
       {Scope::Both, [](RunConfig& c, const json& v) { lr(c) = typed<double>(v, "learning_rate"); },
        [](const RunConfig& c) { return json(lr(const_cast<RunConfig&>(c))); }}},
      {"seed",
       {Scope::Both, [](RunConfig& c, const json& v) { sd(c) = typed<std::uint64_t>(v, "seed"); },
        [](const RunConfig& c) { return json(c.seed()); }}},
      OTO_KEY(Classification, folds, int, c.folds),
      OTO_KEY(Classification, margin, double, c.classifier.margin),
      {"triplet_reduction",
       {Scope::Classification,
        [](RunConfig& c, const json& v) {
          const auto s = typed<std::string>(v, "triplet_reduction");
          if (s == "mean") {
            c.classifier.reduction = classifier::TripletReduction::Mean;
          } else if (s == "sum") {
            c.classifier.reduction = classifier::TripletReduction::Sum;
          } else {
            throw ConfigError("field 'triplet_reduction' must be \"mean\" or \"sum\", got \"" + s + "\"");
          }
        },
        [](const RunConfig& c) {
          return json(c.classifier.reduction == classifier::TripletReduction::Mean ? "mean" : "sum");
        }}},
      {"loss",
       {Scope::Classification,
        [](RunConfig& c, const json& v) {
          try {
            c.classifier.loss = classifier::loss_mode_from_string(typed<std::string>(v, "loss"));
          } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("field 'loss': ") + e.what());
          }
        },
        [](const RunConfig& c) { return json(classifier::to_string(c.classifier.loss)); }}},
      OTO_KEY(Classification, knn_k, int, c.classifier.knn_k),
      OTO_KEY(Classification, stem_channels, int, c.classifier.model.stem_channels),
      OTO_KEY(Classification, stem_kernel, int, c.classifier.model.stem_kernel),
      OTO_KEY(Classification, stem_stride, int, c.classifier.model.stem_stride),
      OTO_KEY(Classification, pool_kernel, int, c.classifier.model.pool_kernel),
      OTO_KEY(Classification, pool_stride, int, c.classifier.model.pool_stride),
      {"widths",
       {Scope::Classification,
        [](RunConfig& c, const json& v) {
          if (!v.is_array() || v.size() != 4) throw ConfigError("field 'widths' must be an array of 4 integers");
          for (int i = 0; i < 4; ++i) c.classifier.model.widths[i] = typed<int>(v[i], "widths");
        },
        [](const RunConfig& c) { return json(c.classifier.model.widths); }}},
      OTO_KEY(Classification, blocks_per_stage, int, c.classifier.model.blocks_per_stage),
      OTO_KEY(Classification, embedding_dim, int, c.classifier.model.embedding_dim),
      OTO_KEY(Generation, prompt_template, std::string, c.generator.prompt_template),
      OTO_KEY(Generation, patch, int, c.generator.model.patch),
      {"image_widths",
       {Scope::Generation,
        [](RunConfig& c, const json& v) {
          if (!v.is_array() || v.size() != 3) throw ConfigError("field 'image_widths' must be an array of 3 integers");
          for (int i = 0; i < 3; ++i) c.generator.model.image_widths[i] = typed<int>(v[i], "image_widths");
        },
        [](const RunConfig& c) { return json(c.generator.model.image_widths); }}},
      OTO_KEY(Generation, image_dim, int, c.generator.model.image_dim),
      OTO_KEY(Generation, d_model, int, c.generator.model.d_model),
      OTO_KEY(Generation, heads, int, c.generator.model.heads),
      OTO_KEY(Generation, ff_dim, int, c.generator.model.ff_dim),
      OTO_KEY(Generation, encoder_layers, int, c.generator.model.encoder_layers),
      OTO_KEY(Generation, decoder_layers, int, c.generator.model.decoder_layers),
      OTO_KEY(Generation, beam_width, int, c.decode.beam_width),
      OTO_KEY(Generation, max_length, int, c.decode.max_length),
      OTO_KEY(Generation, length_penalty, double, c.decode.length_penalty),
  };
  return table;
}

#undef OTO_KEY

bool applies(Scope scope, Task task) {
  return scope == Scope::Both || (scope == Scope::Classification) == (task == Task::Classification);
}

void require_positive(int v, const char* name) {
  if (v < 1) throw ConfigError(std::string("field '") + name + "' must be >= 1, got " + std::to_string(v));
}

}  // namespace

std::string to_string(Task task) { return task == Task::Classification ? "classification" : "generation"; }

RunConfig RunConfig::defaults(Task task) {
  RunConfig c;
  c.task = task;
  if (task == Task::Generation) c.split_ratios = {0.60, 0.20, 0.20};
  return c;
}

void RunConfig::validate() const {
  SplitSpec spec;
  spec.ratios = split_ratios;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("field 'split_ratios': ") + e.what());
  }
  if (epochs() < 0) throw ConfigError("field 'epochs' must be >= 0");
  if (task == Task::Classification) {
    require_positive(classifier.batch_size, "batch_size");
    if (!(classifier.learning_rate > 0.0)) throw ConfigError("field 'learning_rate' must be > 0");
    if (!(classifier.margin >= 0.0)) throw ConfigError("field 'margin' must be >= 0");
    require_positive(classifier.knn_k, "knn_k");
    if (folds < 2) throw ConfigError("field 'folds' must be >= 2");
    require_positive(classifier.model.embedding_dim, "embedding_dim");
    try {
      classifier::build_resnet_graph(classifier.model);
    } catch (const ShapeError& e) {
      throw ConfigError(std::string("model dimensions: ") + e.what());
    }
  } else {
    require_positive(generator.batch_size, "batch_size");
    if (!(generator.learning_rate > 0.0)) throw ConfigError("field 'learning_rate' must be > 0");
    const auto& m = generator.model;
    require_positive(m.d_model, "d_model");
    require_positive(m.heads, "heads");
    if (m.d_model % m.heads != 0) throw ConfigError("field 'heads' must divide 'd_model'");
    if (m.d_model % 2 != 0) throw ConfigError("field 'd_model' must be even");
    require_positive(m.ff_dim, "ff_dim");
    require_positive(m.image_dim, "image_dim");
    require_positive(m.encoder_layers, "encoder_layers");
    require_positive(m.decoder_layers, "decoder_layers");
    try {
      decode.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("decoding: ") + e.what());
    }
  }
}

json RunConfig::to_json() const {
  json j = json::object();
  for (const auto& [name, key] : keys()) {
    if (applies(key.scope, task)) j[name] = key.get(*this);
  }
  return j;
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("task")) throw ConfigError("field 'task' is required");
  const auto task_name = typed<std::string>(doc.at("task"), "task");
  Task task;
  if (task_name == "classification") {
    task = Task::Classification;
  } else if (task_name == "generation") {
    task = Task::Generation;
  } else {
    throw ConfigError("field 'task' must be \"classification\" or \"generation\", got \"" + task_name + "\"");
  }
  RunConfig c = RunConfig::defaults(task);
  for (const auto& [name, value] : doc.items()) {
    auto it = keys().find(name);
    if (it == keys().end()) throw ConfigError("unknown field '" + name + "'");
    if (!applies(it->second.scope, task)) {
      throw ConfigError("field '" + name + "' does not apply to task " + task_name);
    }
    it->second.set(c, value);
  }
  if (!c.manifest.empty() && c.manifest.is_relative() && !base_dir.empty()) c.manifest = base_dir / c.manifest;
  c.validate();
  return c;
}

RunConfig parse_run_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc, base_dir);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config_text(read_file_bytes(path), path.parent_path());
}

GridAxis parse_grid_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ConfigError("grid axis '" + spec + "' must look like key=v1,v2");
  }
  GridAxis axis;
  axis.key = text::trim(spec.substr(0, eq));
  for (const auto& raw : text::split(spec.substr(eq + 1), ',')) {
    const auto v = text::trim(raw);
    if (v.empty()) throw ConfigError("grid axis '" + axis.key + "' has an empty value");
    const json parsed = json::parse(v, nullptr, false);
    axis.values.push_back(parsed.is_discarded() ? json(v) : parsed);
  }
  return axis;
}

std::vector<json> expand_grid(const json& base, const std::vector<GridAxis>& axes) {
  std::vector<json> out{base};
  for (const auto& axis : axes) {
    std::vector<json> next;
    for (const auto& partial : out) {
      for (const auto& v : axis.values) {
        json j = partial;
        j[axis.key] = v;
        next.push_back(std::move(j));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace oto::harness
