#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/generator/transformer.hpp"
#include "oto/nn/checkpoint.hpp"

namespace oto::generator {

enum class DecodeStrategy { Greedy, Beam };

/// Greedy iff beam_width == 1. The output (EOS included) is at most
/// max_length tokens, so max_length = 1 always yields an empty summary.
struct DecodeConfig {
  int beam_width = 1;
  int max_length = 128;
  double length_penalty = 1.0;

  DecodeStrategy strategy() const { return beam_width == 1 ? DecodeStrategy::Greedy : DecodeStrategy::Beam; }
  static DecodeConfig greedy(int max_length = 128) { return {1, max_length, 1.0}; }
  static DecodeConfig beam(int width, int max_length = 128, double length_penalty = 1.0) {
    return {width, max_length, length_penalty};
  }
  /// Throws InvalidArgument.
  void validate() const;
};

/// Float generator with its vocabulary and prompt template; read-only methods
/// are safe to call concurrently.
class GeneratorModel {
 public:
  GeneratorModel() = default;
  GeneratorModel(const GeneratorConfig& config, Vocabulary vocab, nn::ParameterStore<float> params,
                 std::string prompt_template = std::string(kDefaultPromptTemplate), std::uint64_t seed = 0);

  /// `config.vocab_size` is taken from `vocab`.
  static GeneratorModel initialize(GeneratorConfig config, Vocabulary vocab, std::uint64_t seed,
                                   std::string prompt_template = std::string(kDefaultPromptTemplate));
  /// Throws CheckpointError.
  static GeneratorModel load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
  nlohmann::json meta() const;

  /// image: 3 x (224*224) in generator layout. Returns the 512-d vector.
  RowVecF encode_image_dense(const MatF& image) const;
  std::vector<int> prompt_ids(ClassLabel label) const { return prompt_token_ids(label, vocab_, prompt_template_); }
  MatF encode(const MatF& image, ClassLabel label) const;

  /// Next-token log-probabilities (vocab entries) after `prefix` (starting with BOS).
  RowVecD next_log_probs(const MatF& memory, std::span<const int> prefix) const;

  /// Generated ids without BOS, ending with EOS.
  std::vector<int> greedy_ids(const MatF& memory, int max_length) const;
  std::vector<int> beam_ids(const MatF& memory, const DecodeConfig& decode) const;
  std::vector<int> generate_ids(const MatF& image, ClassLabel label, const DecodeConfig& decode) const;
  std::string generate(const MatF& image, ClassLabel label, const DecodeConfig& decode = {}) const;

  /// Teacher-forced token cross-entropy summed over `target` + EOS.
  double sequence_loss(const MatF& image, ClassLabel label, std::span<const int> target) const;

  const GeneratorConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::string& prompt_template() const { return prompt_template_; }
  const Seq2Seq<float>& net() const { return net_; }
  nn::ParameterStore<float>& params() { return params_; }
  const nn::ParameterStore<float>& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

 private:
  GeneratorConfig config_;
  Vocabulary vocab_;
  nn::ParameterStore<float> params_;
  Seq2Seq<float> net_;
  std::string prompt_template_;
  std::uint64_t seed_ = 0;
};

/// Decoder input [BOS, target...] and output [target..., EOS].
std::vector<int> decoder_input(std::span<const int> target);
std::vector<int> decoder_output(std::span<const int> target);

/// Loads the checkpoint and generates one summary.
std::string generate_summary(const MatF& image, ClassLabel label, const std::filesystem::path& checkpoint_dir,
                             const DecodeConfig& decode = {});

}  // namespace oto::generator
