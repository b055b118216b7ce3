#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace oto::generator {

/// Word-level vocabulary. Ids 0..3 are the special tokens; the rest are the
/// corpus tokens in byte order.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecial = 4;

  Vocabulary();
  /// Throws ValidationError unless the first four entries are the specials and
  /// every entry is distinct.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Tokenizes every text and keeps the distinct tokens.
  static Vocabulary build(const std::vector<std::string>& texts);

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(const std::string& token) const;
  const std::string& token(int id) const;
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Token ids of `text`, unknown words as UNK, no BOS/EOS.
  std::vector<int> encode(std::string_view text) const;
  /// Drops special ids and stops at the first EOS.
  std::string decode(std::span<const int> ids) const;

  nlohmann::json to_json() const { return tokens_; }
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace oto::generator
