#include "oto/generator/vocabulary.hpp"

#include <algorithm>
#include <set>

#include "oto/core/error.hpp"
#include "oto/core/text.hpp"

namespace oto::generator {

namespace {
const std::vector<std::string> kSpecials{"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocabulary::Vocabulary() : Vocabulary(kSpecials) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kSpecials.size() || !std::equal(kSpecials.begin(), kSpecials.end(), tokens_.begin())) {
    throw ValidationError("vocabulary must start with <pad> <bos> <eos> <unk>");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ValidationError("vocabulary token '" + tokens_[i] + "' appears twice");
    }
  }
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts) {
  std::set<std::string> words;
  for (const auto& t : texts) {
    for (auto& w : text::tokenize(t)) words.insert(std::move(w));
  }
  std::vector<std::string> tokens = kSpecials;
  for (const auto& w : words) {
    if (std::find(kSpecials.begin(), kSpecials.end(), w) == kSpecials.end()) tokens.push_back(w);
  }
  return Vocabulary(std::move(tokens));
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : text::tokenize(text)) ids.push_back(id(w));
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> words;
  for (int i : ids) {
    if (i == kEos) break;
    if (i < kNumSpecial) continue;
    words.push_back(token(i));
  }
  return text::detokenize(words);
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw CheckpointError("vocabulary must be a token array");
  std::vector<std::string> tokens;
  for (const auto& t : j) {
    if (!t.is_string()) throw CheckpointError("vocabulary entries must be strings");
    tokens.push_back(t.get<std::string>());
  }
  try {
    return Vocabulary(std::move(tokens));
  } catch (const ValidationError& e) {
    throw CheckpointError(e.what());
  }
}

}  // namespace oto::generator
