#include "oto/generator/fusion.hpp"

namespace oto::generator {

std::string render_prompt(ClassLabel label, std::string_view tmpl) {
  static constexpr std::string_view kPlaceholder = "{class}";
  std::string out(tmpl);
  const auto first = out.find(kPlaceholder);
  if (first == std::string::npos) throw UnknownPlaceholder("prompt template lacks the {class} placeholder");
  const std::string name(label_display_name(label));
  for (auto pos = first; pos != std::string::npos; pos = out.find(kPlaceholder, pos + name.size())) {
    out.replace(pos, kPlaceholder.size(), name);
  }
  return out;
}

std::vector<int> prompt_token_ids(ClassLabel label, const Vocabulary& vocab, std::string_view tmpl) {
  return vocab.encode(render_prompt(label, tmpl));
}

}  // namespace oto::generator
