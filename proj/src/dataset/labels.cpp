#include "oto/dataset/labels.hpp"

#include "oto/core/error.hpp"

namespace oto {

namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "AcuteOtitisMedia", "CerumenImpaction", "ChronicOtitisMedia", "Myringosclerosis", "Normal"};

constexpr std::array<std::string_view, kNumClasses> kDisplayNames = {
    "Acute Otitis Media", "Cerumen Impaction", "Chronic Otitis Media", "Myringosclerosis", "Normal"};

}  // namespace

std::string_view label_name(ClassLabel label) { return kNames[code(label)]; }

std::string_view label_display_name(ClassLabel label) { return kDisplayNames[code(label)]; }

std::optional<ClassLabel> parse_label(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kNames[i] == name) return static_cast<ClassLabel>(i);
  }
  return std::nullopt;
}

ClassLabel label_from_code(int c) {
  if (c < 0 || c >= kNumClasses) throw InvalidArgument("class code out of range: " + std::to_string(c));
  return static_cast<ClassLabel>(c);
}

}  // namespace oto
