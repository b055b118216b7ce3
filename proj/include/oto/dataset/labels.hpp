#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace oto {

/// The five diagnostic categories. Integer codes are stable and alphabetical.
enum class ClassLabel : int {
  AcuteOtitisMedia = 0,
  CerumenImpaction = 1,
  ChronicOtitisMedia = 2,
  Myringosclerosis = 3,
  Normal = 4,
};

inline constexpr int kNumClasses = 5;

inline constexpr std::array<ClassLabel, kNumClasses> kAllLabels = {
    ClassLabel::AcuteOtitisMedia, ClassLabel::CerumenImpaction, ClassLabel::ChronicOtitisMedia,
    ClassLabel::Myringosclerosis, ClassLabel::Normal};

constexpr int code(ClassLabel label) { return static_cast<int>(label); }

/// Exact identifier used in manifests, reports and HTTP headers, e.g. "ChronicOtitisMedia".
std::string_view label_name(ClassLabel label);

/// Human-readable form used inside prompts, e.g. "Chronic Otitis Media".
std::string_view label_display_name(ClassLabel label);

std::optional<ClassLabel> parse_label(std::string_view name);

ClassLabel label_from_code(int code);

}  // namespace oto
