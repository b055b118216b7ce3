#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/metrics/classification.hpp"
#include "oto/metrics/human.hpp"
#include "oto/metrics/significance.hpp"

namespace oto::metrics {

struct SummarizationScores {
  double bleu = 0.0;
  double rouge_l = 0.0;
  double embed_f1 = 0.0;
  long pairs = 0;
};

struct NamedSignificance {
  std::string name;
  SignificanceResult result;
};

struct MetricsReport {
  std::optional<PRF> classification;
  std::optional<SummarizationScores> summarization;
  std::vector<NamedSignificance> significance;
  std::optional<HumanSummary> human;
};

nlohmann::json to_json(const PRF& prf);
nlohmann::json to_json(const SignificanceResult& s);
nlohmann::json to_json(const MetricsReport& report);

/// Two-space indented JSON with a trailing newline.
std::string render_report(const MetricsReport& report);
void write_report(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace oto::metrics
