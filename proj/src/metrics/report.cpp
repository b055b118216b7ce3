#include "oto/metrics/report.hpp"

#include "oto/core/hash.hpp"
#include "oto/dataset/labels.hpp"

namespace oto::metrics {

namespace {
nlohmann::json scores_json(const ClassScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}
}  // namespace

nlohmann::json to_json(const PRF& prf) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t k = 0; k < prf.per_class.size(); ++k) {
    const std::string name = prf.per_class.size() == static_cast<std::size_t>(kNumClasses)
                                 ? std::string(label_name(label_from_code(static_cast<int>(k))))
                                 : std::to_string(k);
    per_class[name] = scores_json(prf.per_class[k]);
  }
  return {{"per_class", per_class}, {"macro", scores_json(prf.macro)}};
}

nlohmann::json to_json(const SignificanceResult& s) {
  return {{"z", s.z}, {"p_two_tailed", s.p_two_tailed}, {"p1", s.p1}, {"p2", s.p2}, {"n1", s.n1}, {"n2", s.n2}};
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.classification) j["classification"] = to_json(*r.classification);
  if (r.summarization) {
    j["summarization"] = {{"bleu", r.summarization->bleu},
                          {"rouge_l", r.summarization->rouge_l},
                          {"embed_f1", r.summarization->embed_f1},
                          {"pairs", r.summarization->pairs}};
  }
  j["significance"] = nlohmann::json::array();
  for (const auto& s : r.significance) {
    auto e = to_json(s.result);
    e["name"] = s.name;
    j["significance"].push_back(e);
  }
  if (r.human) {
    j["human"] = {{"mean_rating", r.human->mean_rating},
                  {"rating_count", r.human->rating_count},
                  {"sample_count", r.human->sample_count}};
    if (r.human->faithfulness_percent) j["human"]["faithfulness_percent"] = *r.human->faithfulness_percent;
  }
  return j;
}

std::string render_report(const MetricsReport& report) { return to_json(report).dump(2) + "\n"; }

void write_report(const std::filesystem::path& path, const MetricsReport& report) {
  write_file_bytes(path, render_report(report));
}

}  // namespace oto::metrics
