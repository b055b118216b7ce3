#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "oto/metrics/human.hpp"
#include "oto/metrics/text.hpp"

namespace oto::metrics {

struct TextRecord {
  std::string id;
  std::string text;
};

/// One `id<TAB>text` record per line; blank lines are skipped. Throws
/// ParseError for a line without a tab or a repeated id, IoError when unreadable.
std::vector<TextRecord> parse_text_records(const std::string& content, const std::string& source = "<input>");
std::vector<TextRecord> read_text_records(const std::filesystem::path& path);
void write_text_records(const std::filesystem::path& path, const std::vector<TextRecord>& records);

/// Pairs hypotheses with references by id, in hypothesis order. Throws
/// MissingReference listing every hypothesis id without a reference.
std::vector<SummaryPair> pair_records(const std::vector<TextRecord>& hypotheses,
                                      const std::vector<TextRecord>& references);

/// CSV with header sample_id,annotator_id,rating.
std::vector<Rating> parse_ratings_csv(const std::string& content);
std::vector<Rating> read_ratings_csv(const std::filesystem::path& path);

/// CSV with header sample_id,error_free (0 or 1).
std::vector<Faithfulness> parse_faithfulness_csv(const std::string& content);
std::vector<Faithfulness> read_faithfulness_csv(const std::filesystem::path& path);

}  // namespace oto::metrics
