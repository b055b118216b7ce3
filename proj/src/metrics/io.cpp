#include "oto/metrics/io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "oto/core/error.hpp"
#include "oto/core/hash.hpp"
#include "oto/core/text.hpp"

namespace oto::metrics {

namespace {

std::vector<std::string> lines_of(const std::string& content) {
  std::vector<std::string> out;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& content, const std::vector<std::string>& header,
                                               const std::string& what) {
  const auto lines = lines_of(content);
  std::vector<std::vector<std::string>> rows;
  bool seen_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    auto fields = text::split(lines[i], ',');
    for (auto& f : fields) f = text::trim(f);
    if (!seen_header) {
      if (fields != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw ParseError(what + ": expected header '" + want + "', got '" + lines[i] + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw ParseError(what + " line " + std::to_string(i + 1) + ": expected " + std::to_string(header.size()) +
                       " fields");
    }
    rows.push_back(std::move(fields));
  }
  if (!seen_header) throw ParseError(what + ": missing header");
  return rows;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(what + ": '" + s + "' is not an integer");
  }
}

}  // namespace

std::vector<TextRecord> parse_text_records(const std::string& content, const std::string& source) {
  std::vector<TextRecord> out;
  std::set<std::string> ids;
  const auto lines = lines_of(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      throw ParseError(source + " line " + std::to_string(i + 1) + ": expected id<TAB>text");
    }
    TextRecord r{text::trim(lines[i].substr(0, tab)), lines[i].substr(tab + 1)};
    if (r.id.empty()) throw ParseError(source + " line " + std::to_string(i + 1) + ": empty id");
    if (!ids.insert(r.id).second) throw ParseError(source + ": duplicate id '" + r.id + "'");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TextRecord> read_text_records(const std::filesystem::path& path) {
  return parse_text_records(read_file_bytes(path), path.string());
}

void write_text_records(const std::filesystem::path& path, const std::vector<TextRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    std::string t = r.text;
    for (char& ch : t) {
      if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
    }
    out += r.id + "\t" + t + "\n";
  }
  write_file_bytes(path, out);
}

std::vector<SummaryPair> pair_records(const std::vector<TextRecord>& hypotheses,
                                      const std::vector<TextRecord>& references) {
  std::unordered_map<std::string, const TextRecord*> refs;
  for (const auto& r : references) refs.emplace(r.id, &r);
  std::vector<SummaryPair> out;
  std::string missing;
  for (const auto& h : hypotheses) {
    auto it = refs.find(h.id);
    if (it == refs.end()) {
      missing += (missing.empty() ? "" : ", ") + h.id;
      continue;
    }
    out.push_back({h.id, h.text, it->second->text});
  }
  if (!missing.empty()) throw MissingReference("no reference for: " + missing);
  return out;
}

std::vector<Rating> parse_ratings_csv(const std::string& content) {
  std::vector<Rating> out;
  for (auto& f : csv_rows(content, {"sample_id", "annotator_id", "rating"}, "ratings")) {
    out.push_back({f[0], f[1], parse_int(f[2], "ratings")});
  }
  return out;
}

std::vector<Rating> read_ratings_csv(const std::filesystem::path& path) {
  return parse_ratings_csv(read_file_bytes(path));
}

std::vector<Faithfulness> parse_faithfulness_csv(const std::string& content) {
  std::vector<Faithfulness> out;
  for (auto& f : csv_rows(content, {"sample_id", "error_free"}, "faithfulness")) {
    const int v = parse_int(f[1], "faithfulness");
    if (v != 0 && v != 1) throw ParseError("faithfulness: error_free must be 0 or 1, got " + f[1]);
    out.push_back({f[0], v == 1});
  }
  return out;
}

std::vector<Faithfulness> read_faithfulness_csv(const std::filesystem::path& path) {
  return parse_faithfulness_csv(read_file_bytes(path));
}

}  // namespace oto::metrics
