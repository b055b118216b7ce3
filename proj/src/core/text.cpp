#include "oto/core/text.hpp"

#include <cctype>

namespace oto::text {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c); }

bool attaches_left(const std::string& tok) {
  return tok == "." || tok == "," || tok == ":" || tok == ";" || tok == "!" || tok == "?" ||
         tok == ")" || tok == "%";
}

}  // namespace

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(std::move(word));
      word.clear();
    }
  };
  for (char ch : input) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      word.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool glue_next = false;
  for (const auto& tok : tokens) {
    if (!out.empty() && !attaches_left(tok) && !glue_next) out.push_back(' ');
    glue_next = tok == "(" || tok == "-" || tok == "'";
    if (tok == "-" || tok == "'") {
      // "patient-friendly", "patient's"
      while (!out.empty() && out.back() == ' ') out.pop_back();
    }
    out += tok;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      return parts;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace oto::text
