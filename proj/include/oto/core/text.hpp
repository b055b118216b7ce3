#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oto::text {

/// Lowercases ASCII letters and splits on whitespace; every ASCII punctuation
/// character becomes its own token. Bytes >= 0x80 stay inside words, so UTF-8
/// sequences pass through untouched.
std::vector<std::string> tokenize(std::string_view input);

/// Joins tokens with single spaces, attaching closing punctuation to the
/// preceding word.
std::string detokenize(const std::vector<std::string>& tokens);

std::string trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);

}  // namespace oto::text
