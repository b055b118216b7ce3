#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace oto {

std::string sha256_hex(std::string_view data);

/// Object id git would assign to a blob with this content:
/// SHA-1 over "blob <size>\0" followed by the bytes.
std::string git_blob_hash(std::string_view data);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view data);

}  // namespace oto
