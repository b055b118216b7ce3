#include "oto/core/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>

#include "oto/core/error.hpp"

namespace oto {

namespace {

std::string digest_hex(const EVP_MD* md, std::initializer_list<std::string_view> chunks) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1) throw IoError("digest init failed");
  for (auto chunk : chunks) {
    EVP_DigestUpdate(ctx.get(), chunk.data(), chunk.size());
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), buf.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[buf[i] >> 4]);
    hex.push_back(kHex[buf[i] & 0xF]);
  }
  return hex;
}

}  // namespace

std::string sha256_hex(std::string_view data) { return digest_hex(EVP_sha256(), {data}); }

std::string git_blob_hash(std::string_view data) {
  const std::string header = "blob " + std::to_string(data.size());
  return digest_hex(EVP_sha1(), {std::string_view(header.data(), header.size() + 1), data});
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace oto
