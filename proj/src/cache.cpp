#include "bettilab/cache.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace bettilab {

std::string sha256_hex(const std::string& payload) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(payload.data(), payload.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string FileCache::path_for(const std::string& key) const {
  return dir_ + "/" + sha256_hex(key) + ".json";
}

std::optional<std::string> FileCache::get(const std::string& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void FileCache::put(const std::string& key, const std::string& payload) const {
  std::filesystem::create_directories(dir_);
  const std::string tmp = path_for(key) + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << payload;
  }
  std::filesystem::rename(tmp, path_for(key));
}

}  // namespace bettilab
