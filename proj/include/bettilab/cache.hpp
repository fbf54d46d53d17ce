#pragma once

#include <optional>
#include <string>

namespace bettilab {

std::string sha256_hex(const std::string& payload);

/// Content-addressed file cache: entries live at <dir>/<sha256(key)>.json.
class FileCache {
public:
  explicit FileCache(std::string dir) : dir_(std::move(dir)) {}

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& payload) const;
  const std::string& dir() const { return dir_; }

private:
  std::string path_for(const std::string& key) const;
  std::string dir_;
};

}  // namespace bettilab
