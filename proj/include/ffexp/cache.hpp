#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "ffexp/group.hpp"

namespace ffexp {

/// Unreadable, stale or wrong-version cache file.
struct CacheError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Content-addressed cache directory. Each file starts with the line
/// `ffexp-cache v1 <kind> <hash>` and is named `<kind>-<hash>.cache`.
class Cache {
 public:
  explicit Cache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(const std::string& kind, const std::string& hash) const;

  /// Payload after the header, or nullopt when no file exists. Throws
  /// CacheError on a version, kind or hash mismatch.
  std::optional<std::string> read(const std::string& kind, const std::string& hash) const;
  /// Write-temp-then-rename.
  void write(const std::string& kind, const std::string& hash, const std::string& payload) const;

 private:
  std::filesystem::path dir_;
};

/// Generator keys, generator ids, order and canonical keys, one record per line.
std::string serialize_group(const GroupEnum& g);
/// Throws CacheError when the payload is malformed or does not match the algebra.
GroupEnum deserialize_group(std::shared_ptr<const MatAlgebra> algebra, Quotient q, const std::string& payload);

}  // namespace ffexp
