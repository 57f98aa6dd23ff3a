#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "rst/oracle.hpp"

namespace rst {

/// Persistent response cache in front of another oracle.
///
/// Key: sha256("rst-oracle-cache/v1\n" + kind + "\n" + fingerprint + "\n" +
/// prompt), where fingerprint is the inner oracle's model id and decoding
/// parameters. One JSON record per key at <store>/<key[0:2]>/<key>.json,
/// written via rename so readers never see a partial file. Concurrent misses
/// on the same key are serialized: the inner oracle is called once.
class CachedOracle final : public Oracle {
 public:
  CachedOracle(Oracle& inner, std::filesystem::path store);

  static std::string cache_key(PromptKind kind, std::string_view prompt,
                               std::string_view fingerprint);

  /// Throws StoreCorrupt when a record exists but cannot be trusted.
  std::string complete(const OracleQuery& query) override;
  std::string fingerprint() const override { return inner_.fingerprint(); }

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::filesystem::path record_path(const std::string& key) const;

 private:
  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const OracleQuery& query,
             const std::string& raw) const;
  std::shared_ptr<std::mutex> key_lock(const std::string& key);

  Oracle& inner_;
  std::filesystem::path store_;
  std::mutex locks_mu_;
  std::map<std::string, std::weak_ptr<std::mutex>> locks_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

}  // namespace rst
