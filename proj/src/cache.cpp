#include "rst/cache.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "rst/error.hpp"
#include "rst/hash.hpp"

namespace fs = std::filesystem;

namespace rst {

namespace {
constexpr std::string_view kKeyPrefix = "rst-oracle-cache/v1\n";
constexpr int kRecordVersion = 1;
}  // namespace

CachedOracle::CachedOracle(Oracle& inner, fs::path store)
    : inner_(inner), store_(std::move(store)) {
  std::error_code ec;
  fs::create_directories(store_, ec);
  if (ec || !fs::is_directory(store_)) {
    throw ConfigError("cache store '" + store_.string() +
                      "' is not a writable directory");
  }
}

std::string CachedOracle::cache_key(PromptKind kind, std::string_view prompt,
                                    std::string_view fingerprint) {
  std::string material(kKeyPrefix);
  material += to_string(kind);
  material += '\n';
  material += fingerprint;
  material += '\n';
  material += prompt;
  return sha256_hex(material);
}

fs::path CachedOracle::record_path(const std::string& key) const {
  return store_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> CachedOracle::lookup(const std::string& key) const {
  const fs::path path = record_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    const auto j = nlohmann::json::parse(ss.str());
    if (j.at("version").get<int>() != kRecordVersion ||
        j.at("key").get<std::string>() != key) {
      throw StoreCorrupt("cache record " + path.string() +
                         " does not match its key");
    }
    return j.at("raw").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw StoreCorrupt("cache record " + path.string() +
                       " is unreadable: " + e.what());
  }
}

void CachedOracle::store(const std::string& key, const OracleQuery& query,
                         const std::string& raw) const {
  const fs::path path = record_path(key);
  fs::create_directories(path.parent_path());
  nlohmann::ordered_json j;
  j["version"] = kRecordVersion;
  j["key"] = key;
  j["kind"] = std::string(to_string(query.kind));
  j["fingerprint"] = inner_.fingerprint();
  j["raw"] = raw;

  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = path;
  tmp += "." + std::to_string(rng()) + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache record " + tmp.string());
    out << j.dump() << "\n";
    if (!out.flush()) throw Error("cannot write cache record " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::shared_ptr<std::mutex> CachedOracle::key_lock(const std::string& key) {
  std::lock_guard guard(locks_mu_);
  auto& slot = locks_[key];
  auto lock = slot.lock();
  if (!lock) {
    lock = std::make_shared<std::mutex>();
    slot = lock;
  }
  if (locks_.size() > 4096) std::erase_if(locks_, [](const auto& kv) {
      return kv.second.expired();
    });
  return lock;
}

std::string CachedOracle::complete(const OracleQuery& query) {
  const std::string key =
      cache_key(query.kind, query.prompt, inner_.fingerprint());
  if (auto hit = lookup(key)) {
    ++hits_;
    return *hit;
  }
  auto lock = key_lock(key);
  std::lock_guard guard(*lock);
  if (auto hit = lookup(key)) {  // another thread filled it meanwhile
    ++hits_;
    return *hit;
  }
  ++misses_;
  std::string raw = inner_.complete(query);
  store(key, query, raw);
  return raw;
}

}  // namespace rst
