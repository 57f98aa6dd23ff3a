#pragma once

#include <atomic>
#include <chrono>
#include <string>

#include "rst/oracle.hpp"

namespace rst {

/// Environment variable holding the bearer token for the endpoint.
inline constexpr const char* kAuthTokenEnv = "RST_ORACLE_TOKEN";

struct HttpOracleConfig {
  /// Full URL of a text-completion route, e.g.
  /// "http://localhost:8000/v1/completions".
  std::string endpoint;
  std::string model;
  int max_tokens = 16;
  /// 0 selects greedy decoding.
  double temperature = 0.0;
  std::string stop = "\n";
  /// Additional attempts after the first failure.
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{250};
  double backoff_factor = 2.0;
  std::chrono::milliseconds timeout{60'000};
  /// Falls back to $RST_ORACLE_TOKEN when empty.
  std::string auth_token;

  /// Throws ConfigError.
  void validate() const;
  /// Decoding-relevant settings; feeds the cache key.
  std::string fingerprint() const;
};

/// Client for an OpenAI-style completion route. Sends
///   {"model", "prompt", "max_tokens", "temperature", "stop": [..]}
/// and reads choices[0].text (or a top-level "content" field).
/// Retries connection errors, 429 and 5xx with exponential backoff.
class HttpCompletionOracle final : public Oracle {
 public:
  explicit HttpCompletionOracle(HttpOracleConfig config);

  std::string complete(const OracleQuery& query) override;
  std::string fingerprint() const override { return config_.fingerprint(); }

  std::size_t requests_sent() const { return requests_.load(); }
  const HttpOracleConfig& config() const { return config_; }

 private:
  HttpOracleConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace rst
