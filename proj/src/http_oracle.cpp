#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "rst/http_oracle.hpp"

#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rst/error.hpp"

namespace rst {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/\s?#]+)(/[^\s]*)?$)",
                               std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw ConfigError("malformed endpoint URL '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/v1/completions"};
}

bool retryable(int status) { return status == 429 || status >= 500; }

std::string extract_text(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw OracleFailure("completion response is not JSON");
  }
  if (j.contains("choices") && j["choices"].is_array() &&
      !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("text") && c["text"].is_string()) {
      return c["text"].get<std::string>();
    }
  }
  if (j.contains("content") && j["content"].is_string()) {
    return j["content"].get<std::string>();
  }
  throw OracleFailure("completion response carries no text");
}

}  // namespace

void HttpOracleConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("http oracle needs an endpoint");
  parse_url(endpoint);
  if (model.empty()) throw ConfigError("http oracle needs a model id");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (temperature < 0) throw ConfigError("temperature must be >= 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (initial_backoff.count() < 0 || backoff_factor < 1.0) {
    throw ConfigError("backoff must be non-negative and non-shrinking");
  }
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
}

std::string HttpOracleConfig::fingerprint() const {
  std::ostringstream out;
  out << "model=" << model << ";max_tokens=" << max_tokens
      << ";temperature=" << temperature << ";stop=";
  for (char c : stop) {
    if (c == '\n') {
      out << "\\n";
    } else {
      out << c;
    }
  }
  return out.str();
}

HttpCompletionOracle::HttpCompletionOracle(HttpOracleConfig config)
    : config_(std::move(config)) {
  config_.validate();
  const ParsedUrl url = parse_url(config_.endpoint);
  scheme_host_port_ = url.scheme_host_port;
  path_ = url.path;
  token_ = config_.auth_token;
  if (token_.empty()) {
    if (const char* env = std::getenv(kAuthTokenEnv)) token_ = env;
  }
}

std::string HttpCompletionOracle::complete(const OracleQuery& query) {
  nlohmann::ordered_json req;
  req["model"] = config_.model;
  req["prompt"] = query.prompt;
  req["max_tokens"] = config_.max_tokens;
  req["temperature"] = config_.temperature;
  req["stop"] = nlohmann::json::array({config_.stop});
  const std::string body = req.dump();

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  auto delay = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(
          static_cast<double>(delay.count()) * config_.backoff_factor));
    }
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
        config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    ++requests_;
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return extract_text(res->body);
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) break;
  }
  throw OracleFailure("completion request to " + config_.endpoint +
                      " failed: " + last_error);
}

}  // namespace rst
