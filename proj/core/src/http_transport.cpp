// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sdoh/errors.hpp"
#include "sdoh/llm_client.hpp"

namespace sdoh {
namespace {

bool is_loopback(const std::string& host) {
  return host == "localhost" || host == "::1" || host == "[::1]" || host.rfind("127.", 0) == 0;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpTransport::Endpoint HttpTransport::parse_endpoint(const std::string& base_url, const std::string& endpoint_path) {
  static const std::regex re(R"(^(https?)://(\[[^\]]+\]|[^/:]+)(?::(\d+))?(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(base_url, m, re)) throw ConfigError("unsupported base URL " + base_url);
  Endpoint e;
  e.scheme = m[1].str();
  for (auto& c : e.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  e.host = m[2].str();
  e.port = m[3].matched ? std::stoi(m[3].str()) : (e.scheme == "https" ? 443 : 80);
  if (e.port <= 0 || e.port > 65535) throw ConfigError("invalid port in " + base_url);
  std::string prefix = m[4].matched ? m[4].str() : "";
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  std::string path = endpoint_path.empty() ? "/v1/chat/completions" : endpoint_path;
  if (path.front() != '/') path.insert(path.begin(), '/');
  e.path = prefix + path;
  if (e.scheme != "https" && !is_loopback(e.host)) {
    throw ConfigError("HTTPS is required for non-localhost host " + e.host);
  }
  return e;
}

std::string HttpTransport::request_body(const ClientConfig& config, const std::vector<ChatMessage>& messages) {
  nlohmann::ordered_json body;
  body["model"] = config.model_name;
  body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  body["max_tokens"] = config.max_tokens;
  body["temperature"] = config.temperature;
  return body.dump();
}

Completion HttpTransport::parse_response(std::string_view body) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw TransportError("response is not a JSON object", 200, false);
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw TransportError("response has no choices", 200, false);
  }
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object() ||
      !first["message"].contains("content") || !first["message"]["content"].is_string()) {
    throw TransportError("response lacks choices[0].message.content", 200, false);
  }
  Completion c;
  c.text = first["message"]["content"].get<std::string>();
  if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
    c.usage.prompt_tokens = u->value("prompt_tokens", std::size_t{0});
    c.usage.completion_tokens = u->value("completion_tokens", std::size_t{0});
  }
  return c;
}

HttpTransport::HttpTransport(const ClientConfig& config) : config_(config) {
  config_.validate();
  endpoint_ = parse_endpoint(config_.base_url, config_.endpoint_path);
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + config_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

HttpTransport::~HttpTransport() = default;

Completion HttpTransport::send(const std::vector<ChatMessage>& messages) {
  const std::string origin = endpoint_.scheme + "://" + endpoint_.host + ":" + std::to_string(endpoint_.port);
  httplib::Client cli(origin);
  const auto timeout = std::chrono::duration<double>(config_.request_timeout);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  cli.set_connection_timeout(sec.count(), usec.count());
  cli.set_read_timeout(sec.count(), usec.count());
  cli.set_write_timeout(sec.count(), usec.count());

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = cli.Post(endpoint_.path, headers, request_body(config_, messages), "application/json");
  if (!res) throw TransportError("connection failed: " + httplib::to_string(res.error()), 0, true);
  if (res->status != 200) {
    throw TransportError("endpoint returned status " + std::to_string(res->status), res->status,
                         retryable_status(res->status));
  }
  return parse_response(res->body);
}

}  // namespace sdoh
