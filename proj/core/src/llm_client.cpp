// SPDX-License-Identifier: Apache-2.0
#include "sdoh/llm_client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sdoh/errors.hpp"
#include "sdoh/random.hpp"

namespace sdoh {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  return std::nullopt;
}

void ClientConfig::validate() const {
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (max_concurrent < 1) throw ConfigError("max_concurrent must be >= 1");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (!(request_timeout > 0.0)) throw ConfigError("request_timeout must be > 0");
  if (!(backoff_initial_ms >= 0.0) || !(backoff_factor >= 1.0) || !(backoff_max_ms >= 0.0)) {
    throw ConfigError("invalid backoff settings");
  }
}

double backoff_delay_ms(const ClientConfig& config, int attempt) {
  const double d = config.backoff_initial_ms * std::pow(config.backoff_factor, attempt);
  return std::min(d, config.backoff_max_ms);
}

std::vector<double> backoff_schedule(const ClientConfig& config) {
  std::vector<double> out;
  for (int i = 0; i < config.max_retries; ++i) out.push_back(backoff_delay_ms(config, i));
  return out;
}

void InFlightLimiter::set_capacity(std::size_t capacity) {
  {
    std::lock_guard lock(mu_);
    capacity_ = std::max<std::size_t>(capacity, 1);
  }
  cv_.notify_all();
}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < capacity_; });
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

std::size_t InFlightLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

std::size_t InFlightLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

InFlightLimiter& InFlightLimiter::process() {
  static InFlightLimiter limiter(4);
  return limiter;
}

namespace {

struct Permit {
  explicit Permit(InFlightLimiter& l) : limiter(l) { limiter.acquire(); }
  ~Permit() { limiter.release(); }
  Permit(const Permit&) = delete;
  Permit& operator=(const Permit&) = delete;
  InFlightLimiter& limiter;
};

void check_messages(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw ValidationError("message list is empty");
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (messages[i].content.empty()) throw ValidationError("message " + std::to_string(i) + " has empty content");
    if (i > 0 && messages[i].role == Role::System) {
      throw ValidationError("only the first message may be a system message");
    }
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Client::Client(ClientConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper, LogSink log)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)), log_(std::move(log)) {
  config_.validate();
  if (!transport_) throw ConfigError("client has no transport");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  InFlightLimiter::process().set_capacity(static_cast<std::size_t>(config_.max_concurrent));
}

void Client::log(const std::string& line) const {
  if (log_) log_(line);
}

Completion Client::complete(const std::vector<ChatMessage>& messages) {
  check_messages(messages);
  ++calls_;
  const std::string fp = fingerprint(messages);
  for (int attempt = 0;; ++attempt) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Completion c;
      {
        Permit permit(InFlightLimiter::process());
        c = transport_->send(messages);
      }
      c.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      c.retries = attempt;
      std::ostringstream os;
      os << "request " << fp << " ok attempt=" << attempt + 1 << " latency_ms=" << static_cast<long>(c.latency_ms)
         << " completion_chars=" << c.text.size();
      if (config_.log_text) os << " text=" << nlohmann::json(c.text).dump();
      log(os.str());
      return c;
    } catch (const TransportError& e) {
      std::ostringstream os;
      os << "request " << fp << " failed attempt=" << attempt + 1 << " status=" << e.status();
      if (config_.log_text) os << " detail=" << e.what();
      log(os.str());
      if (!e.retryable() || attempt >= config_.max_retries) {
        ++failures_;
        throw TransportError("request failed after " + std::to_string(attempt + 1) +
                                 " attempt(s), last status " + std::to_string(e.status()),
                             e.status(), false);
      }
      ++retries_;
      sleeper_(std::chrono::milliseconds(static_cast<long long>(backoff_delay_ms(config_, attempt))));
    }
  }
}

std::string fingerprint(const std::vector<ChatMessage>& messages) {
  std::uint64_t h = fnv1a("");
  for (const auto& m : messages) {
    const std::string_view role = to_string(m.role);
    const std::string head = std::to_string(role.size()) + ":" + std::string(role) + ":" +
                             std::to_string(m.content.size()) + ":";
    h = fnv1a(head, h);
    h = fnv1a(m.content, h);
  }
  return hex64(h);
}

Completion EchoTransport::send(const std::vector<ChatMessage>& messages) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::User) return Completion{it->content, {}, 0.0, 0};
  }
  return Completion{};
}

Completion FailingTransport::send(const std::vector<ChatMessage>&) {
  ++attempts_;
  if (remaining_.fetch_sub(1) > 0) {
    const bool retryable = status_ == 0 || status_ == 408 || status_ == 429 || status_ >= 500;
    throw TransportError("scripted failure", status_, retryable);
  }
  return Completion{response_, {}, 0.0, 0};
}

Script Script::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("mock script: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("mock script must be a JSON object");
  Script s;
  if (j.contains("default") && !j["default"].is_null()) {
    if (!j["default"].is_string()) throw ParseError("mock script: \"default\" must be a string or null");
    s.default_response = j["default"].get<std::string>();
  }
  if (j.contains("strict")) {
    if (!j["strict"].is_boolean()) throw ParseError("mock script: \"strict\" must be a boolean");
    s.strict = j["strict"].get<bool>();
  }
  if (j.contains("responses")) {
    if (!j["responses"].is_object()) throw ParseError("mock script: \"responses\" must be an object");
    for (const auto& [k, v] : j["responses"].items()) {
      if (!v.is_string()) throw ParseError("mock script: response " + k + " is not a string");
      s.responses[k] = v.get<std::string>();
    }
  }
  return s;
}

Script Script::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mock script " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string Script::to_json() const {
  nlohmann::ordered_json j;
  j["default"] = default_response ? nlohmann::ordered_json(*default_response) : nlohmann::ordered_json(nullptr);
  j["strict"] = strict;
  j["responses"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : responses) j["responses"][k] = v;
  return j.dump(2) + "\n";
}

Completion ScriptedTransport::send(const std::vector<ChatMessage>& messages) {
  const std::string fp = fingerprint(messages);
  std::string response;
  bool matched = true;
  if (auto it = script_.responses.find(fp); it != script_.responses.end()) {
    response = it->second;
  } else if (!script_.strict && script_.default_response) {
    response = *script_.default_response;
    matched = false;
  } else {
    std::lock_guard lock(mu_);
    ++unmatched_;
    transcript_.push_back({fp, messages, ""});
    throw TransportError("no scripted response for prompt " + fp, 404, false);
  }
  std::lock_guard lock(mu_);
  if (!matched) ++unmatched_;
  transcript_.push_back({fp, messages, response});
  return Completion{response, {}, 0.0, 0};
}

std::vector<ScriptedTransport::Call> ScriptedTransport::transcript() const {
  std::lock_guard lock(mu_);
  return transcript_;
}

std::size_t ScriptedTransport::call_count() const {
  std::lock_guard lock(mu_);
  return transcript_.size();
}

std::size_t ScriptedTransport::unmatched() const {
  std::lock_guard lock(mu_);
  return unmatched_;
}

}  // namespace sdoh
