// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdoh {

enum class Role { System, User, Assistant };
std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct ClientConfig {
  std::string base_url = "http://localhost:8000";
  std::string endpoint_path = "/v1/chat/completions";
  std::string api_key_env = "SDOH_API_KEY";
  std::string model_name;
  int max_tokens = 256;
  double temperature = 0.0;
  double request_timeout = 60.0;  // seconds
  int max_retries = 3;
  int max_concurrent = 4;
  double backoff_initial_ms = 500.0;
  double backoff_factor = 2.0;
  double backoff_max_ms = 30000.0;
  /// Allows prompt and completion text in log lines.
  bool log_text = false;

  /// Throws ConfigError.
  void validate() const;
};

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct Completion {
  std::string text;
  Usage usage;
  double latency_ms = 0.0;
  int retries = 0;
};

/// One request/response exchange with the endpoint. Implementations throw
/// TransportError and must be safe to call from several threads.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Completion send(const std::vector<ChatMessage>& messages) = 0;
};

/// Delay before retry number `attempt` (0-based), in milliseconds.
double backoff_delay_ms(const ClientConfig& config, int attempt);
/// All delays a request may wait through before giving up.
std::vector<double> backoff_schedule(const ClientConfig& config);

/// Counting semaphore shared by every client in the process. The capacity
/// can be lowered or raised at any time; waiting callers see the change.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t capacity = 1) : capacity_(capacity) {}
  void set_capacity(std::size_t capacity);
  void acquire();
  void release();
  std::size_t in_flight() const;
  std::size_t peak() const;

  static InFlightLimiter& process();

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t capacity_;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using LogSink = std::function<void(std::string_view)>;

/// Retrying, rate-limited front end over a Transport.
class Client {
 public:
  Client(ClientConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper = {}, LogSink log = {});

  /// Throws ValidationError for an empty or malformed message list and
  /// TransportError once retries are exhausted or on a permanent failure.
  Completion complete(const std::vector<ChatMessage>& messages);

  const ClientConfig& config() const { return config_; }
  std::size_t calls() const { return calls_.load(); }
  std::size_t retries() const { return retries_.load(); }
  std::size_t failures() const { return failures_.load(); }

 private:
  void log(const std::string& line) const;

  ClientConfig config_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  LogSink log_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> retries_{0};
  std::atomic<std::size_t> failures_{0};
};

/// Stable hex digest of the role:content sequence.
std::string fingerprint(const std::vector<ChatMessage>& messages);

/// Returns the content of the last user message.
class EchoTransport : public Transport {
 public:
  Completion send(const std::vector<ChatMessage>& messages) override;
};

/// Fails `failures` times with `status`, then answers with `response`.
class FailingTransport : public Transport {
 public:
  FailingTransport(int failures, int status, std::string response = "ok")
      : remaining_(failures), status_(status), response_(std::move(response)) {}
  Completion send(const std::vector<ChatMessage>& messages) override;
  int attempts() const { return attempts_.load(); }

 private:
  std::atomic<int> remaining_;
  std::atomic<int> attempts_{0};
  int status_;
  std::string response_;
};

struct Script {
  std::map<std::string, std::string> responses;  // fingerprint -> text
  std::optional<std::string> default_response;
  bool strict = false;

  static Script from_json(std::string_view json);
  static Script load(const std::string& path);
  std::string to_json() const;
};

/// Answers by prompt fingerprint and keeps a transcript of every call.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(Script script) : script_(std::move(script)) {}
  Completion send(const std::vector<ChatMessage>& messages) override;

  struct Call {
    std::string fingerprint;
    std::vector<ChatMessage> messages;
    std::string response;
  };
  std::vector<Call> transcript() const;
  std::size_t call_count() const;
  std::size_t unmatched() const;

 private:
  Script script_;
  mutable std::mutex mu_;
  std::vector<Call> transcript_;
  std::size_t unmatched_ = 0;
};

/// Real endpoint over HTTP(S). Reads the API key from the environment at
/// construction; HTTPS is mandatory unless the host is loopback.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const ClientConfig& config);
  ~HttpTransport() override;
  Completion send(const std::vector<ChatMessage>& messages) override;

  struct Endpoint {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path;
  };
  /// Throws ConfigError for unsupported schemes and plain HTTP to remote hosts.
  static Endpoint parse_endpoint(const std::string& base_url, const std::string& endpoint_path);
  static std::string request_body(const ClientConfig& config, const std::vector<ChatMessage>& messages);
  /// Throws TransportError (non-retryable) when the body lacks choices[0].message.content.
  static Completion parse_response(std::string_view body);

 private:
  ClientConfig config_;
  Endpoint endpoint_;
  std::string api_key_;
};

}  // namespace sdoh
