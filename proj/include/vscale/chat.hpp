#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "vscale/error.hpp"

namespace vscale::orchestrator {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_name;
  double temperature = 0.6;
  int max_tokens = 32768;
  // Name of the environment variable holding the API key; unset or empty
  // means no Authorization header.
  std::string api_key_env_var = "OPENAI_API_KEY";
  std::chrono::milliseconds request_timeout{600'000};
  int max_in_flight = 8;
  int max_retries = 4;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30'000};
  // Forwarded as `seed + sample_index` when set.
  std::optional<std::uint64_t> seed;

  /// Throws InvalidArgument unless max_in_flight >= 1, temperature >= 0,
  /// max_retries >= 0 and a model name is set.
  void validate() const;
};

class EndpointError : public Error {
 public:
  enum class Kind { transient, permanent };

  EndpointError(Kind kind, const std::string& what) : Error(ErrorCode::endpoint_error, what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// One completion request. The transport is stateless with respect to the
/// cache; retries and concurrency live in the Orchestrator.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// Returns the assistant message text or throws EndpointError.
  virtual std::string complete(const EndpointConfig& cfg, std::string_view prompt,
                               std::optional<std::uint64_t> seed) = 0;
};

/// OpenAI-compatible chat-completions body with one user message.
nlohmann::json chat_request_body(const EndpointConfig& cfg, std::string_view prompt,
                                 std::optional<std::uint64_t> seed);
/// Extracts choices[0].message.content; throws EndpointError (permanent) on
/// a malformed body.
std::string parse_chat_response(std::string_view body);

// POST {base_url}/chat/completions over http or https.
class HttpChatTransport final : public ChatTransport {
 public:
  std::string complete(const EndpointConfig& cfg, std::string_view prompt,
                       std::optional<std::uint64_t> seed) override;
};

}  // namespace vscale::orchestrator
