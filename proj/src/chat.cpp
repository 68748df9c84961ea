#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "vscale/chat.hpp"

#include <cstdlib>

#include "httplib.h"

namespace vscale::orchestrator {

using nlohmann::json;

void EndpointConfig::validate() const {
  if (max_in_flight < 1) throw Error(ErrorCode::invalid_argument, "max_in_flight must be >= 1");
  if (!(temperature >= 0)) throw Error(ErrorCode::invalid_argument, "temperature must be >= 0");
  if (max_retries < 0) throw Error(ErrorCode::invalid_argument, "max_retries must be >= 0");
  if (model_name.empty()) throw Error(ErrorCode::invalid_argument, "model name is empty");
}

json chat_request_body(const EndpointConfig& cfg, std::string_view prompt, std::optional<std::uint64_t> seed) {
  json body{{"model", cfg.model_name},
            {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", cfg.temperature},
            {"max_tokens", cfg.max_tokens}};
  if (seed) body["seed"] = *seed;
  return body;
}

std::string parse_chat_response(std::string_view body) {
  try {
    json j = json::parse(body);
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) throw EndpointError(EndpointError::Kind::transient, "completion has null content");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw EndpointError(EndpointError::Kind::permanent, std::string("malformed chat-completions response: ") + e.what());
  }
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw EndpointError(EndpointError::Kind::permanent, "endpoint URL '" + url + "' has no scheme");
  }
  std::size_t path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

std::string HttpChatTransport::complete(const EndpointConfig& cfg, std::string_view prompt,
                                        std::optional<std::uint64_t> seed) {
  SplitUrl url = split_url(cfg.base_url);
  httplib::Client client(url.origin);
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(cfg.request_timeout).count();
  client.set_connection_timeout(std::min<long>(static_cast<long>(seconds), 30), 0);
  client.set_read_timeout(static_cast<time_t>(seconds), 0);
  client.set_write_timeout(static_cast<time_t>(seconds), 0);

  httplib::Headers headers;
  if (!cfg.api_key_env_var.empty()) {
    if (const char* key = std::getenv(cfg.api_key_env_var.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  auto result = client.Post(url.path + "/chat/completions", headers, chat_request_body(cfg, prompt, seed).dump(),
                            "application/json");
  if (!result) {
    throw EndpointError(EndpointError::Kind::transient,
                        "request to " + cfg.base_url + " failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw EndpointError(EndpointError::Kind::transient, "HTTP " + std::to_string(status) + " from " + cfg.base_url);
  }
  if (status != 200) {
    throw EndpointError(EndpointError::Kind::permanent,
                        "HTTP " + std::to_string(status) + " from " + cfg.base_url + ": " + result->body.substr(0, 200));
  }
  return parse_chat_response(result->body);
}

}  // namespace vscale::orchestrator
