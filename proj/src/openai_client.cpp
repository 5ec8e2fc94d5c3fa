#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sumpref/gateway.hpp"
#include "sumpref/semaphore.hpp"

namespace sumpref {

std::unique_ptr<LlmClient> make_openai_client(const BackendConfig& config);

namespace {

using json = nlohmann::json;

struct SplitUrl {
  std::string host;         // scheme://authority
  std::string path_prefix;  // leading path, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  std::size_t authority_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = base_url.find('/', authority_start);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.host = base_url;
  } else {
    out.host = base_url.substr(0, path_start);
    out.path_prefix = base_url.substr(path_start);
  }
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
    out.path_prefix.pop_back();
  }
  return out;
}

double jitter_factor() {
  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> dist(0.8, 1.2);
  return dist(rng);
}

json request_body(const ChatRequest& request, const std::string& model) {
  json body;
  body["model"] = model;
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back({{"role", message.role == Role::System ? "system" : "user"},
                        {"content", message.content}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = request.params.effective_temperature();
  body["top_p"] = request.params.top_p;
  body["max_tokens"] = request.params.max_tokens;
  body["n"] = request.params.effective_n();
  if (request.params.seed) body["seed"] = *request.params.seed;
  if (request.want_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = request.top_logprobs_k;
  }
  return body;
}

Completion parse_completion(const std::string& raw, const ChatRequest& request,
                            const std::string& fallback_model) {
  json payload;
  try {
    payload = json::parse(raw);
  } catch (const json::exception& ex) {
    throw BadResponse(std::string("completion response is not JSON: ") + ex.what());
  }
  if (!payload.contains("choices") || !payload.at("choices").is_array()) {
    throw BadResponse("completion response has no choices array");
  }
  Completion completion;
  completion.backend_id = payload.value("model", fallback_model);
  for (const auto& choice_json : payload.at("choices")) {
    CompletionChoice choice;
    try {
      choice.text = choice_json.at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw BadResponse("choice is missing message.content");
    }
    if (request.want_logprobs) {
      std::map<std::string, double> top;
      try {
        const auto& content = choice_json.at("logprobs").at("content");
        if (!content.is_array() || content.empty()) {
          throw BadResponse("logprobs.content is empty");
        }
        for (const auto& item : content.at(0).at("top_logprobs")) {
          top[item.at("token").get<std::string>()] =
              item.at("logprob").get<double>();
        }
      } catch (const json::exception&) {
        throw BadResponse("requested logprobs missing from choice");
      }
      if (top.size() > static_cast<std::size_t>(request.top_logprobs_k)) {
        throw BadResponse("backend returned more than top_logprobs_k entries");
      }
      for (const auto& [token, logprob] : top) {
        if (logprob > 0.0) {
          throw BadResponse("log probability above zero for token '" + token + "'");
        }
      }
      choice.first_token_top_logprobs = std::move(top);
    }
    completion.choices.push_back(std::move(choice));
  }
  if (completion.choices.size() !=
      static_cast<std::size_t>(request.params.effective_n())) {
    throw BadResponse("backend returned " + std::to_string(completion.choices.size()) +
                      " choices, expected " +
                      std::to_string(request.params.effective_n()));
  }
  return completion;
}

class OpenAiClient final : public LlmClient {
 public:
  explicit OpenAiClient(const BackendConfig& config)
      : config_(config),
        url_(split_base_url(*config.base_url)),
        sem_(config.max_concurrency) {
    if (config_.api_key_env) {
      if (const char* value = std::getenv(config_.api_key_env->c_str())) {
        api_key_ = value;
      }
    }
  }

  Completion complete(const ChatRequest& request) override {
    request.validate();
    const std::string body = request_body(request, config_.model).dump();
    const std::string path = url_.path_prefix + "/v1/chat/completions";

    SemaphoreGuard guard(sem_);
    std::string last_failure;
    for (int attempt = 0;; ++attempt) {
      httplib::Client client(url_.host);
      const auto whole = std::max(1, static_cast<int>(config_.timeout_s));
      client.set_connection_timeout(whole, 0);
      client.set_read_timeout(whole, 0);
      client.set_write_timeout(whole, 0);
      httplib::Headers headers;
      if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
      }

      auto result = client.Post(path, headers, body, "application/json");
      if (result) {
        if (result->status >= 200 && result->status < 300) {
          return parse_completion(result->body, request, config_.model);
        }
        if (result->status < 500) {
          throw TransportError("HTTP " + std::to_string(result->status) +
                               " from " + url_.host + path);
        }
        last_failure = "HTTP " + std::to_string(result->status);
      } else {
        last_failure = httplib::to_string(result.error());
      }

      if (attempt >= config_.max_retries) {
        throw TransportError("request to " + url_.host + path + " failed after " +
                             std::to_string(attempt + 1) + " attempts: " +
                             last_failure);
      }
      const double delay_s =
          config_.retry_backoff_s * std::pow(2.0, attempt) * jitter_factor();
      std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
    }
  }

  bool supports_multi_choice() const override { return true; }
  int max_concurrency() const override { return config_.max_concurrency; }

 private:
  BackendConfig config_;
  SplitUrl url_;
  std::string api_key_;
  Semaphore sem_;
};

}  // namespace

std::unique_ptr<LlmClient> make_openai_client(const BackendConfig& config) {
  return std::make_unique<OpenAiClient>(config);
}

}  // namespace sumpref
