#include "sumpref/gateway.hpp"

#include <algorithm>
#include <cctype>

#include "sumpref/scripted_mock.hpp"

namespace sumpref {

std::unique_ptr<LlmClient> make_openai_client(const BackendConfig& config);

void ChatRequest::validate() const {
  params.validate();
  if (messages.empty()) {
    throw PreconditionViolation("chat request needs at least one message");
  }
  if (messages.back().role != Role::User) {
    throw PreconditionViolation("last chat message must have the user role");
  }
  if (want_logprobs && (top_logprobs_k < 1 || top_logprobs_k > 20)) {
    throw PreconditionViolation("top_logprobs_k must be in [1,20]");
  }
}

ChatRequest make_user_request(std::string prompt, GenerationParams params,
                              std::string tag) {
  ChatRequest request;
  request.messages.push_back(ChatMessage{Role::User, std::move(prompt)});
  request.params = params;
  request.tag = std::move(tag);
  return request;
}

void BackendConfig::validate() const {
  if (kind == BackendKind::OpenAiCompatible && !base_url) {
    throw ConfigError("openai backend requires base_url");
  }
  if (kind == BackendKind::ScriptedMock && !script_path) {
    throw ConfigError("scripted_mock backend requires script_path");
  }
  if (timeout_s <= 0) throw ConfigError("timeout_s must be > 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (retry_backoff_s < 0) throw ConfigError("retry_backoff_s must be >= 0");
  if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
}

std::unique_ptr<LlmClient> make_client(const BackendConfig& config) {
  config.validate();
  switch (config.kind) {
    case BackendKind::OpenAiCompatible:
      return make_openai_client(config);
    case BackendKind::ScriptedMock:
      return ScriptedMockClient::from_file(*config.script_path,
                                           config.max_concurrency);
  }
  throw ConfigError("unknown backend kind");
}

namespace {

// Matches any casing of the token, ignoring a single leading space; tokens
// like " Yes" and "YES" all land on the same side.
bool token_is(const std::string& token, std::string_view word) {
  std::string_view view(token);
  if (!view.empty() && view.front() == ' ') view.remove_prefix(1);
  if (view.size() != word.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(view[i])) != word[i]) return false;
  }
  return true;
}

}  // namespace

YesNoLogprobs yes_no_logprobs(LlmClient& client, const ChatRequest& request) {
  if (!request.want_logprobs) {
    throw PreconditionViolation("yes_no_logprobs requires want_logprobs");
  }
  Completion completion = client.complete(request);
  const auto& choice = completion.choices.front();

  std::optional<double> lp_yes;
  std::optional<double> lp_no;
  if (choice.first_token_top_logprobs) {
    for (const auto& [token, logprob] : *choice.first_token_top_logprobs) {
      if (token_is(token, "yes")) {
        lp_yes = lp_yes ? std::max(*lp_yes, logprob) : logprob;
      } else if (token_is(token, "no")) {
        lp_no = lp_no ? std::max(*lp_no, logprob) : logprob;
      }
    }
  }
  if (!lp_yes && !lp_no) {
    throw VerdictTokensAbsent("neither yes nor no appears in top-" +
                              std::to_string(request.top_logprobs_k) +
                              " logprobs");
  }
  return YesNoLogprobs{lp_yes.value_or(kLogprobFloor),
                       lp_no.value_or(kLogprobFloor)};
}

}  // namespace sumpref
