#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sumpref/errors.hpp"
#include "sumpref/types.hpp"

namespace sumpref {

enum class Role { System, User };

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

// One completion call. The tag identifies the call site (e.g.
// "critique/doc3/1") and addresses entries in the scripted backend; real
// backends ignore it.
struct ChatRequest {
  std::vector<ChatMessage> messages;
  GenerationParams params;
  bool want_logprobs = false;
  int top_logprobs_k = 0;
  std::string tag;

  void validate() const;
};

ChatRequest make_user_request(std::string prompt, GenerationParams params,
                              std::string tag);

struct CompletionChoice {
  std::string text;
  // Natural-log probabilities of the top-k first-token candidates, present
  // only when the request asked for logprobs.
  std::optional<std::map<std::string, double>> first_token_top_logprobs;
};

struct Completion {
  std::vector<CompletionChoice> choices;
  std::string backend_id;
};

enum class BackendKind { OpenAiCompatible, ScriptedMock };

struct BackendConfig {
  BackendKind kind = BackendKind::ScriptedMock;
  std::optional<std::string> base_url;
  std::string model;
  std::optional<std::string> api_key_env;
  double timeout_s = 60.0;
  int max_retries = 2;
  double retry_backoff_s = 0.5;
  int max_concurrency = 4;
  std::optional<std::string> script_path;

  void validate() const;
};

// Uniform client over LLM backends. Implementations are safe for concurrent
// use; an internal semaphore bounds simultaneous calls.
class LlmClient {
 public:
  virtual ~LlmClient() = default;

  // Returns exactly params.effective_n() choices or throws. Transient
  // transport/5xx failures are retried with exponential backoff.
  virtual Completion complete(const ChatRequest& request) = 0;

  // Whether one request may carry n > 1 and return multiple choices.
  virtual bool supports_multi_choice() const = 0;

  virtual int max_concurrency() const = 0;
};

std::unique_ptr<LlmClient> make_client(const BackendConfig& config);

// Floor applied to a missing yes/no side so scores stay finite; far below
// any realistic top-20 logprob.
inline const double kLogprobFloor = std::log(1e-6);

struct YesNoLogprobs {
  double lp_yes;
  double lp_no;
};

// Runs the request and scans the first-token top-k map for case/space
// variants of "yes" and "no", merging by max. A missing side is floored at
// ln(1e-6); both sides missing raises VerdictTokensAbsent.
YesNoLogprobs yes_no_logprobs(LlmClient& client, const ChatRequest& request);

}  // namespace sumpref
