#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "sumpref/gateway.hpp"
#include "sumpref/semaphore.hpp"

namespace sumpref {

// Deterministic scripted backend. The playbook is a JSON list of
// {"tag": ..., "text": ..., "top_logprobs": optional map}; entries are
// consumed in file order per tag, so identical request sequences always see
// identical responses regardless of thread interleaving.
class ScriptedMockClient final : public LlmClient {
 public:
  explicit ScriptedMockClient(const nlohmann::json& playbook,
                              int max_concurrency = 1);
  static std::unique_ptr<ScriptedMockClient> from_file(
      const std::string& path, int max_concurrency = 1);

  Completion complete(const ChatRequest& request) override;
  bool supports_multi_choice() const override { return false; }
  int max_concurrency() const override { return max_concurrency_; }

  // Entries not yet consumed, across all tags.
  std::size_t remaining() const;

 private:
  struct Entry {
    std::string text;
    std::optional<std::map<std::string, double>> top_logprobs;
  };

  std::map<std::string, std::deque<Entry>> playbook_;
  mutable std::mutex mu_;
  int max_concurrency_;
};

}  // namespace sumpref
