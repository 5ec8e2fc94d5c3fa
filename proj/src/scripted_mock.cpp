#include "sumpref/scripted_mock.hpp"

#include <fstream>

namespace sumpref {

ScriptedMockClient::ScriptedMockClient(const nlohmann::json& playbook,
                                       int max_concurrency)
    : max_concurrency_(max_concurrency) {
  if (!playbook.is_array()) {
    throw BadResponse("mock script must be a JSON list");
  }
  for (const auto& item : playbook) {
    if (!item.is_object() || !item.contains("tag") || !item.contains("text")) {
      throw BadResponse("mock script entries need tag and text fields");
    }
    Entry entry;
    entry.text = item.at("text").get<std::string>();
    if (item.contains("top_logprobs") && !item.at("top_logprobs").is_null()) {
      entry.top_logprobs =
          item.at("top_logprobs").get<std::map<std::string, double>>();
    }
    playbook_[item.at("tag").get<std::string>()].push_back(std::move(entry));
  }
}

std::unique_ptr<ScriptedMockClient> ScriptedMockClient::from_file(
    const std::string& path, int max_concurrency) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open mock script: " + path);
  nlohmann::json playbook;
  try {
    in >> playbook;
  } catch (const nlohmann::json::exception& ex) {
    throw TransportError("cannot parse mock script " + path + ": " + ex.what());
  }
  return std::make_unique<ScriptedMockClient>(playbook, max_concurrency);
}

Completion ScriptedMockClient::complete(const ChatRequest& request) {
  request.validate();
  const int n = request.params.effective_n();
  Completion completion;
  completion.backend_id = "scripted-mock";
  std::lock_guard lock(mu_);
  auto it = playbook_.find(request.tag);
  for (int i = 0; i < n; ++i) {
    if (it == playbook_.end() || it->second.empty()) {
      throw ScriptExhausted("no scripted entry left for tag '" + request.tag +
                            "'");
    }
    Entry entry = std::move(it->second.front());
    it->second.pop_front();
    CompletionChoice choice;
    choice.text = std::move(entry.text);
    if (request.want_logprobs) {
      choice.first_token_top_logprobs = std::move(entry.top_logprobs);
    }
    completion.choices.push_back(std::move(choice));
  }
  return completion;
}

std::size_t ScriptedMockClient::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t total = 0;
  for (const auto& [tag, entries] : playbook_) total += entries.size();
  return total;
}

}  // namespace sumpref
