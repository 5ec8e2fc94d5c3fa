#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sumpref/generation.hpp"
#include "sumpref/scripted_mock.hpp"

using namespace sumpref;
using nlohmann::json;

namespace {

const Document kDoc{"doc1", "The council approved the bridge."};

json summaries_playbook(int n) {
  json playbook = json::array();
  for (int i = 0; i < n; ++i) {
    playbook.push_back({{"tag", "summ/doc1/" + std::to_string(i)},
                        {"text", "summary " + std::to_string(i)}});
  }
  return playbook;
}

}  // namespace

TEST_CASE("generate_summaries draws n samples in tag order") {
  ScriptedMockClient mock(summaries_playbook(3));
  const PromptSet prompts;
  GenerationParams params;
  const auto summaries = generate_summaries(mock, prompts, kDoc, 3, params);
  REQUIRE(summaries.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(summaries[i].text == "summary " + std::to_string(i));
    CHECK(summaries[i].origin == SummaryOrigin::Initial);
    CHECK(summaries[i].sample_index == i);
  }
}

TEST_CASE("generate_summaries greedy single sample is deterministic") {
  GenerationParams greedy;
  greedy.decode_mode = DecodeMode::Greedy;
  for (int run = 0; run < 2; ++run) {
    ScriptedMockClient mock(summaries_playbook(1));
    const PromptSet prompts;
    const auto summaries = generate_summaries(mock, prompts, kDoc, 1, greedy);
    REQUIRE(summaries.size() == 1);
    CHECK(summaries[0].text == "summary 0");
  }
}

TEST_CASE("generate_summaries rejects n = 0") {
  ScriptedMockClient mock(json::array());
  const PromptSet prompts;
  CHECK_THROWS_AS(generate_summaries(mock, prompts, kDoc, 0, GenerationParams{}),
                  PreconditionViolation);
}

TEST_CASE("refine_summary keeps the source sample index") {
  ScriptedMockClient mock(json::array({
      {{"tag", "refine/doc1/2"}, {"text", "edited sentence"}},
  }));
  const PromptSet prompts;
  RefinementInput input{kDoc,
                        Summary{"bad summary", SummaryOrigin::Initial, 2},
                        CritiqueFeedback{"The summary is unfaithful.", {}}};
  const Summary refined =
      refine_summary(mock, prompts, input, GenerationParams{});
  CHECK(refined.text == "edited sentence");
  CHECK(refined.origin == SummaryOrigin::Refined);
  CHECK(refined.sample_index == 2);
}

TEST_CASE("refine_summary passes identical text through unchanged") {
  ScriptedMockClient mock(json::array({
      {{"tag", "refine/doc1/0"}, {"text", "same text"}},
  }));
  const PromptSet prompts;
  RefinementInput input{kDoc, Summary{"same text", SummaryOrigin::Initial, 0},
                        CritiqueFeedback{"The summary is unfaithful.", {}}};
  const Summary refined =
      refine_summary(mock, prompts, input, GenerationParams{});
  CHECK(refined.text == "same text");
}

TEST_CASE("refine_summary rejects a faithful comment") {
  ScriptedMockClient mock(json::array());
  const PromptSet prompts;
  RefinementInput input{kDoc, Summary{"s", SummaryOrigin::Initial, 0},
                        CritiqueFeedback{"The summary is faithful.", {}}};
  CHECK_THROWS_AS(refine_summary(mock, prompts, input, GenerationParams{}),
                  PreconditionViolation);
}

TEST_CASE("generate_summaries batches n > 1 on multi-choice backends") {
  std::atomic<int> calls{0};
  std::atomic<int> seen_n{0};
  httplib::Server server;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& request, httplib::Response& response) {
                calls.fetch_add(1);
                const json body = json::parse(request.body);
                const int n = body["n"].get<int>();
                seen_n.store(n);
                json choices = json::array();
                for (int i = 0; i < n; ++i) {
                  choices.push_back(
                      {{"index", i},
                       {"message", {{"role", "assistant"},
                                    {"content", "batched " + std::to_string(i)}}}});
                }
                response.set_content(
                    json{{"model", "m"}, {"choices", choices}}.dump(),
                    "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BackendConfig config;
  config.kind = BackendKind::OpenAiCompatible;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.model = "m";
  config.timeout_s = 5.0;
  auto client = make_client(config);
  const PromptSet prompts;

  const auto sampled =
      generate_summaries(*client, prompts, kDoc, 3, GenerationParams{});
  REQUIRE(sampled.size() == 3);
  CHECK(sampled[2].text == "batched 2");
  CHECK(sampled[2].sample_index == 2);
  CHECK(calls.load() == 1);  // one request carried all three samples
  CHECK(seen_n.load() == 3);

  // Greedy decoding cannot batch; it loops single-choice requests.
  GenerationParams greedy;
  greedy.decode_mode = DecodeMode::Greedy;
  const auto greedy_out = generate_summaries(*client, prompts, kDoc, 2, greedy);
  CHECK(greedy_out.size() == 2);
  CHECK(calls.load() == 3);

  server.stop();
  listener.join();
}
