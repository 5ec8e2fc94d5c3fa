#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "sumpref/critique.hpp"
#include "sumpref/scripted_mock.hpp"

using namespace sumpref;
using nlohmann::json;

namespace {

const Document kDoc{"doc", "Sam is a dog. Sam barks at the mail truck."};
const Summary kSummary{"Sam is a barking dog.", SummaryOrigin::Initial, 0};

json binary_entry(double lp_yes, double lp_no, const char* tag = "critique/doc/0") {
  return {{"tag", tag},
          {"text", lp_yes > lp_no ? "Yes" : "No"},
          {"top_logprobs", {{"Yes", lp_yes}, {"No", lp_no}}}};
}

// Playbook for one fine-grained critique run over the given verdict words.
json fine_grained_playbook(const std::vector<std::string>& verdicts) {
  json playbook = json::array();
  std::string facts = "Facts:";
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    facts += "\n" + std::to_string(i + 1) + ". Fact number " + std::to_string(i + 1) + ".";
  }
  playbook.push_back({{"tag", "facts/doc/0"}, {"text", facts}});
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    playbook.push_back(
        {{"tag", "nli/doc/0/" + std::to_string(i + 1)}, {"text", verdicts[i]}});
  }
  return playbook;
}

}  // namespace

TEST_CASE("critique_binary computes the yes/no log ratio") {
  // ln(0.7) and ln(0.3) recomputed here as the oracle for the frozen values.
  const double lp_yes = std::log(0.7);
  const double lp_no = std::log(0.3);
  ScriptedMockClient mock(json::array({binary_entry(lp_yes, lp_no)}));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const CritiqueResult result = critic.critique_binary(kDoc, kSummary);
  CHECK(result.score.value() == doctest::Approx(0.8473).epsilon(1e-4));
  CHECK(result.score.value() == lp_yes - lp_no);
  CHECK(result.feedback.text == "The summary is unfaithful.");
  CHECK(result.strategy == CritiqueStrategy::Binary);
  CHECK(result.fact_verdicts.empty());
  CHECK(reports_unfaithfulness(result.feedback));
}

TEST_CASE("critique_binary treats s = 0 as faithful (strict inequality)") {
  ScriptedMockClient mock(json::array({binary_entry(-0.6931, -0.6931)}));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const CritiqueResult result = critic.critique_binary(kDoc, kSummary);
  CHECK(result.score.value() == 0.0);
  CHECK(result.feedback.text == "The summary is faithful.");
  CHECK(!reports_unfaithfulness(result.feedback));
}

TEST_CASE("critique_binary reports negative ratios as faithful") {
  ScriptedMockClient mock(json::array({binary_entry(-2.3026, -0.1054)}));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const CritiqueResult result = critic.critique_binary(kDoc, kSummary);
  CHECK(result.score.value() == doctest::Approx(-2.1972).epsilon(1e-8));
  CHECK(result.feedback.text == "The summary is faithful.");
}

TEST_CASE("critique_binary maps missing verdict tokens to CritiqueFailed") {
  ScriptedMockClient mock(json::array({
      {{"tag", "critique/doc/0"}, {"text", "?"}, {"top_logprobs", {{"Sure", -0.1}}}},
  }));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  CHECK_THROWS_AS(critic.critique_binary(kDoc, kSummary), CritiqueFailed);
}

TEST_CASE("binary score is antisymmetric under swapping lp_yes and lp_no") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-8.0, -0.01);
  const PromptSet prompts;
  for (int round = 0; round < 200; ++round) {
    const double a = dist(rng);
    const double b = dist(rng);
    ScriptedMockClient forward(json::array({binary_entry(a, b)}));
    ScriptedMockClient swapped(json::array({binary_entry(b, a)}));
    Critic critic_fwd(forward, prompts);
    Critic critic_swp(swapped, prompts);
    const double s_fwd = critic_fwd.critique_binary(kDoc, kSummary).score.value();
    const double s_swp = critic_swp.critique_binary(kDoc, kSummary).score.value();
    CHECK(s_fwd == -s_swp);
    CHECK((s_fwd > 0.0) == (a > b));
  }
}

TEST_CASE("extract_atomic_facts parses a straight reply") {
  ScriptedMockClient mock(json::array({
      {{"tag", "facts/doc/0"},
       {"text", "Facts:\n1. The duke is 79.\n2. The duke was hospitalized."}},
  }));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const auto facts = critic.extract_atomic_facts(kSummary, "facts/doc/0");
  REQUIRE(facts.size() == 2);
  CHECK(facts[0].text == "The duke is 79.");
  CHECK(facts[1].index == 2);
}

TEST_CASE("extract_atomic_facts retries an unparseable reply once") {
  ScriptedMockClient mock(json::array({
      {{"tag", "facts/doc/0"}, {"text", ""}},
      {{"tag", "facts/doc/0"}, {"text", "Facts:\n1. A."}},
  }));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const auto facts = critic.extract_atomic_facts(kSummary, "facts/doc/0");
  REQUIRE(facts.size() == 1);
  CHECK(facts[0].text == "A.");
  CHECK(mock.remaining() == 0);
}

TEST_CASE("extract_atomic_facts fails after exhausting parse retries") {
  json playbook = json::array();
  for (int i = 0; i < 3; ++i) {
    playbook.push_back({{"tag", "facts/doc/0"}, {"text", ""}});
  }
  ScriptedMockClient mock(playbook);
  const PromptSet prompts;
  CritiqueOptions options;
  options.max_parse_retries = 2;
  Critic critic(mock, prompts, options);
  CHECK_THROWS_AS(critic.extract_atomic_facts(kSummary, "facts/doc/0"),
                  ExtractionFailed);
  CHECK(mock.remaining() == 0);
}

TEST_CASE("verify_fact parses verdicts and falls back to Neutral") {
  ScriptedMockClient mock(json::array({
      {{"tag", "nli/doc/0/1"}, {"text", "Entailed"}},
      {{"tag", "nli/doc/0/1"}, {"text", "Neutral"}},
      {{"tag", "nli/doc/0/1"}, {"text", "I think it's fine"}},
  }));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const AtomicFact fact{"Sam barks.", 1};
  CHECK(critic.verify_fact(kDoc, fact, "nli/doc/0/1") == NliVerdict::Entailed);
  CHECK(critic.verify_fact(kDoc, fact, "nli/doc/0/1") == NliVerdict::Neutral);
  CHECK(critic.verify_fact(kDoc, fact, "nli/doc/0/1") == NliVerdict::Neutral);
}

TEST_CASE("critique_fine_grained scores the non-entailed fraction") {
  ScriptedMockClient mock(
      fine_grained_playbook({"Entailed", "Neutral", "Entailed", "Contradicted"}));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const CritiqueResult result = critic.critique_fine_grained(kDoc, kSummary);
  CHECK(result.score.value() == 0.5);
  REQUIRE(result.fact_verdicts.size() == 4);
  CHECK(result.fact_verdicts[1].second == NliVerdict::Neutral);
  CHECK(result.feedback.unsupported_facts.size() == 2);
  CHECK(result.feedback.text ==
        "The following statements are not supported by the document:\n"
        "- Fact number 2.\n- Fact number 4.");
  CHECK(reports_unfaithfulness(result.feedback));
}

TEST_CASE("critique_fine_grained reports all-entailed as faithful") {
  ScriptedMockClient mock(
      fine_grained_playbook({"Entailed", "Entailed", "Entailed"}));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const CritiqueResult result = critic.critique_fine_grained(kDoc, kSummary);
  CHECK(result.score.value() == 0.0);
  CHECK(result.feedback.text == "The summary is faithful.");
  CHECK(result.feedback.unsupported_facts.empty());
}

TEST_CASE("critique_fine_grained handles the single contradicted fact") {
  ScriptedMockClient mock(fine_grained_playbook({"Contradicted"}));
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const CritiqueResult result = critic.critique_fine_grained(kDoc, kSummary);
  CHECK(result.score.value() == 1.0);
  CHECK(result.feedback.text ==
        "The following statements are not supported by the document:\n"
        "- Fact number 1.");
}

TEST_CASE("critique_fine_grained wraps extraction failure as CritiqueFailed") {
  json playbook = json::array();
  for (int i = 0; i < 3; ++i) {
    playbook.push_back({{"tag", "facts/doc/0"}, {"text", "no facts here"}});
  }
  ScriptedMockClient mock(playbook);
  const PromptSet prompts;
  Critic critic(mock, prompts);
  CHECK_THROWS_AS(critic.critique_fine_grained(kDoc, kSummary), CritiqueFailed);
}

TEST_CASE("concurrent NLI verdicts stay associated with their facts") {
  ScriptedMockClient mock(
      fine_grained_playbook(
          {"Entailed", "Contradicted", "Entailed", "Neutral", "Entailed",
           "Contradicted", "Entailed", "Entailed"}),
      8);
  const PromptSet prompts;
  Critic critic(mock, prompts);
  const CritiqueResult result = critic.critique_fine_grained(kDoc, kSummary);
  REQUIRE(result.fact_verdicts.size() == 8);
  CHECK(result.fact_verdicts[1].second == NliVerdict::Contradicted);
  CHECK(result.fact_verdicts[3].second == NliVerdict::Neutral);
  CHECK(result.fact_verdicts[5].second == NliVerdict::Contradicted);
  CHECK(result.score.value() == 3.0 / 8.0);
  CHECK(result.feedback.unsupported_facts.size() == 3);
}

TEST_CASE("non_entailed_fraction matches a brute-force recount") {
  std::mt19937 rng(17);
  for (int round = 0; round < 500; ++round) {
    const std::size_t m = 1 + rng() % 100;
    std::vector<NliVerdict> verdicts;
    for (std::size_t i = 0; i < m; ++i) {
      verdicts.push_back(static_cast<NliVerdict>(rng() % 3));
    }
    std::size_t recount = 0;
    for (NliVerdict verdict : verdicts) {
      if (verdict != NliVerdict::Entailed) ++recount;
    }
    const double expected =
        static_cast<double>(recount) / static_cast<double>(m);
    CHECK(non_entailed_fraction(verdicts) == expected);

    // Permutation invariance: the score only depends on the multiset.
    std::shuffle(verdicts.begin(), verdicts.end(), rng);
    CHECK(non_entailed_fraction(verdicts) == expected);
  }
}

TEST_CASE("fine-grained scores live on the k/M lattice") {
  std::mt19937 rng(19);
  for (int round = 0; round < 200; ++round) {
    const std::size_t m = 1 + rng() % 30;
    std::vector<NliVerdict> verdicts;
    for (std::size_t i = 0; i < m; ++i) {
      verdicts.push_back(static_cast<NliVerdict>(rng() % 3));
    }
    const double score = non_entailed_fraction(verdicts);
    bool on_lattice = false;
    for (std::size_t k = 0; k <= m; ++k) {
      if (score == static_cast<double>(k) / static_cast<double>(m)) {
        on_lattice = true;
        break;
      }
    }
    CHECK(on_lattice);
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
  }
}
