#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sumpref/gateway.hpp"
#include "sumpref/prompts.hpp"
#include "sumpref/types.hpp"

namespace sumpref {

enum class CritiqueStrategy { Binary, FineGrained };

const char* to_string(CritiqueStrategy strategy);

// The (s, c) pair produced by one critique call, plus the per-fact NLI
// verdicts when the fine-grained strategy ran.
struct CritiqueResult {
  HallucinationScore score;
  CritiqueFeedback feedback;
  CritiqueStrategy strategy;
  std::vector<std::pair<AtomicFact, NliVerdict>> fact_verdicts;
};

struct CritiqueOptions {
  int max_parse_retries = 2;
  double retry_temperature_bump = 0.3;
  GenerationParams extraction_params{};  // one sampled completion per attempt
  DecodeMode nli_decode = DecodeMode::Greedy;
};

// Fraction of verdicts that are not Entailed; exact rational k/M at double
// precision.
double non_entailed_fraction(std::span<const NliVerdict> verdicts);

// Builds the textual feedback from fact verdicts: the fixed faithful
// sentence when everything is entailed, otherwise a header plus one "- "
// line per unsupported fact, in extraction order.
CritiqueFeedback fine_grained_feedback(
    const std::vector<std::pair<AtomicFact, NliVerdict>>& fact_verdicts);

// s = lp_yes - lp_no with the two fixed feedback sentences; s > 0 (strict)
// marks the summary unfaithful.
CritiqueResult binary_result_from_logprobs(double lp_yes, double lp_no);

// Runs the two critique strategies against one backend. Stateless between
// calls and safe for concurrent use.
class Critic {
 public:
  Critic(LlmClient& client, const PromptSet& prompts, CritiqueOptions options = {});

  CritiqueResult critique(const Document& document, const Summary& summary,
                          CritiqueStrategy strategy) const;

  CritiqueResult critique_binary(const Document& document,
                                 const Summary& summary) const;
  CritiqueResult critique_fine_grained(const Document& document,
                                       const Summary& summary) const;

  // Extracts atomic facts from the summary, retrying with a temperature bump
  // when nothing parses. tag_scope names the call site, e.g. "facts/doc1/0".
  std::vector<AtomicFact> extract_atomic_facts(const Summary& summary,
                                               const std::string& tag_scope) const;

  NliVerdict verify_fact(const Document& document, const AtomicFact& fact,
                         const std::string& tag) const;

 private:
  LlmClient& client_;
  const PromptSet& prompts_;
  CritiqueOptions options_;
};

}  // namespace sumpref
