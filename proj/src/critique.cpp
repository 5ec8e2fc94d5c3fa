#include "sumpref/critique.hpp"

#include <exception>
#include <future>

#include "sumpref/parsers.hpp"

namespace sumpref {

const char* to_string(CritiqueStrategy strategy) {
  switch (strategy) {
    case CritiqueStrategy::Binary: return "binary";
    case CritiqueStrategy::FineGrained: return "fine_grained";
  }
  return "?";
}

double non_entailed_fraction(std::span<const NliVerdict> verdicts) {
  if (verdicts.empty()) {
    throw PreconditionViolation("verdict list must be non-empty");
  }
  std::size_t not_entailed = 0;
  for (NliVerdict verdict : verdicts) {
    if (verdict != NliVerdict::Entailed) ++not_entailed;
  }
  return static_cast<double>(not_entailed) / static_cast<double>(verdicts.size());
}

CritiqueFeedback fine_grained_feedback(
    const std::vector<std::pair<AtomicFact, NliVerdict>>& fact_verdicts) {
  CritiqueFeedback feedback;
  for (const auto& [fact, verdict] : fact_verdicts) {
    if (verdict != NliVerdict::Entailed) feedback.unsupported_facts.push_back(fact);
  }
  if (feedback.unsupported_facts.empty()) {
    feedback.text = kFaithfulSentence;
    return feedback;
  }
  feedback.text = kUnsupportedHeader;
  for (const AtomicFact& fact : feedback.unsupported_facts) {
    feedback.text += "\n- " + fact.text;
  }
  return feedback;
}

CritiqueResult binary_result_from_logprobs(double lp_yes, double lp_no) {
  const double score = lp_yes - lp_no;
  CritiqueFeedback feedback;
  feedback.text = score > 0.0 ? kUnfaithfulSentence : kFaithfulSentence;
  return CritiqueResult{HallucinationScore(score), std::move(feedback),
                        CritiqueStrategy::Binary, {}};
}

Critic::Critic(LlmClient& client, const PromptSet& prompts, CritiqueOptions options)
    : client_(client), prompts_(prompts), options_(std::move(options)) {}

CritiqueResult Critic::critique(const Document& document, const Summary& summary,
                                CritiqueStrategy strategy) const {
  return strategy == CritiqueStrategy::Binary
             ? critique_binary(document, summary)
             : critique_fine_grained(document, summary);
}

CritiqueResult Critic::critique_binary(const Document& document,
                                       const Summary& summary) const {
  const std::string prompt =
      render_prompt(prompts_.get(TemplateName::CritiqueBin),
                    {{"Document", document.text}, {"Summary", summary.text}});
  GenerationParams params;
  params.decode_mode = DecodeMode::Greedy;
  params.max_tokens = 1;
  ChatRequest request = make_user_request(
      prompt, params,
      "critique/" + document.id + "/" + std::to_string(summary.sample_index));
  request.want_logprobs = true;
  request.top_logprobs_k = 20;
  try {
    YesNoLogprobs lps = yes_no_logprobs(client_, request);
    return binary_result_from_logprobs(lps.lp_yes, lps.lp_no);
  } catch (const VerdictTokensAbsent& ex) {
    throw CritiqueFailed(std::string("binary critique: ") + ex.what());
  }
}

std::vector<AtomicFact> Critic::extract_atomic_facts(
    const Summary& summary, const std::string& tag_scope) const {
  const std::string prompt = render_prompt(prompts_.get(TemplateName::AtomicFact),
                                           {{"Sentence", summary.text}});
  GenerationParams params = options_.extraction_params;
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= options_.max_parse_retries; ++attempt) {
    Completion completion =
        client_.complete(make_user_request(prompt, params, tag_scope));
    try {
      return parse_fact_list(completion.choices.front().text);
    } catch (const EmptyFactList& ex) {
      last_error = ex.what();
      params.temperature += options_.retry_temperature_bump;
      params.decode_mode = DecodeMode::Sample;
    }
  }
  throw ExtractionFailed("fact extraction failed after " +
                         std::to_string(options_.max_parse_retries + 1) +
                         " attempts: " + last_error);
}

NliVerdict Critic::verify_fact(const Document& document, const AtomicFact& fact,
                               const std::string& tag) const {
  const std::string prompt =
      render_prompt(prompts_.get(TemplateName::Nli),
                    {{"Context", document.text}, {"Statement", fact.text}});
  GenerationParams params;
  params.decode_mode = options_.nli_decode;
  params.max_tokens = 16;
  Completion completion = client_.complete(make_user_request(prompt, params, tag));
  try {
    return parse_nli_label(completion.choices.front().text);
  } catch (const UnrecognizedLabel&) {
    // Unparseable verdicts count as not-entailed.
    return NliVerdict::Neutral;
  }
}

CritiqueResult Critic::critique_fine_grained(const Document& document,
                                             const Summary& summary) const {
  const std::string scope =
      document.id + "/" + std::to_string(summary.sample_index);
  std::vector<AtomicFact> facts;
  try {
    facts = extract_atomic_facts(summary, "facts/" + scope);
  } catch (const ExtractionFailed& ex) {
    throw CritiqueFailed(ex.what());
  }

  std::vector<NliVerdict> verdicts(facts.size(), NliVerdict::Neutral);
  auto nli_tag = [&](std::size_t i) {
    return "nli/" + scope + "/" + std::to_string(facts[i].index);
  };
  if (client_.max_concurrency() > 1 && facts.size() > 1) {
    std::vector<std::future<NliVerdict>> futures;
    futures.reserve(facts.size());
    for (std::size_t i = 0; i < facts.size(); ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] {
        return verify_fact(document, facts[i], nli_tag(i));
      }));
    }
    std::exception_ptr first_error;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        verdicts[i] = futures[i].get();
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (std::size_t i = 0; i < facts.size(); ++i) {
      verdicts[i] = verify_fact(document, facts[i], nli_tag(i));
    }
  }

  std::vector<std::pair<AtomicFact, NliVerdict>> fact_verdicts;
  fact_verdicts.reserve(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    fact_verdicts.emplace_back(facts[i], verdicts[i]);
  }
  const double score = non_entailed_fraction(verdicts);
  CritiqueFeedback feedback = fine_grained_feedback(fact_verdicts);
  return CritiqueResult{HallucinationScore(score), std::move(feedback),
                        CritiqueStrategy::FineGrained, std::move(fact_verdicts)};
}

}  // namespace sumpref
