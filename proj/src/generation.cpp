#include "sumpref/generation.hpp"

namespace sumpref {

std::vector<Summary> generate_summaries(LlmClient& client, const PromptSet& prompts,
                                        const Document& document, int n,
                                        const GenerationParams& params) {
  if (n < 1) throw PreconditionViolation("generate_summaries requires n >= 1");
  const std::string prompt = render_prompt(prompts.get(TemplateName::Summ),
                                           {{"Document", document.text}});
  std::vector<Summary> summaries;
  summaries.reserve(static_cast<std::size_t>(n));

  const bool batched = n > 1 && client.supports_multi_choice() &&
                       params.decode_mode == DecodeMode::Sample;
  if (batched) {
    GenerationParams batch = params;
    batch.n = n;
    Completion completion = client.complete(
        make_user_request(prompt, batch, "summ/" + document.id));
    for (int i = 0; i < n; ++i) {
      summaries.push_back(Summary{completion.choices[static_cast<std::size_t>(i)].text,
                                  SummaryOrigin::Initial, i});
    }
    return summaries;
  }

  GenerationParams single = params;
  single.n = 1;
  for (int i = 0; i < n; ++i) {
    Completion completion = client.complete(make_user_request(
        prompt, single, "summ/" + document.id + "/" + std::to_string(i)));
    summaries.push_back(
        Summary{completion.choices.front().text, SummaryOrigin::Initial, i});
  }
  return summaries;
}

Summary refine_summary(LlmClient& client, const PromptSet& prompts,
                       const RefinementInput& input, const GenerationParams& params) {
  if (!reports_unfaithfulness(input.comment)) {
    throw PreconditionViolation(
        "refine_summary requires a comment reporting unfaithfulness");
  }
  const std::string prompt =
      render_prompt(prompts.get(TemplateName::Refine),
                    {{"Document", input.document.text},
                     {"Summary", input.summary.text},
                     {"Comment", input.comment.text}});
  GenerationParams single = params;
  single.n = 1;
  Completion completion = client.complete(make_user_request(
      prompt, single,
      "refine/" + input.document.id + "/" +
          std::to_string(input.summary.sample_index)));
  return Summary{completion.choices.front().text, SummaryOrigin::Refined,
                 input.summary.sample_index};
}

}  // namespace sumpref
